//! Free-field objects on the unit disk and the flat annulus.
//!
//! A boundary field is c + Σ_{n≠0} φ_n e^{inθ} with φ_n = (x_n + i y_n)/(2√n)
//! for 1 ≤ n ≤ M and φ_{−n} = conj φ_n. The reference measure μ₀ is
//! Lebesgue in c times standard Gaussians in every x_n, y_n. All integrals
//! against μ₀ below are one-dimensional Gaussian integrals done in closed form.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{LcftError, Result};
use crate::special_fn::dedekind_eta;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    pub c: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl BoundaryField {
    pub fn new(c: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(LcftError::DimensionMismatch(format!(
                "{} x modes, {} y modes",
                x.len(),
                y.len()
            )));
        }
        Ok(Self { c, x, y })
    }

    pub fn constant(c: f64, m: usize) -> Self {
        Self {
            c,
            x: vec![0.0; m],
            y: vec![0.0; m],
        }
    }

    /// Field with prescribed φ_n, n = 1..=M.
    pub fn from_modes(c: f64, phi: &[Complex64]) -> Self {
        let (x, y) = phi
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let s = 2.0 * ((i + 1) as f64).sqrt();
                (s * p.re, s * p.im)
            })
            .unzip();
        Self { c, x, y }
    }

    /// Zero mode c with x_n, y_n drawn from μ₀.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, c: f64, m: usize) -> Self {
        let mut draw = || {
            (0..m)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect::<Vec<_>>()
        };
        let x = draw();
        let y = draw();
        Self { c, x, y }
    }

    pub fn cutoff(&self) -> usize {
        self.x.len()
    }

    /// φ_n for n ≥ 1, with conj φ_n for n ≤ −1 and 0 for n = 0.
    pub fn mode(&self, n: i64) -> Complex64 {
        let k = n.unsigned_abs() as usize;
        if k == 0 || k > self.cutoff() {
            return Complex64::new(0.0, 0.0);
        }
        let p = Complex64::new(self.x[k - 1], self.y[k - 1]) / (2.0 * (k as f64).sqrt());
        if n > 0 {
            p
        } else {
            p.conj()
        }
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        let mut acc = self.c;
        for n in 1..=self.cutoff() {
            acc += 2.0 * (self.mode(n as i64) * Complex64::from_polar(1.0, n as f64 * theta)).re;
        }
        acc
    }
}

/// Harmonic extension of a boundary field into the unit disk.
#[derive(Debug, Clone)]
pub struct HarmonicExtension {
    field: BoundaryField,
}

impl HarmonicExtension {
    /// φ₀ + Σ_{n>0} φ_n zⁿ + φ_{−n} z̄ⁿ.
    pub fn at(&self, z: Complex64) -> Result<f64> {
        if z.norm() > 1.0 {
            return Err(LcftError::Domain(format!(
                "|z| = {} outside the closed disk",
                z.norm()
            )));
        }
        let mut acc = self.field.c;
        let mut zn = Complex64::new(1.0, 0.0);
        for n in 1..=self.field.cutoff() {
            zn *= z;
            acc += 2.0 * (self.field.mode(n as i64) * zn).re;
        }
        Ok(acc)
    }
}

/// Poisson extension and Dirichlet-to-Neumann image (multiplier |n|, constants killed).
pub fn poisson_dn_disk(f: &BoundaryField) -> (HarmonicExtension, BoundaryField) {
    let dn = BoundaryField {
        c: 0.0,
        x: f.x
            .iter()
            .enumerate()
            .map(|(i, v)| (i + 1) as f64 * v)
            .collect(),
        y: f.y
            .iter()
            .enumerate()
            .map(|(i, v)| (i + 1) as f64 * v)
            .collect(),
    };
    (HarmonicExtension { field: f.clone() }, dn)
}

fn annulus_t(q: Complex64) -> Result<f64> {
    let r = q.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(LcftError::Domain(format!("|q| = {r} not in (0, 1)")));
    }
    Ok(-r.ln())
}

fn check_pair(f: &BoundaryField, g: &BoundaryField) -> Result<()> {
    if f.cutoff() != g.cutoff() {
        return Err(LcftError::DimensionMismatch(format!(
            "cutoffs {} and {}",
            f.cutoff(),
            g.cutoff()
        )));
    }
    Ok(())
}

/// Exponent of the free transition from f to f′ over time t, modes only.
fn mode_exponent(t: f64, f: &BoundaryField, g: &BoundaryField) -> f64 {
    let mut acc = 0.0;
    for k in 0..f.cutoff() {
        let n = (k + 1) as f64;
        let e = (-n * t).exp();
        let v = -(-2.0 * n * t).exp_m1();
        for (a, b) in [(f.x[k], g.x[k]), (f.y[k], g.y[k])] {
            acc += (b - e * a).powi(2) / (2.0 * v) - b * b / 2.0;
        }
    }
    -acc
}

fn ln_mode_product(t: f64, m: usize) -> f64 {
    (1..=m)
        .map(|n| (-(-2.0 * n as f64 * t).exp_m1()).ln())
        .sum()
}

/// Free annulus amplitude A⁰ between boundary fields f (inner) and f′ (outer).
pub fn free_annulus_amplitude(q: Complex64, f: &BoundaryField, g: &BoundaryField) -> Result<f64> {
    let t = annulus_t(q)?;
    check_pair(f, g)?;
    Ok((-(f.c - g.c).powi(2) / (2.0 * t) + mode_exponent(t, f, g)).exp())
}

/// Integral kernel of e^{−tH₀} against μ₀ in its second argument.
pub fn heat_kernel_k0(t: f64, q_param: f64, f: &BoundaryField, g: &BoundaryField) -> Result<f64> {
    if t.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(LcftError::Domain(format!("t = {t} must be positive")));
    }
    check_pair(f, g)?;
    let ln_pref = -q_param * q_param * t / 2.0
        - 0.5 * (2.0 * std::f64::consts::PI * t).ln()
        - ln_mode_product(t, f.cutoff());
    Ok((ln_pref - (f.c - g.c).powi(2) / (2.0 * t) + mode_exponent(t, f, g)).exp())
}

/// exp(−a x² + b x + k) integrated over ℝ.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Quadratic {
    a: f64,
    b: f64,
    k: f64,
}

impl Quadratic {
    fn integrate(self) -> Result<f64> {
        if self.a.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(LcftError::Domain(format!(
                "Gaussian integral with curvature {}",
                self.a
            )));
        }
        Ok((std::f64::consts::PI / self.a).sqrt()
            * (self.b * self.b / (4.0 * self.a) + self.k).exp())
    }
}

/// ∫ K₀(t, f, ·) e^{(α−Q)c′} dμ₀, evaluated mode by mode in closed form.
pub fn k0_against_exponential(t: f64, q_param: f64, alpha: f64, f: &BoundaryField) -> Result<f64> {
    if t.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(LcftError::Domain(format!("t = {t} must be positive")));
    }
    let m = f.cutoff();
    let beta = alpha - q_param;
    // Zero mode: (2πt)^{−1/2} ∫ e^{−(c′−c)²/2t + βc′} dc′.
    let zero = Quadratic {
        a: 1.0 / (2.0 * t),
        b: f.c / t + beta,
        k: -f.c * f.c / (2.0 * t),
    }
    .integrate()?
        / (2.0 * std::f64::consts::PI * t).sqrt();
    let mut ln_modes = -ln_mode_product(t, m);
    for k in 0..m {
        let n = (k + 1) as f64;
        let e = (-n * t).exp();
        let v = -(-2.0 * n * t).exp_m1();
        for a in [f.x[k], f.y[k]] {
            // exp(−(b − e a)²/2v + b²/2) times the standard normal density in b.
            let quad = Quadratic {
                a: 1.0 / (2.0 * v),
                b: e * a / v,
                k: -(e * a).powi(2) / (2.0 * v) - 0.5 * (2.0 * std::f64::consts::PI).ln(),
            };
            ln_modes += quad.integrate()?.ln();
        }
    }
    Ok((-q_param * q_param * t / 2.0).exp() * zero * ln_modes.exp())
}

/// ∫ K₀(t, f, g) K₀(s, g, h) dμ₀(g), in closed form.
pub fn k0_composition(
    t: f64,
    s: f64,
    q_param: f64,
    f: &BoundaryField,
    h: &BoundaryField,
) -> Result<f64> {
    check_pair(f, h)?;
    if !(t > 0.0 && s > 0.0) {
        return Err(LcftError::Domain(format!(
            "times t = {t}, s = {s} must be positive"
        )));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let m = f.cutoff();
    let mut ln = -q_param * q_param * (t + s) / 2.0
        - 0.5 * (two_pi * t).ln()
        - 0.5 * (two_pi * s).ln()
        - ln_mode_product(t, m)
        - ln_mode_product(s, m);
    // c′ integral of e^{−(c′−c)²/2t − (c″−c′)²/2s}.
    let zero = Quadratic {
        a: 1.0 / (2.0 * t) + 1.0 / (2.0 * s),
        b: f.c / t + h.c / s,
        k: -f.c * f.c / (2.0 * t) - h.c * h.c / (2.0 * s),
    };
    ln += zero.integrate()?.ln();
    for k in 0..m {
        let n = (k + 1) as f64;
        let (et, vt) = ((-n * t).exp(), -(-2.0 * n * t).exp_m1());
        let (es, vs) = ((-n * s).exp(), -(-2.0 * n * s).exp_m1());
        for (a, b) in [(f.x[k], h.x[k]), (f.y[k], h.y[k])] {
            // Middle variable g: −(g − et a)²/2vt + g²/2 − (b − es g)²/2vs + b²/2 − g²/2 − ln√2π.
            let quad = Quadratic {
                a: 1.0 / (2.0 * vt) + es * es / (2.0 * vs),
                b: et * a / vt + es * b / vs,
                k: -(et * a).powi(2) / (2.0 * vt) - b * b / (2.0 * vs) + b * b / 2.0
                    - 0.5 * two_pi.ln(),
            };
            ln += quad.integrate()?.ln();
        }
    }
    Ok(ln.exp())
}

/// Z_{A_q} = 2^{−1/2}(2π/t)^{1/2}|q|^{−1/12}∏(1 − |q|^{2n})⁻¹ with t = −ln|q|.
pub fn annulus_partition(q: Complex64) -> Result<f64> {
    let t = annulus_t(q)?;
    let r2 = q.norm_sqr();
    let mut ln_prod = 0.0;
    let mut term = r2;
    while term > 1e-16 {
        ln_prod += (-term).ln_1p();
        term *= r2;
    }
    Ok((-0.5 * 2f64.ln() + 0.5 * (2.0 * std::f64::consts::PI / t).ln() + t / 12.0 - ln_prod).exp())
}

/// η(τ̃) with e^{2πiτ̃} = |q|², the modular form behind the annulus product.
pub fn annulus_eta(q: Complex64) -> Result<f64> {
    let t = annulus_t(q)?;
    Ok(dedekind_eta(Complex64::new(0.0, t / std::f64::consts::PI))?.re)
}
