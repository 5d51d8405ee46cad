//! Gaussian free field and multiplicative chaos on the flat torus ℂ/(2πℤ + 2πτℤ),
//! and a Monte Carlo estimator of the one-point function built on them.
//!
//! Estimator. With φ = c + X, the flat metric (no curvature term) and the
//! vertex regularized by Wick ordering, the path integral is
//!
//!   P e^{α²W/2} ∫ dc e^{αc} E[e^{αX(0) − α²E[X(0)²]/2} exp(−μ e^{γc} e^{γ²W/2} M)],
//!
//! where M is the Wick-ordered chaos mass and P = (v/det′Δ)^{1/2}. Girsanov
//! moves the vertex into a shift X → X + αG(·, 0), and the c-integral is
//! γ⁻¹Γ(α/γ)(μA)^{−α/γ}. Both steps are checked against [`mc_direct_estimate`],
//! which keeps the vertex as a weight and integrates c numerically.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LcftError, Result};
use crate::params::CftParams;
use crate::quadrature::{gauss_legendre, pairwise_sum};
use crate::special_fn::{dedekind_eta, exp_integral_e1, gamma};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Flat torus with an n × n grid over the fundamental parallelogram and a frequency cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGeometry {
    pub tau: Complex64,
    pub grid: usize,
    /// Modes with |k|² ≤ cutoff² are kept.
    pub cutoff: f64,
}

impl TorusGeometry {
    /// Default cutoff n/2 − 1, the largest symmetric frequency the grid resolves.
    pub fn new(tau: Complex64, grid: usize) -> Result<Self> {
        if !(grid >= 4 && grid % 2 == 0) {
            return Err(LcftError::Domain(format!(
                "grid size {grid} must be even and at least 4"
            )));
        }
        Self::with_cutoff(tau, grid, (grid / 2 - 1) as f64)
    }

    pub fn with_cutoff(tau: Complex64, grid: usize, cutoff: f64) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(LcftError::Domain(format!(
                "Im τ = {} must be positive",
                tau.im
            )));
        }
        if !(cutoff >= 1.0) {
            return Err(LcftError::Domain(format!(
                "cutoff {cutoff} must be at least 1"
            )));
        }
        Ok(Self { tau, grid, cutoff })
    }

    pub fn area(&self) -> f64 {
        4.0 * PI * PI * self.tau.im
    }

    pub fn cell_area(&self) -> f64 {
        self.area() / (self.grid * self.grid) as f64
    }

    /// Grid spacing along the real period.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.grid as f64
    }

    /// 2π(s + tτ) for lattice coordinates (s, t).
    pub fn point_st(&self, s: f64, t: f64) -> Complex64 {
        2.0 * PI * (Complex64::new(s, 0.0) + t * self.tau)
    }

    /// Grid point (i, j), reduced to the parallelogram centred at 0.
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        let n = self.grid as f64;
        let centre = |k: usize| {
            let x = k as f64 / n;
            if x >= 0.5 {
                x - 1.0
            } else {
                x
            }
        };
        self.point_st(centre(i), centre(j))
    }

    /// Eigenvalue of e^{2πi(ms + nt)}.
    pub fn eigenvalue(&self, m: i64, n: i64) -> f64 {
        let (t1, t2) = (self.tau.re, self.tau.im);
        let ky = (n as f64 - m as f64 * t1) / t2;
        (m * m) as f64 + ky * ky
    }

    /// Retained modes (m, n, λ): nonzero, inside the grid's symmetric band and below the cutoff.
    pub fn modes(&self) -> Vec<(i64, i64, f64)> {
        let b = self.grid as i64 / 2 - 1;
        let mut out = Vec::new();
        for m in -b..=b {
            for n in -b..=b {
                if m == 0 && n == 0 {
                    continue;
                }
                let lam = self.eigenvalue(m, n);
                if lam <= self.cutoff * self.cutoff {
                    out.push((m, n, lam));
                }
            }
        }
        out
    }

    /// E[X(x)²] of the truncated field.
    pub fn truncated_variance(&self) -> f64 {
        let v = self.area();
        self.modes()
            .iter()
            .map(|&(_, _, l)| 2.0 * PI / (v * l))
            .sum()
    }

    /// Covariance of the truncated field between points separated by (s, t) in lattice coordinates.
    pub fn truncated_green(&self, s: f64, t: f64) -> f64 {
        let v = self.area();
        self.modes()
            .iter()
            .map(|&(m, n, l)| 2.0 * PI / (v * l) * (2.0 * PI * (m as f64 * s + n as f64 * t)).cos())
            .sum()
    }
}

/// Zero-mean Green function G(z, 0) of the flat torus. The additive constant is
/// ln|η(τ)|; grid quadrature of ∫G dv = 0 is kept alongside as a check.
#[derive(Debug, Clone, Serialize)]
pub struct TorusGreen {
    pub tau: Complex64,
    pub c0: f64,
    /// Midpoint-rule value of the constant.
    pub c0_quadrature: f64,
    pub quadrature_grid: usize,
}

fn sinc(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        1.0 - w * w / 6.0 + w.powu(4) / 120.0
    } else {
        w.sin() / w
    }
}

impl TorusGreen {
    pub const DEFAULT_QUADRATURE_GRID: usize = 512;

    pub fn new(tau: Complex64) -> Result<Self> {
        Self::with_quadrature(tau, Self::DEFAULT_QUADRATURE_GRID)
    }

    pub fn with_quadrature(tau: Complex64, n: usize) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(LcftError::Domain(format!(
                "Im τ = {} must be positive",
                tau.im
            )));
        }
        let c0 = dedekind_eta(tau)?.norm().ln();
        let mut g = Self {
            tau,
            c0: 0.0,
            c0_quadrature: 0.0,
            quadrature_grid: n,
        };
        // Midpoint rule on cell centres, which never meet the singularity.
        let vals: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let s = ((k / n) as f64 + 0.5) / n as f64 - 0.5;
                let t = ((k % n) as f64 + 0.5) / n as f64 - 0.5;
                g.raw(s, t)
            })
            .collect();
        g.c0_quadrature = -pairwise_sum(&vals, 0.0) / (n * n) as f64;
        if (g.c0_quadrature - c0).abs() > 1e-3 {
            return Err(LcftError::Consistency(format!(
                "Green constant by quadrature {} vs ln|η| = {c0}",
                g.c0_quadrature
            )));
        }
        g.c0 = c0;
        Ok(g)
    }

    /// Lattice coordinates (s, t) of z, reduced to [−1/2, 1/2)².
    fn lattice_coords(&self, z: Complex64) -> (f64, f64) {
        let t = z.im / (2.0 * PI * self.tau.im);
        let s = z.re / (2.0 * PI) - t * self.tau.re;
        let red = |x: f64| x - (x + 0.5).floor();
        (red(s), red(t))
    }

    /// −ln|ϑ₁(u)/sin(πu)|-type sum: the smooth part of −ln|ϑ₁(u)| with u = s + tτ.
    fn smooth_and_sine(&self, s: f64, t: f64) -> (f64, Complex64) {
        let u = Complex64::new(s, 0.0) + t * self.tau;
        let nome = (Complex64::i() * PI * self.tau).exp();
        let q2 = nome * nome;
        let (ep, em) = (
            (2.0 * PI * Complex64::i() * u).exp(),
            (-2.0 * PI * Complex64::i() * u).exp(),
        );
        let mut acc = 2f64.ln() - PI * self.tau.im / 4.0;
        let mut q2m = q2;
        while q2m.norm() * ep.norm().max(em.norm()) > 1e-18 {
            acc += (1.0 - q2m).norm().ln()
                + (1.0 - q2m * ep).norm().ln()
                + (1.0 - q2m * em).norm().ln();
            q2m *= q2;
        }
        (acc, u)
    }

    /// G without c0 at lattice coordinates already reduced to [−1/2, 1/2)².
    fn raw(&self, s: f64, t: f64) -> f64 {
        let (smooth, u) = self.smooth_and_sine(s, t);
        let y = 2.0 * PI * t * self.tau.im;
        -(smooth + (PI * u).sin().norm().ln()) + y * y / (4.0 * PI * self.tau.im)
    }

    /// G(z, 0).
    pub fn eval(&self, z: Complex64) -> Result<f64> {
        let (s, t) = self.lattice_coords(z);
        if s.abs() < 1e-14 && t.abs() < 1e-14 {
            return Err(LcftError::SingularPoint(format!(
                "G(z, 0) at lattice point z = {z}"
            )));
        }
        Ok(self.raw(s, t) + self.c0)
    }

    /// G(z, 0) + ln|z| for z near 0, finite at z = 0.
    pub fn regular_part(&self, z: Complex64) -> f64 {
        let (s, t) = self.lattice_coords(z);
        let (smooth, u) = self.smooth_and_sine(s, t);
        let y = 2.0 * PI * t * self.tau.im;
        // ln|sin πu| = ln|sinc(πu)| + ln|2πu| − ln 2 and |2πu| = |z| for the reduced z.
        -(smooth + sinc(PI * u).norm().ln() - 2f64.ln())
            + y * y / (4.0 * PI * self.tau.im)
            + self.c0
    }

    /// W = lim_{z→0} G(z, 0) + ln|z| = −2 ln|η|.
    pub fn w_closed(&self) -> f64 {
        -2.0 * self.c0
    }

    /// W by a least-squares fit of the angular mean of G + ln r against a + b r² on r ∈ [4h, 16h],
    /// with the range pulled in to a quarter of the shortest period on coarse grids.
    pub fn w_fit(&self, h: f64) -> Result<f64> {
        let shortest = 2.0
            * PI
            * (1.0f64)
                .min(self.tau.norm())
                .min((self.tau - 1.0).norm())
                .min(self.tau.im);
        let hi = (16.0 * h).min(shortest / 4.0);
        let lo = hi / 4.0;
        let radii: Vec<f64> = (0..9).map(|k| lo + (hi - lo) * k as f64 / 8.0).collect();
        let angles = 32;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &r in &radii {
            let mut acc = 0.0;
            for a in 0..angles {
                let th = 2.0 * PI * a as f64 / angles as f64;
                let z = Complex64::from_polar(r, th);
                acc += self.eval(z)? + r.ln();
            }
            xs.push(r * r);
            ys.push(acc / angles as f64);
        }
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Ok(my - sxy / sxx * mx)
    }
}

/// One real field sample on the n × n grid, row-major in the τ-direction index.
#[derive(Debug, Clone)]
pub struct GffSample {
    pub grid: usize,
    pub values: Vec<f64>,
}

impl GffSample {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid + j]
    }

    pub fn spatial_mean(&self) -> f64 {
        pairwise_sum(&self.values, 0.0) / self.values.len() as f64
    }
}

/// Spectral synthesis of the truncated GFF; each complex FFT yields two independent real fields.
#[derive(Clone)]
pub struct GffSampler {
    pub geom: TorusGeometry,
    /// (grid index of m, grid index of n, √(4π/(vλ))).
    modes: Vec<(usize, usize, f64)>,
    fft: Arc<dyn Fft<f64>>,
    pub variance: f64,
}

impl std::fmt::Debug for GffSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GffSampler")
            .field("geom", &self.geom)
            .field("modes", &self.modes.len())
            .finish()
    }
}

impl GffSampler {
    pub fn new(geom: TorusGeometry) -> Self {
        let n = geom.grid;
        let v = geom.area();
        let wrap = |k: i64| k.rem_euclid(n as i64) as usize;
        let modes = geom
            .modes()
            .into_iter()
            .map(|(m, k, l)| (wrap(m), wrap(k), (4.0 * PI / (v * l)).sqrt()))
            .collect();
        let fft = FftPlanner::new().plan_fft_inverse(n);
        Self {
            variance: geom.truncated_variance(),
            geom,
            modes,
            fft,
        }
    }

    fn synthesize<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<Complex64>) {
        let n = self.geom.grid;
        buf.clear();
        buf.resize(n * n, Complex64::new(0.0, 0.0));
        for &(m, k, amp) in &self.modes {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            buf[m * n + k] = Complex64::new(a, b) * (amp / 2f64.sqrt());
        }
        // Rows, then columns through a transpose.
        self.fft.process(buf);
        transpose(buf, n);
        self.fft.process(buf);
        transpose(buf, n);
    }

    /// Two independent samples (real and imaginary parts of one synthesis).
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (GffSample, GffSample) {
        let mut buf = Vec::new();
        self.synthesize(rng, &mut buf);
        let n = self.geom.grid;
        (
            GffSample {
                grid: n,
                values: buf.iter().map(|z| z.re).collect(),
            },
            GffSample {
                grid: n,
                values: buf.iter().map(|z| z.im).collect(),
            },
        )
    }
}

fn transpose(a: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            a.swap(i * n + j, j * n + i);
        }
    }
}

/// A single field sample drawn from `rng`.
pub fn sample_gff<R: Rng + ?Sized>(geom: &TorusGeometry, rng: &mut R) -> GffSample {
    GffSampler::new(*geom).sample_pair(rng).0
}

/// Wick-ordered Riemann sum Σ e^{γX − γ²E[X²]/2} · cell area.
pub fn gmc_mass(sample: &GffSample, geom: &TorusGeometry, gamma: f64) -> f64 {
    let shift = gamma * gamma * geom.truncated_variance() / 2.0;
    let terms: Vec<f64> = sample
        .values
        .iter()
        .map(|x| (gamma * x - shift).exp())
        .collect();
    pairwise_sum(&terms, 0.0) * geom.cell_area()
}

/// ∫_ℝ e^{sc − μe^{γc}M} dc = γ⁻¹Γ(s/γ)(μM)^{−s/γ}.
pub fn c_integral(s: f64, gamma_: f64, mu_m: f64) -> Result<f64> {
    if !(s > 0.0 && gamma_ > 0.0 && mu_m > 0.0) {
        return Err(LcftError::Domain("c-integral needs s, γ, μM > 0".into()));
    }
    Ok(gamma(Complex64::new(s / gamma_, 0.0))?.re / gamma_ * mu_m.powf(-s / gamma_))
}

/// The same integral by composite Gauss–Legendre around the maximum, for the direct estimator.
pub fn c_integral_numeric(s: f64, gamma_: f64, mu_m: f64) -> f64 {
    let peak = (s / (gamma_ * mu_m)).ln() / gamma_;
    let (lo, hi) = (peak - 60.0 / s, peak + 8.0 / gamma_);
    let panels = 96;
    let (x, w) = gauss_legendre(12);
    let h = (hi - lo) / panels as f64;
    let mut acc = Vec::with_capacity(panels * x.len());
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            let c = a + h * (xi + 1.0) / 2.0;
            acc.push(wi * h / 2.0 * (s * c - mu_m * (gamma_ * c).exp()).exp());
        }
    }
    pairwise_sum(&acc, 0.0)
}

/// ζ′(0) of the flat-torus Laplacian by splitting the heat trace at t = 1:
/// Σ_k E₁(λ_k) − v/4π + (v/π) Σ_ℓ e^{−|ℓ|²/4}/|ℓ|² − γ_E over eigenvalues and lattice vectors.
pub fn zeta_prime_zero(tau: Complex64, scale: f64, range: i64) -> Result<f64> {
    if !(tau.im > 0.0 && scale > 0.0) {
        return Err(LcftError::Domain(
            "zeta continuation needs Im τ > 0 and a positive scale".into(),
        ));
    }
    let (t1, t2) = (tau.re, tau.im);
    let v = 4.0 * PI * PI * t2 * scale * scale;
    let mut terms = Vec::new();
    for m in -range..=range {
        for n in -range..=range {
            if m == 0 && n == 0 {
                continue;
            }
            let ky = (n as f64 - m as f64 * t1) / t2;
            let lam = ((m * m) as f64 + ky * ky) / (scale * scale);
            terms.push(exp_integral_e1(lam)?);
            let lx = 2.0 * PI * scale * (m as f64 + n as f64 * t1);
            let ly = 2.0 * PI * scale * n as f64 * t2;
            let l2 = lx * lx + ly * ly;
            terms.push(v / PI * (-l2 / 4.0).exp() / l2);
        }
    }
    Ok(pairwise_sum(&terms, 0.0) - v / (4.0 * PI) - EULER_GAMMA)
}

/// det′Δ = (2π)²(Im τ)²|η(τ)|⁴.
pub fn det_prime_closed(tau: Complex64) -> Result<f64> {
    Ok(4.0 * PI * PI * tau.im * tau.im * dedekind_eta(tau)?.norm().powi(4))
}

/// (v/det′Δ)^{1/2} = (Im τ)^{−1/2}|η(τ)|⁻², checked against the zeta continuation.
pub fn torus_det_prefactor(tau: Complex64) -> Result<f64> {
    let closed = det_prime_closed(tau)?;
    let zeta = (-zeta_prime_zero(tau, 1.0, 24)?).exp();
    if ((closed - zeta) / closed).abs() > 0.01 {
        return Err(LcftError::Consistency(format!(
            "det′Δ closed form {closed} vs zeta continuation {zeta}"
        )));
    }
    Ok((4.0 * PI * PI * tau.im / closed).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftKernel {
    /// Continuum G(x, 0) with polar quadrature on the cell at 0.
    Exact,
    /// Covariance of the truncated field, midpoint rule everywhere.
    Truncated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub samples: usize,
    pub batches: usize,
    pub grid: usize,
    pub shift: ShiftKernel,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            samples: 200_000,
            batches: 40,
            grid: 128,
            shift: ShiftKernel::Exact,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub alpha: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub batches: usize,
    pub grid: usize,
    pub cutoff: f64,
    /// W used in the analytic factor.
    pub w: f64,
    /// P γ⁻¹Γ(α/γ)(μe^{γ²W/2})^{−α/γ}e^{α²W/2}.
    pub analytic_factor: f64,
    /// Relative standard error above 50%.
    pub unreliable: bool,
    pub batch_means: Vec<f64>,
}

impl McEstimate {
    pub fn batch_csv(&self) -> String {
        let mut s = String::from("batch,mean\n");
        for (i, m) in self.batch_means.iter().enumerate() {
            s.push_str(&format!("{i},{m:e}\n"));
        }
        s
    }
}

fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

fn batch_sizes(samples: usize, batches: usize) -> Result<Vec<usize>> {
    if batches < 20 {
        return Err(LcftError::Guard(format!(
            "{batches} batches; at least 20 are needed for an error bar"
        )));
    }
    if samples < 2 * batches {
        return Err(LcftError::Guard(format!(
            "{samples} samples cannot fill {batches} batches with pairs"
        )));
    }
    // Even sizes so every synthesis contributes both of its fields.
    let per = samples / batches / 2 * 2;
    Ok(vec![per; batches])
}

fn summarize(batch_means: Vec<f64>, scale: f64) -> (f64, f64) {
    let b = batch_means.len() as f64;
    let mean = pairwise_sum(&batch_means, 0.0) / b;
    let var = batch_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (scale * mean, scale * (var / b).sqrt())
}

/// ∫_cell e^{sG(x,0)} dA over the grid cell centred at 0, by polar quadrature in sectors
/// between the cell corners, with r = R u^{1/(2−s)} removing the |x|^{−s} singularity.
pub fn singular_cell_integral(green: &TorusGreen, geom: &TorusGeometry, s: f64) -> Result<f64> {
    if !(s < 2.0) {
        return Err(LcftError::Guard(format!(
            "α γ = {s} ≥ 2: the vertex singularity is not integrable on a cell"
        )));
    }
    let half = 0.5 / geom.grid as f64;
    let corners: Vec<Complex64> = [(half, half), (-half, half), (-half, -half), (half, -half)]
        .iter()
        .map(|&(a, b)| geom.point_st(a, b))
        .collect();
    // Map x ↦ lattice coordinates to find where a ray leaves the cell.
    let (t1, t2) = (geom.tau.re, geom.tau.im);
    let to_st = |d: Complex64| {
        let t = d.im / (2.0 * PI * t2);
        (d.re / (2.0 * PI) - t * t1, t)
    };
    let exit = |th: f64| {
        let (a, b) = to_st(Complex64::from_polar(1.0, th));
        half / a.abs().max(b.abs())
    };
    let mut angles: Vec<f64> = corners
        .iter()
        .map(|c| c.arg().rem_euclid(2.0 * PI))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.push(angles[0] + 2.0 * PI);
    let (xa, wa) = gauss_legendre(24);
    let (xr, wr) = gauss_legendre(32);
    let p = 1.0 / (2.0 - s);
    let mut acc = Vec::new();
    for k in 0..4 {
        let (a0, a1) = (angles[k], angles[k + 1]);
        for (xi, wi) in xa.iter().zip(&wa) {
            let th = a0 + (a1 - a0) * (xi + 1.0) / 2.0;
            let r_max = exit(th);
            let mut radial = 0.0;
            for (xj, wj) in xr.iter().zip(&wr) {
                let u = (xj + 1.0) / 2.0;
                let r = r_max * u.powf(p);
                radial += wj / 2.0 * (s * green.regular_part(Complex64::from_polar(r, th))).exp();
            }
            acc.push(wi * (a1 - a0) / 2.0 * radial * r_max.powf(2.0 - s) * p);
        }
    }
    Ok(pairwise_sum(&acc, 0.0))
}

/// Shift kernel e^{αγ G(x_i, 0)} · cell area on the grid, for one α.
fn shift_table(
    green: &TorusGreen,
    geom: &TorusGeometry,
    alpha: f64,
    gamma_: f64,
    kind: ShiftKernel,
) -> Result<Vec<f64>> {
    let n = geom.grid;
    let s = alpha * gamma_;
    let area = geom.cell_area();
    let mut table = vec![0.0; n * n];
    match kind {
        ShiftKernel::Exact => {
            for i in 0..n {
                for j in 0..n {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    table[i * n + j] = (s * green.eval(geom.point(i, j))?).exp() * area;
                }
            }
            table[0] = singular_cell_integral(green, geom, s)?;
        }
        ShiftKernel::Truncated => {
            for i in 0..n {
                for j in 0..n {
                    let g = geom.truncated_green(i as f64 / n as f64, j as f64 / n as f64);
                    table[i * n + j] = (s * g).exp() * area;
                }
            }
        }
    }
    Ok(table)
}

fn check_alpha(alpha: f64, params: &CftParams) -> Result<()> {
    if !(alpha > 0.0 && alpha < params.q()) {
        return Err(LcftError::Validation(vec![crate::error::Violation {
            vertex: Some(0),
            rule: "alpha in (0, Q)".into(),
            margin: alpha.min(params.q() - alpha),
        }]));
    }
    Ok(())
}

/// Shared pieces of the torus estimators at one geometry.
pub struct TorusOracle {
    pub geom: TorusGeometry,
    pub green: TorusGreen,
    pub sampler: GffSampler,
    pub det_prefactor: f64,
    pub w: f64,
}

impl TorusOracle {
    pub fn new(tau: Complex64, grid: usize) -> Result<Self> {
        let geom = TorusGeometry::new(tau, grid)?;
        let green = TorusGreen::new(tau)?;
        let w = green.w_fit(geom.spacing())?;
        Ok(Self {
            sampler: GffSampler::new(geom),
            det_prefactor: torus_det_prefactor(tau)?,
            green,
            geom,
            w,
        })
    }

    fn analytic_factor(&self, alpha: f64, params: &CftParams) -> Result<f64> {
        let g = params.gamma;
        let base = c_integral(alpha, g, params.mu * (g * g * self.w / 2.0).exp())?;
        Ok(self.det_prefactor * base * (alpha * alpha * self.w / 2.0).exp())
    }

    /// E[Z^{−α/γ}] estimators for several α from the same field samples.
    pub fn one_point(
        &self,
        alphas: &[f64],
        params: &CftParams,
        cfg: &McConfig,
    ) -> Result<Vec<McEstimate>> {
        if cfg.grid != self.geom.grid {
            return Err(LcftError::DimensionMismatch(format!(
                "config grid {} vs oracle grid {}",
                cfg.grid, self.geom.grid
            )));
        }
        for &a in alphas {
            check_alpha(a, params)?;
        }
        let g = params.gamma;
        let tables = alphas
            .iter()
            .map(|&a| shift_table(&self.green, &self.geom, a, g, cfg.shift))
            .collect::<Result<Vec<_>>>()?;
        let wick = (-g * g * self.sampler.variance / 2.0).exp();
        let sizes = batch_sizes(cfg.samples, cfg.batches)?;
        let per_batch: Vec<Vec<f64>> = sizes
            .par_iter()
            .enumerate()
            .map(|(b, &size)| {
                let mut rng = batch_rng(cfg.seed, b);
                let mut sums = vec![Vec::with_capacity(size); alphas.len()];
                let mut weights = vec![0.0; self.geom.grid * self.geom.grid];
                for _ in 0..size / 2 {
                    let (x, y) = self.sampler.sample_pair(&mut rng);
                    for field in [x, y] {
                        for (w, v) in weights.iter_mut().zip(&field.values) {
                            *w = (g * v).exp();
                        }
                        for (k, table) in tables.iter().enumerate() {
                            let z: f64 =
                                table.iter().zip(&weights).map(|(t, w)| t * w).sum::<f64>() * wick;
                            sums[k].push(z.powf(-alphas[k] / g));
                        }
                    }
                }
                sums.iter()
                    .map(|s| pairwise_sum(s, 0.0) / s.len() as f64)
                    .collect()
            })
            .collect();
        let used: usize = sizes.iter().sum();
        alphas
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                let factor = self.analytic_factor(a, params)?;
                let means: Vec<f64> = per_batch.iter().map(|b| b[k]).collect();
                let (mean, stderr) = summarize(means.clone(), factor);
                Ok(McEstimate {
                    alpha: a,
                    mean,
                    stderr,
                    samples: used,
                    batches: cfg.batches,
                    grid: self.geom.grid,
                    cutoff: self.geom.cutoff,
                    w: self.w,
                    analytic_factor: factor,
                    unreliable: !(stderr.abs() <= 0.5 * mean.abs()),
                    batch_means: means,
                })
            })
            .collect()
    }

    /// Unreduced estimator: the vertex stays a weight, the c-integral is numeric.
    pub fn direct(&self, alpha: f64, params: &CftParams, cfg: &McConfig) -> Result<McEstimate> {
        check_alpha(alpha, params)?;
        let g = params.gamma;
        let var = self.sampler.variance;
        let mass_scale = params.mu * (g * g * self.w / 2.0).exp();
        let sizes = batch_sizes(cfg.samples, cfg.batches)?;
        let means: Vec<f64> = sizes
            .par_iter()
            .enumerate()
            .map(|(b, &size)| {
                let mut rng = batch_rng(cfg.seed, b);
                let mut vals = Vec::with_capacity(size);
                for _ in 0..size / 2 {
                    let (x, y) = self.sampler.sample_pair(&mut rng);
                    for field in [x, y] {
                        let vertex = (alpha * field.values[0] - alpha * alpha * var / 2.0).exp();
                        let m = gmc_mass(&field, &self.geom, g);
                        vals.push(vertex * c_integral_numeric(alpha, g, mass_scale * m));
                    }
                }
                pairwise_sum(&vals, 0.0) / vals.len() as f64
            })
            .collect();
        let factor = self.det_prefactor * (alpha * alpha * self.w / 2.0).exp();
        let (mean, stderr) = summarize(means.clone(), factor);
        Ok(McEstimate {
            alpha,
            mean,
            stderr,
            samples: sizes.iter().sum(),
            batches: cfg.batches,
            grid: self.geom.grid,
            cutoff: self.geom.cutoff,
            w: self.w,
            analytic_factor: factor,
            unreliable: !(stderr.abs() <= 0.5 * mean.abs()),
            batch_means: means,
        })
    }
}

/// MC estimate of ⟨V_{α₁}(0)⟩ on the flat torus.
pub fn mc_torus_one_point(
    alpha1: f64,
    tau: Complex64,
    params: &CftParams,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let oracle = TorusOracle::new(tau, cfg.grid)?;
    Ok(oracle.one_point(&[alpha1], params, cfg)?.remove(0))
}

/// Like [`mc_torus_one_point`] but keeping the vertex as a weight and integrating c numerically.
pub fn mc_direct_estimate(
    alpha1: f64,
    tau: Complex64,
    params: &CftParams,
    cfg: &McConfig,
) -> Result<McEstimate> {
    TorusOracle::new(tau, cfg.grid)?.direct(alpha1, params, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_integral_at_unit_arguments() {
        let g = 1.3;
        assert!((c_integral(g, g, 1.0).unwrap() - 1.0 / g).abs() < 1e-14);
        let a = c_integral(0.9, g, 2.5).unwrap();
        let b = c_integral_numeric(0.9, g, 2.5);
        assert!((a - b).abs() < 1e-10 * a, "{a} {b}");
    }

    #[test]
    fn mode_set_is_symmetric() {
        let geom = TorusGeometry::new(Complex64::new(0.2, 1.1), 16).unwrap();
        let modes = geom.modes();
        for &(m, n, l) in &modes {
            assert!(modes
                .iter()
                .any(|&(a, b, k)| a == -m && b == -n && (k - l).abs() < 1e-12));
        }
    }
}
