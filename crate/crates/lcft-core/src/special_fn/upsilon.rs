use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gamma::ln_l_ratio;
use crate::error::{LcftError, Result};
use crate::quadrature::gl16;

/// Evaluator for Υ_{γ/2}: strip integral plus shift relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpsilonEvaluator {
    pub gamma: f64,
    /// Minimum truncation point of the strip integral.
    pub t_min: f64,
    /// The integral is used directly when both Re z and Q − Re z exceed this margin.
    pub edge_margin: f64,
    pub shift_budget: usize,
    /// Below this t the integrand is replaced by its Taylor series.
    pub series_switch: f64,
}

/// Outcome of one shift step of the functional equations.
enum Step {
    Up(f64),
    Down(f64),
}

impl UpsilonEvaluator {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 2.0) {
            return Err(LcftError::Domain(format!("gamma = {gamma} not in (0,2)")));
        }
        Ok(Self {
            gamma,
            t_min: 80.0,
            edge_margin: 0.1,
            shift_budget: 256,
            series_switch: 1e-3,
        })
    }

    pub fn q(&self) -> f64 {
        self.gamma / 2.0 + 2.0 / self.gamma
    }

    /// Integrand of ln Υ at t > 0, with a = Q/2 − z.
    fn integrand(&self, a: Complex64, t: f64) -> Complex64 {
        let b = self.gamma / 4.0;
        let a2 = a * a;
        if t < self.series_switch {
            let b2 = b * b;
            let b4 = b2 * b2;
            let c1 = -a2 * (8.0 * a2 * b2 - 16.0 * b4 - 48.0 * b2 - 1.0) / (96.0 * b2);
            let c3 = -a2
                * (256.0 * a2 * a2 * b4 - 1280.0 * a2 * b4 * b2 - 80.0 * a2 * b2
                    + 1792.0 * b4 * b4
                    - 3680.0 * b4
                    + 7.0)
                / (92160.0 * b4);
            return -a2 + t * (c1 + t * (-a2 / 6.0 + t * (c3 - t * a2 / 120.0)));
        }
        let d = 1.0 / self.gamma;
        let ratio = if t <= 2.0 {
            let s = (a * t / 2.0).sinh();
            s * s / ((b * t).sinh() * (d * t).sinh())
        } else {
            let half_q = b + d;
            let num = (a * t - half_q * t).exp() - 2.0 * (-half_q * t).exp()
                + (-a * t - half_q * t).exp();
            num / ((-(-2.0 * b * t).exp_m1()) * (-(-2.0 * d * t).exp_m1()))
        };
        (a2 * (-t).exp() - ratio) / t
    }

    /// ln Υ(z) from the strip integral; requires 0 < Re z < Q.
    pub fn ln_strip_integral(&self, z: Complex64) -> Result<Complex64> {
        let q = self.q();
        let dist = z.re.min(q - z.re);
        if dist <= 0.0 {
            return Err(LcftError::Domain(format!(
                "Re z = {} outside the strip (0, {q})",
                z.re
            )));
        }
        let a = Complex64::new(q / 2.0, 0.0) - z;
        if a.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        // Tail decays like e^{−dist·t}; e^{−36} keeps it below 1e-15 relative.
        let t_max = self.t_min.max(36.0 / dist);
        let width = 1.0 / (1.0 + a.im.abs() / 4.0);
        let panels = (t_max / width).ceil() as usize;
        let h = t_max / panels as f64;
        let (x, w) = gl16();
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..panels {
            let lo = k as f64 * h;
            let mut panel = Complex64::new(0.0, 0.0);
            for (xi, wi) in x.iter().zip(w) {
                panel += *wi * self.integrand(a, lo + h * (xi + 1.0) / 2.0);
            }
            total += panel * (h / 2.0);
        }
        Ok(total)
    }

    fn next_step(&self, re: f64) -> Option<Step> {
        let q = self.q();
        let (g2, tg) = (self.gamma / 2.0, 2.0 / self.gamma);
        let (lo, hi) = (self.edge_margin, q - self.edge_margin);
        if re < lo {
            Some(Step::Up(if re + tg <= hi { tg } else { g2 }))
        } else if re > hi {
            Some(Step::Down(if re - tg >= lo { tg } else { g2 }))
        } else {
            None
        }
    }

    /// ln of the multiplier m(w) in Υ(w + s) = m(w) Υ(w) for a step s ∈ {γ/2, 2/γ}.
    fn ln_multiplier(&self, w: Complex64, s: f64) -> Result<Complex64> {
        let lg = (self.gamma / 2.0).ln();
        if s == self.gamma / 2.0 {
            Ok(ln_l_ratio(self.gamma * w / 2.0)? + (1.0 - self.gamma * w) * lg)
        } else {
            Ok(ln_l_ratio(2.0 * w / self.gamma)? + (4.0 * w / self.gamma - 1.0) * lg)
        }
    }

    /// ln Υ(z), real part −∞ at zeros. Branch of the imaginary part is arbitrary.
    pub fn ln_upsilon(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(LcftError::Domain("non-finite argument".into()));
        }
        let mut w = z;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zero = false;
        let mut steps = 0;
        while let Some(step) = self.next_step(w.re) {
            steps += 1;
            if steps > self.shift_budget {
                let needed = steps + self.count_remaining(w);
                return Err(LcftError::BudgetExceeded {
                    needed,
                    budget: self.shift_budget,
                });
            }
            match step {
                Step::Up(s) => {
                    // Υ(w) = Υ(w+s) / m(w)
                    match self.ln_multiplier(w, s) {
                        Ok(m) if m.re == f64::NEG_INFINITY => {
                            return Err(LcftError::Consistency(format!(
                                "shift multiplier vanishes at w = {w}"
                            )))
                        }
                        Ok(m) => acc -= m,
                        Err(LcftError::Pole { .. }) => zero = true,
                        Err(e) => return Err(e),
                    }
                    w += s;
                }
                Step::Down(s) => {
                    // Υ(w) = m(w−s) Υ(w−s)
                    let v = w - s;
                    match self.ln_multiplier(v, s) {
                        Ok(m) if m.re == f64::NEG_INFINITY => zero = true,
                        Ok(m) => acc += m,
                        Err(LcftError::Pole { .. }) => {
                            return Err(LcftError::Consistency(format!(
                                "shift multiplier has a pole at w = {v}"
                            )))
                        }
                        Err(e) => return Err(e),
                    }
                    w = v;
                }
            }
        }
        if zero {
            return Ok(Complex64::new(f64::NEG_INFINITY, 0.0));
        }
        Ok(acc + self.ln_strip_integral(w)?)
    }

    fn count_remaining(&self, z: Complex64) -> usize {
        let mut w = z.re;
        let mut n = 0;
        while let Some(step) = self.next_step(w) {
            match step {
                Step::Up(s) => w += s,
                Step::Down(s) => w -= s,
            }
            n += 1;
        }
        n
    }

    pub fn upsilon(&self, z: Complex64) -> Result<Complex64> {
        let l = self.ln_upsilon(z)?;
        if l.re == f64::NEG_INFINITY {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(l.exp())
    }

    /// Υ′(0), equal to Υ(γ/2) by the z → 0 limit of the first shift relation.
    pub fn upsilon_prime_zero(&self) -> Result<Complex64> {
        self.upsilon(Complex64::new(self.gamma / 2.0, 0.0))
    }

    /// Richardson-extrapolated central difference of Υ at 0.
    pub fn upsilon_prime_zero_fd(&self, h: f64) -> Result<f64> {
        let d = |h: f64| -> Result<f64> {
            let up = self.upsilon(Complex64::new(h, 0.0))?.re;
            let dn = self.upsilon(Complex64::new(-h, 0.0))?.re;
            Ok((up - dn) / (2.0 * h))
        };
        let (d1, d2, d4) = (d(h)?, d(h / 2.0)?, d(h / 4.0)?);
        let r1 = (4.0 * d2 - d1) / 3.0;
        let r2 = (4.0 * d4 - d2) / 3.0;
        Ok((16.0 * r2 - r1) / 15.0)
    }

    /// Υ′(0) with the finite-difference cross-check enforced at 1e-6 relative.
    pub fn upsilon_prime_zero_checked(&self) -> Result<Complex64> {
        let v = self.upsilon_prime_zero()?;
        let fd = self.upsilon_prime_zero_fd(0.02)?;
        let rel = (v.re - fd).abs() / v.re.abs();
        if rel > 1e-6 {
            return Err(LcftError::Consistency(format!(
                "Υ′(0): Υ(γ/2) = {} vs finite difference {fd} (rel {rel:e})",
                v.re
            )));
        }
        Ok(v)
    }

    /// Distance from z to the zero lattice (−γ/2ℕ − 2/γℕ) ∪ (Q + γ/2ℕ + 2/γℕ).
    pub fn zero_distance(&self, z: Complex64) -> f64 {
        let q = self.q();
        let (g2, tg) = (self.gamma / 2.0, 2.0 / self.gamma);
        let mut best = f64::INFINITY;
        let mut scan = |x0: f64, sign: f64| {
            let reach = (sign * (z.re - x0)).max(0.0) + 1.0;
            let mmax = (reach / g2).ceil() as usize;
            for m in 0..=mmax {
                let nmax = ((reach - m as f64 * g2).max(0.0) / tg).ceil() as usize;
                for n in 0..=nmax {
                    let x = x0 + sign * (m as f64 * g2 + n as f64 * tg);
                    best = best.min((z - x).norm());
                }
            }
        };
        scan(0.0, -1.0);
        scan(q, 1.0);
        best
    }
}
