use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LcftError, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const MAX_TERMS: usize = 1_000_000;

fn check_tau(tau: Complex64) -> Result<()> {
    if tau.im > 0.0 && tau.re.is_finite() {
        Ok(())
    } else {
        Err(LcftError::Domain(format!(
            "Im tau = {} must be positive",
            tau.im
        )))
    }
}

/// Dedekind η(τ) = q^{1/24} ∏(1 − qⁿ), q = e^{2πiτ}.
pub fn dedekind_eta(tau: Complex64) -> Result<Complex64> {
    check_tau(tau)?;
    let q = (2.0 * PI * I * tau).exp();
    let aq = q.norm();
    let mut prod = Complex64::new(1.0, 0.0);
    let mut qn = q;
    let mut mag = aq;
    let mut n = 0;
    while mag >= 1e-16 {
        prod *= 1.0 - qn;
        qn *= q;
        mag *= aq;
        n += 1;
        if n > MAX_TERMS {
            return Err(LcftError::Guard("eta product did not converge".into()));
        }
    }
    Ok((2.0 * PI * I * tau / 24.0).exp() * prod)
}

/// Jacobi ϑ₁(z,τ) = −i Σ_n (−1)ⁿ q^{(n+1/2)²} e^{(2n+1)πiz}, nome q = e^{iπτ}.
pub fn theta1(z: Complex64, tau: Complex64) -> Result<Complex64> {
    check_tau(tau)?;
    let ln_aq = -PI * tau.im;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut n: i64 = 0;
    loop {
        let mut below = true;
        for m in [n, -n - 1] {
            let h = m as f64 + 0.5;
            let bound = ln_aq * h * h + (2.0 * m as f64 + 1.0).abs() * PI * z.im.abs();
            if bound >= (1e-16f64).ln() {
                below = false;
            }
            let e = I * PI * tau * h * h + (2.0 * m as f64 + 1.0) * PI * I * z;
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            sum += sign * e.exp();
        }
        if below && n > 0 {
            break;
        }
        n += 1;
        if n as usize > MAX_TERMS {
            return Err(LcftError::Guard("theta series did not converge".into()));
        }
    }
    Ok(-I * sum)
}

/// ϑ₁ from its product form −i q^{1/6} e^{πiz} η(τ) ∏(1 − q^{2m}e^{2πiz})(1 − q^{2m−2}e^{−2πiz}).
pub fn theta1_product(z: Complex64, tau: Complex64) -> Result<Complex64> {
    check_tau(tau)?;
    let q = (PI * I * tau).exp();
    let q2 = q * q;
    let (ep, em) = ((2.0 * PI * I * z).exp(), (-2.0 * PI * I * z).exp());
    let mut prod = 1.0 - em;
    let mut q2m = q2;
    let mut n = 0;
    while q2m.norm() * ep.norm().max(em.norm()) >= 1e-17 {
        prod *= (1.0 - q2m * ep) * (1.0 - q2m * em);
        q2m *= q2;
        n += 1;
        if n > MAX_TERMS {
            return Err(LcftError::Guard("theta product did not converge".into()));
        }
    }
    Ok(-I * (PI * I * tau / 6.0).exp() * (PI * I * z).exp() * dedekind_eta(tau)? * prod)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eta_modular_relations() {
        let tau = c(0.0, 2.0);
        let r = dedekind_eta(tau + 1.0).unwrap() / dedekind_eta(tau).unwrap();
        assert!((r - (I * PI / 12.0).exp()).norm() < 1e-12);
        let tau = c(1.0, 1.0);
        let r = dedekind_eta(-1.0 / tau).unwrap() / dedekind_eta(tau).unwrap();
        assert!((r - (tau / I).sqrt()).norm() < 1e-12);
        let e = dedekind_eta(c(0.0, 10.0)).unwrap();
        assert!((e.re / (-10.0 * PI / 12.0).exp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eta_at_i() {
        // Γ(1/4) / (2π^{3/4})
        let e = dedekind_eta(c(0.0, 1.0)).unwrap();
        assert!((e.re - 0.768_225_422_326_056_7).abs() < 1e-14);
        assert!(e.im.abs() < 1e-15);
    }

    #[test]
    fn theta_basic() {
        let tau = c(0.0, 1.0);
        assert!(theta1(c(0.0, 0.0), tau).unwrap().norm() < 1e-16);
        let z = c(0.3, 0.1);
        let s = theta1(z, tau).unwrap() + theta1(-z, tau).unwrap();
        assert!(s.norm() < 1e-15);
        let (z, tau) = (c(0.2, 0.0), c(0.0, 2.0));
        let a = theta1(z, tau).unwrap();
        let b = theta1_product(z, tau).unwrap();
        assert!((a - b).norm() / a.norm() < 1e-12);
    }
}
