use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LcftError, Result};

/// Coupling data of the theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CftParams {
    pub gamma: f64,
    pub mu: f64,
}

impl CftParams {
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 2.0) {
            return Err(LcftError::Domain(format!("gamma = {gamma} not in (0,2)")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(LcftError::Domain(format!("mu = {mu} must be positive")));
        }
        Ok(Self { gamma, mu })
    }

    /// Background charge Q = γ/2 + 2/γ.
    pub fn q(&self) -> f64 {
        self.gamma / 2.0 + 2.0 / self.gamma
    }

    /// Central charge c_L = 1 + 6Q².
    pub fn central_charge(&self) -> f64 {
        let q = self.q();
        1.0 + 6.0 * q * q
    }

    pub fn weight(&self, alpha: Complex64) -> Complex64 {
        conformal_weight(alpha, self)
    }

    /// Weight of the spectral state Q + ip, which is real: (Q² + p²)/4.
    pub fn spectral_weight(&self, p: f64) -> f64 {
        let q = self.q();
        (q * q + p * p) / 4.0
    }
}

/// Δ_α = (α/2)(Q − α/2).
pub fn conformal_weight(alpha: Complex64, params: &CftParams) -> Complex64 {
    alpha / 2.0 * (params.q() - alpha / 2.0)
}

/// Degenerate momentum α_{r,s} = Q − rγ/2 − 2s/γ.
pub fn kac_weight(r: u32, s: u32, params: &CftParams) -> f64 {
    params.q() - r as f64 * params.gamma / 2.0 - s as f64 * 2.0 / params.gamma
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_and_charges() {
        let p = CftParams::new(2f64.sqrt(), 1.0).unwrap();
        assert!((p.central_charge() - 28.0).abs() < 1e-12);
        assert!((p.spectral_weight(1.0) - 1.375).abs() < 1e-12);
        let g = Complex64::new(p.gamma, 0.0);
        assert!((conformal_weight(g, &p) - 1.0).norm() < 1e-14);
        assert_eq!(
            conformal_weight(Complex64::new(0.0, 0.0), &p),
            Complex64::new(0.0, 0.0)
        );
        let s = Complex64::new(p.q(), 1.0);
        assert!((conformal_weight(s, &p).re - 1.375).abs() < 1e-12);
        assert!(conformal_weight(s, &p).im.abs() < 1e-15);
    }

    #[test]
    fn kac_values() {
        let p = CftParams::new(1.3, 1.0).unwrap();
        assert!(kac_weight(1, 1, &p).abs() < 1e-15);
        assert!((kac_weight(2, 1, &p) + p.gamma / 2.0).abs() < 1e-15);
        assert!((kac_weight(1, 2, &p) + 2.0 / p.gamma).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_gamma() {
        assert!(CftParams::new(2.0, 1.0).is_err());
        assert!(CftParams::new(1.0, 0.0).is_err());
    }
}
