//! DOZZ structure constants and the spectral densities built from them.

use num_complex::Complex64;

use crate::error::{LcftError, Result};
use crate::graph::{AdmissibleGraph, SlotUse};
use crate::params::CftParams;
use crate::special_fn::{ln_l_ratio, UpsilonEvaluator};

pub const DEFAULT_POLE_THRESHOLD: f64 = 1e-6;

/// C^DOZZ_{γ,μ} with one shared Υ evaluator and a cached Υ′(0).
#[derive(Debug, Clone)]
pub struct Dozz {
    pub params: CftParams,
    pub upsilon: UpsilonEvaluator,
    pub pole_threshold: f64,
    ln_upsilon_prime_zero: Complex64,
    /// ln(π l(γ²/4) (γ/2)^{2−γ²/2}), the μ-free part of the prefactor base.
    ln_base: f64,
}

impl Dozz {
    pub fn new(params: CftParams) -> Result<Self> {
        let upsilon = UpsilonEvaluator::new(params.gamma)?;
        let g = params.gamma;
        let ln_upsilon_prime_zero = upsilon.upsilon_prime_zero_checked()?.ln();
        let ln_l = ln_l_ratio(Complex64::new(g * g / 4.0, 0.0))?.re;
        let ln_base = std::f64::consts::PI.ln() + ln_l + (2.0 - g * g / 2.0) * (g / 2.0).ln();
        Ok(Self {
            params,
            upsilon,
            pole_threshold: DEFAULT_POLE_THRESHOLD,
            ln_upsilon_prime_zero,
            ln_base,
        })
    }

    pub fn with_pole_threshold(mut self, t: f64) -> Self {
        self.pole_threshold = t;
        self
    }

    /// Exponent (2Q − ᾱ)/γ of μ in C(α₁, α₂, α₃).
    pub fn mu_exponent(&self, alphas: [Complex64; 3]) -> Complex64 {
        let bar: Complex64 = alphas.iter().sum();
        (2.0 * self.params.q() - bar) / self.params.gamma
    }

    /// ln C, or re = −∞ when a numerator Υ vanishes.
    pub fn ln_constant(&self, alphas: [Complex64; 3]) -> Result<Complex64> {
        let q = self.params.q();
        let half: Complex64 = alphas.iter().sum::<Complex64>() / 2.0;
        let den = [
            half - q,
            half - alphas[0],
            half - alphas[1],
            half - alphas[2],
        ];
        for (i, z) in den.iter().enumerate() {
            let distance = self.upsilon.zero_distance(*z);
            if distance < self.pole_threshold {
                let label = ["ᾱ/2 − Q", "ᾱ/2 − α₁", "ᾱ/2 − α₂", "ᾱ/2 − α₃"][i];
                return Err(LcftError::NearPole {
                    arg: format!("{label} = {z}"),
                    distance,
                });
            }
        }
        let ln_b = self.ln_base + self.params.mu.ln();
        let mut acc = self.mu_exponent(alphas) * ln_b + self.ln_upsilon_prime_zero;
        for a in alphas {
            acc += self.upsilon.ln_upsilon(a)?;
        }
        for z in den {
            acc -= self.upsilon.ln_upsilon(z)?;
        }
        Ok(acc)
    }

    pub fn constant(&self, alphas: [Complex64; 3]) -> Result<Complex64> {
        let l = self.ln_constant(alphas)?;
        if l.re == f64::NEG_INFINITY {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(l.exp())
    }

    fn spec(&self, p: f64, sign: f64) -> Complex64 {
        Complex64::new(self.params.q(), sign * p)
    }

    /// C(Q + ip, α₁, Q − ip).
    pub fn rho_torus_one_point(&self, alpha1: f64, p: f64) -> Result<Complex64> {
        self.constant([
            self.spec(p, 1.0),
            Complex64::new(alpha1, 0.0),
            self.spec(p, -1.0),
        ])
    }

    /// ∏_j C(Q + ip_j, α_j, Q − ip_{j−1}) with p₀ = p_k.
    pub fn rho_torus_chain(&self, alphas: &[f64], ps: &[f64]) -> Result<Complex64> {
        let k = alphas.len();
        if k == 0 || ps.len() != k {
            return Err(LcftError::DimensionMismatch(format!(
                "{} weights for {} momenta",
                k,
                ps.len()
            )));
        }
        let mut acc = Complex64::new(1.0, 0.0);
        for j in 0..k {
            let prev = if j == 0 { k - 1 } else { j - 1 };
            acc *= self.constant([
                self.spec(ps[j], 1.0),
                Complex64::new(alphas[j], 0.0),
                self.spec(ps[prev], -1.0),
            ])?;
        }
        Ok(acc)
    }

    /// C(α₁, α₂, Q − ip₂) C(α_k, α_{k−1}, Q + ip_{k−2}) ∏_{j=2}^{k−3} C(Q + ip_j, α_{j+1}, Q − ip_{j+1}).
    pub fn rho_sphere_chain(&self, alphas: &[f64], ps: &[f64]) -> Result<Complex64> {
        let k = alphas.len();
        if k < 4 || ps.len() != k - 3 {
            return Err(LcftError::DimensionMismatch(format!(
                "{} weights for {} momenta",
                k,
                ps.len()
            )));
        }
        let a = |j: usize| Complex64::new(alphas[j - 1], 0.0);
        let p = |j: usize| ps[j - 2];
        let mut acc = self.constant([a(1), a(2), self.spec(p(2), -1.0)])?
            * self.constant([a(k), a(k - 1), self.spec(p(k - 2), 1.0)])?;
        for j in 2..=k - 3 {
            acc *= self.constant([self.spec(p(j), 1.0), a(j + 1), self.spec(p(j + 1), -1.0)])?;
        }
        Ok(acc)
    }

    /// Vertex weights: an edge's `from` slot carries Q − ip, its `to` slot Q + ip, marked slots α.
    pub fn vertex_alphas(&self, graph: &AdmissibleGraph, v: usize, ps: &[f64]) -> [Complex64; 3] {
        graph.vertices[v].slots.map(|s| match s {
            SlotUse::Link { edge, end } => self.spec(ps[edge], if end == 0 { -1.0 } else { 1.0 }),
            SlotUse::Marked { alpha } => Complex64::new(alpha, 0.0),
        })
    }

    /// ∏_v constants[v] · C(weights of v).
    pub fn rho_graph(
        &self,
        graph: &AdmissibleGraph,
        ps: &[f64],
        constants: &[f64],
    ) -> Result<Complex64> {
        if ps.len() != graph.edges.len() || constants.len() != graph.vertices.len() {
            return Err(LcftError::DimensionMismatch(format!(
                "{} momenta / {} constants for {} edges / {} vertices",
                ps.len(),
                constants.len(),
                graph.edges.len(),
                graph.vertices.len()
            )));
        }
        let mut acc = Complex64::new(1.0, 0.0);
        for (v, k) in constants.iter().enumerate() {
            acc *= self.constant(self.vertex_alphas(graph, v, ps))? * *k;
        }
        Ok(acc)
    }
}

/// One-shot C^DOZZ_{γ,μ}(α₁, α₂, α₃).
pub fn dozz_constant(alphas: [Complex64; 3], params: &CftParams) -> Result<Complex64> {
    Dozz::new(*params)?.constant(alphas)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pole_is_reported() {
        let d = Dozz::new(CftParams::new(1.0, 1.0).unwrap()).unwrap();
        // ᾱ/2 − α₃ = 0 exactly.
        let a = [
            Complex64::new(0.4, 0.0),
            Complex64::new(0.6, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        assert!(matches!(d.constant(a), Err(LcftError::NearPole { .. })));
    }
}
