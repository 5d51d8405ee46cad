//! Γ-ratio l, Zamolodchikov's Υ_{γ/2}, Dedekind η, Jacobi ϑ₁ and E₁.

mod expint;
mod gamma;
mod modular;
mod upsilon;

pub use expint::exp_integral_e1;
pub use gamma::{gamma, l_ratio, ln_gamma, ln_l_ratio, sin_pi};
pub use modular::{dedekind_eta, theta1, theta1_product};
pub use upsilon::UpsilonEvaluator;

/// ζ′_R(−1), from an arbitrary-precision Riemann-zeta evaluation.
pub const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_93;
