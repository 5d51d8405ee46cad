//! Liouville conformal field theory correlators by the conformal bootstrap.
//!
//! Correlation functions are assembled from DOZZ structure constants and
//! squared conformal blocks integrated over the spectrum line `Q + ip`. A
//! Gaussian multiplicative chaos Monte Carlo estimator of the torus one-point
//! function, built directly from the path integral, serves as an independent
//! cross-check.

pub mod blocks;
pub mod bootstrap;
pub mod dozz;
pub mod error;
pub mod free_field;
pub mod gmc;
pub mod graph;
pub mod params;
pub mod quadrature;
pub mod special_fn;
pub mod virasoro;

pub use error::{LcftError, Result};
pub use num_complex::Complex64;
pub use params::{conformal_weight, kac_weight, CftParams};
