//! Gauss–Legendre rules and deterministic pairwise summation.

use std::f64::consts::PI;
use std::ops::Add;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{LcftError, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Cached 16-point rule used by the special-function integrals.
pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Sums in a fixed binary-tree association, independent of thread count.
pub fn pairwise_sum<T: Copy + Add<Output = T>>(xs: &[T], zero: T) -> T {
    match xs.len() {
        0 => zero,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a, zero) + pairwise_sum(b, zero)
        }
    }
}

/// Composite Gauss–Legendre rule on (0, p_max] for the spectral integrals.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Quadrature {
    pub p_max: f64,
    pub panel_width: f64,
    pub nodes_per_panel: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(p_max: f64, panel_width: f64, nodes_per_panel: usize) -> Result<Self> {
        if !(p_max > 0.0 && panel_width > 0.0 && nodes_per_panel > 0) {
            return Err(LcftError::Domain(
                "quadrature needs positive p_max, panel width and node count".into(),
            ));
        }
        let panels = (p_max / panel_width).ceil() as usize;
        let h = p_max / panels as f64;
        let (x, w) = gauss_legendre(nodes_per_panel);
        let mut nodes = Vec::with_capacity(panels * nodes_per_panel);
        let mut weights = Vec::with_capacity(panels * nodes_per_panel);
        for k in 0..panels {
            let a = k as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(a + h * (xi + 1.0) / 2.0);
                weights.push(wi * h / 2.0);
            }
        }
        Ok(Self {
            p_max,
            panel_width,
            nodes_per_panel,
            nodes,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index range of the nodes in the last panel.
    pub fn last_panel(&self) -> std::ops::Range<usize> {
        self.len() - self.nodes_per_panel..self.len()
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::new(12.0, 0.5, 8).expect("default quadrature is valid")
    }
}
