//! Correlation functions as spectral integrals of DOZZ constants times squared blocks.

use std::fmt::Write as _;
use std::ops::Mul;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{
    chain_block, graph_block, torus_one_point_block, vertex_layout, BlockOptions, BlockSeries,
    ChainKind, VertexKind,
};
use crate::dozz::Dozz;
use crate::error::{LcftError, Result, Violation};
use crate::graph::{validate_graph, AdmissibleGraph};
use crate::params::CftParams;
use crate::quadrature::{pairwise_sum, Quadrature};
use crate::special_fn::ZETA_PRIME_MINUS_ONE;

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// Z_D = e^{1/4} 2^{1/12} π^{1/4} e^{5/24 + ζ′(−1)}.
pub fn disk_partition_constant() -> f64 {
    (0.25 + 2f64.ln() / 12.0 + std::f64::consts::PI.ln() / 4.0 + 5.0 / 24.0 + ZETA_PRIME_MINUS_ONE)
        .exp()
}

/// 2^{two_halves/2} π^{pi} e^{e} Z_D^{z_disk}, kept symbolic so prefactor identities compare exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExactConstant {
    pub two_halves: i32,
    pub pi: i32,
    pub e: i32,
    pub z_disk: i32,
}

impl ExactConstant {
    pub const ONE: Self = Self {
        two_halves: 0,
        pi: 0,
        e: 0,
        z_disk: 0,
    };

    pub fn value(self) -> f64 {
        (self.two_halves as f64 / 2.0 * 2f64.ln()
            + self.pi as f64 * std::f64::consts::PI.ln()
            + self.e as f64
            + self.z_disk as f64 * disk_partition_constant().ln())
        .exp()
    }

    pub fn powi(self, k: i32) -> Self {
        Self {
            two_halves: k * self.two_halves,
            pi: k * self.pi,
            e: k * self.e,
            z_disk: k * self.z_disk,
        }
    }

    /// 2^{L/2} / (2π)^{2L−1}.
    pub fn graph(links: usize) -> Self {
        let l = links as i32;
        Self {
            two_halves: l - 2 * (2 * l - 1),
            pi: -(2 * l - 1),
            e: 0,
            z_disk: 0,
        }
    }

    /// 1 / (2^{2k−1} π^{k−1} e^k).
    pub fn torus(k: usize) -> Self {
        let k = k as i32;
        Self {
            two_halves: -2 * (2 * k - 1),
            pi: -(k - 1),
            e: -k,
            z_disk: 0,
        }
    }

    /// 2^{−3/2} Z_D² / ((2π)^{k−3} (2e)^{k−4}).
    pub fn sphere(k: usize) -> Self {
        let k = k as i32;
        Self {
            two_halves: -3 - 2 * (k - 3) - 2 * (k - 4),
            pi: -(k - 3),
            e: -(k - 4),
            z_disk: 2,
        }
    }

    /// Flat-metric vertex constants: π/(√2 e) for an annulus, Z_D/2 for a disk, 1 for a pant.
    pub fn flat_vertex(kind: VertexKind) -> Self {
        match kind {
            VertexKind::Annulus => Self {
                two_halves: -1,
                pi: 1,
                e: -1,
                z_disk: 0,
            },
            VertexKind::Disk => Self {
                two_halves: -2,
                pi: 0,
                e: 0,
                z_disk: 1,
            },
            VertexKind::Pant => Self::ONE,
        }
    }
}

impl Mul for ExactConstant {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            two_halves: self.two_halves + o.two_halves,
            pi: self.pi + o.pi,
            e: self.e + o.e,
            z_disk: self.z_disk + o.z_disk,
        }
    }
}

/// Per-vertex metric constants C(P_j, g, ·), one value per building-block kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConstants {
    pub disk: f64,
    pub annulus: f64,
    pub pant: f64,
}

impl Default for MetricConstants {
    fn default() -> Self {
        Self {
            disk: 1.0,
            annulus: 1.0,
            pant: 1.0,
        }
    }
}

impl MetricConstants {
    /// Constants that turn the graph formula into the flat torus and sphere theorems.
    pub fn flat_canonical() -> Self {
        Self {
            disk: ExactConstant::flat_vertex(VertexKind::Disk).value(),
            annulus: ExactConstant::flat_vertex(VertexKind::Annulus).value(),
            pant: ExactConstant::flat_vertex(VertexKind::Pant).value(),
        }
    }

    pub fn for_kind(&self, kind: Option<VertexKind>) -> f64 {
        match kind {
            Some(VertexKind::Disk) => self.disk,
            Some(VertexKind::Annulus) => self.annulus,
            Some(VertexKind::Pant) => self.pant,
            None => 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub quadrature: Quadrature,
    pub block: BlockOptions,
    pub node_budget: usize,
    /// Keep per-node (p, ρ, |F|², integrand) rows.
    pub keep_density: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            quadrature: Quadrature::default(),
            block: BlockOptions::default(),
            node_budget: DEFAULT_NODE_BUDGET,
            keep_density: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityRow {
    pub p: Vec<f64>,
    pub rho: f64,
    pub block_sq: f64,
    pub integrand: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelatorResult {
    pub value: f64,
    /// |Σ w Im ρ |F|²| / |value|.
    pub imag_rel: f64,
    pub prefactor: f64,
    /// Share of the integral carried by nodes in the last panel of any coordinate.
    pub tail: f64,
    /// Relative change of the integral from the level-N block terms.
    pub last_level: f64,
    pub mu_exponent: f64,
    pub nodes: usize,
    pub truncation: u32,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub density: Vec<DensityRow>,
}

impl CorrelatorResult {
    pub fn density_csv(&self) -> String {
        let d = self.density.first().map_or(1, |r| r.p.len());
        let mut s = String::new();
        let heads: Vec<String> = if d == 1 {
            vec!["p".into()]
        } else {
            (1..=d).map(|i| format!("p{i}")).collect()
        };
        let _ = writeln!(s, "{},rho,block_sq,integrand", heads.join(","));
        for r in &self.density {
            let ps: Vec<String> = r.p.iter().map(|p| format!("{p:.12}")).collect();
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e}",
                ps.join(","),
                r.rho,
                r.block_sq,
                r.integrand
            );
        }
        s
    }
}

struct NodeValue {
    rho: Complex64,
    block_sq: f64,
    block_sq_prev: f64,
}

/// |F|² at truncation N and N − 1.
fn block_squares(b: &BlockSeries, q: &[Complex64]) -> Result<(f64, f64)> {
    let pre = b.prefactor(q)?;
    let sums = b.partial_sums(q)?;
    let last = sums[sums.len() - 1];
    let prev = if sums.len() > 1 {
        sums[sums.len() - 2]
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(((pre * last).norm_sqr(), (pre * prev).norm_sqr()))
}

/// Tensor-product quadrature of ρ |F|² over `dims` momenta.
fn spectral_integral<F>(
    dims: usize,
    cfg: &BootstrapConfig,
    prefactor: f64,
    mu_exponent: f64,
    eval: F,
) -> Result<CorrelatorResult>
where
    F: Fn(&[f64]) -> Result<NodeValue> + Sync,
{
    let quad = &cfg.quadrature;
    let n = quad.len();
    let total = (n as f64).powi(dims as i32);
    if total > cfg.node_budget as f64 {
        return Err(LcftError::CostGuard {
            nodes: total.min(usize::MAX as f64) as usize,
            budget: cfg.node_budget,
        });
    }
    let total = n.pow(dims as u32);
    let last = quad.last_panel();
    let evals: Vec<(Vec<usize>, NodeValue)> = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut idx = vec![0; dims];
            for a in (0..dims).rev() {
                idx[a] = flat % n;
                flat /= n;
            }
            let ps: Vec<f64> = idx.iter().map(|&i| quad.nodes[i]).collect();
            eval(&ps).map(|v| (idx, v))
        })
        .collect::<Result<_>>()?;
    let zero = Complex64::new(0.0, 0.0);
    let mut terms = Vec::with_capacity(total);
    let mut prev_terms = Vec::with_capacity(total);
    let mut tail_terms = Vec::new();
    let mut density = Vec::new();
    for (idx, v) in &evals {
        let w: f64 = idx.iter().map(|&i| quad.weights[i]).product();
        let t = v.rho * v.block_sq * w;
        terms.push(t);
        prev_terms.push(v.rho * v.block_sq_prev * w);
        if idx.iter().any(|i| last.contains(i)) {
            tail_terms.push(t);
        }
        if cfg.keep_density {
            density.push(DensityRow {
                p: idx.iter().map(|&i| quad.nodes[i]).collect(),
                rho: v.rho.re,
                block_sq: v.block_sq,
                integrand: (v.rho * v.block_sq).re,
            });
        }
    }
    let sum = pairwise_sum(&terms, zero);
    let prev = pairwise_sum(&prev_terms, zero);
    let tail = pairwise_sum(&tail_terms, zero);
    let scale = sum.re.abs();
    let ratio = |x: f64| if scale > 0.0 { x / scale } else { x.abs() };
    Ok(CorrelatorResult {
        value: prefactor * sum.re,
        imag_rel: ratio(sum.im.abs()),
        prefactor,
        tail: ratio(tail.re.abs()),
        last_level: ratio((sum.re - prev.re).abs()),
        mu_exponent,
        nodes: total,
        truncation: cfg.block.truncation,
        density,
    })
}

fn check_upper_half(tau: Complex64) -> Result<Complex64> {
    if !(tau.im > 0.0) {
        return Err(LcftError::Domain(format!(
            "Im τ = {} must be positive",
            tau.im
        )));
    }
    Ok((Complex64::new(0.0, 2.0 * std::f64::consts::PI) * tau).exp())
}

fn check_weights(alphas: &[f64], params: &CftParams) -> Result<()> {
    let q = params.q();
    let bad: Vec<Violation> = alphas
        .iter()
        .enumerate()
        .filter(|(_, &a)| !(a > 0.0 && a < q))
        .map(|(i, &a)| Violation {
            vertex: Some(i),
            rule: "alpha in (0, Q)".into(),
            margin: a.min(q - a),
        })
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(LcftError::Validation(bad))
    }
}

/// ⟨V_{α₁}(0)⟩ on ℂ/(2πℤ + 2πτℤ).
pub fn torus_one_point(
    alpha1: f64,
    tau: Complex64,
    params: &CftParams,
    cfg: &BootstrapConfig,
) -> Result<CorrelatorResult> {
    let q = check_upper_half(tau)?;
    check_weights(&[alpha1], params)?;
    validate_graph(&AdmissibleGraph::torus_one_point(alpha1, q), params)?;
    let dozz = Dozz::new(*params)?;
    let pre = ExactConstant::torus(1).value();
    spectral_integral(1, cfg, pre, -alpha1 / params.gamma, |ps| {
        let b = torus_one_point_block(alpha1, ps[0], params, &cfg.block)?;
        let (block_sq, block_sq_prev) = block_squares(&b, &[q])?;
        Ok(NodeValue {
            rho: dozz.rho_torus_one_point(alpha1, ps[0])?,
            block_sq,
            block_sq_prev,
        })
    })
}

/// Moduli q_j = z_{j+1}/z_j (j < k) and q_k = q/z_k with z_j = e^{ix_j}.
pub fn torus_chain_moduli(x: &[Complex64], tau: Complex64) -> Result<Vec<Complex64>> {
    let q = check_upper_half(tau)?;
    let k = x.len();
    if k == 0 || x[0] != Complex64::new(0.0, 0.0) {
        return Err(LcftError::Domain("positions must start with x₁ = 0".into()));
    }
    let top = 2.0 * std::f64::consts::PI * tau.im;
    for j in 1..k {
        if !(x[j].im > x[j - 1].im && x[j].im < top) {
            return Err(LcftError::Domain(format!(
                "need Im x_{} < Im x_{} < 2π Im τ",
                j,
                j + 1
            )));
        }
    }
    let z: Vec<Complex64> = x.iter().map(|xj| (Complex64::i() * xj).exp()).collect();
    let mut out: Vec<Complex64> = (0..k - 1).map(|j| z[j + 1] / z[j]).collect();
    out.push(q / z[k - 1]);
    Ok(out)
}

/// ⟨∏ V_{α_j}(x_j)⟩ on the flat torus.
pub fn torus_k_point(
    alphas: &[f64],
    x: &[Complex64],
    tau: Complex64,
    params: &CftParams,
    cfg: &BootstrapConfig,
) -> Result<CorrelatorResult> {
    if alphas.len() != x.len() {
        return Err(LcftError::DimensionMismatch(format!(
            "{} weights for {} positions",
            alphas.len(),
            x.len()
        )));
    }
    check_weights(alphas, params)?;
    let q = torus_chain_moduli(x, tau)?;
    let k = alphas.len();
    let dozz = Dozz::new(*params)?;
    let pre = ExactConstant::torus(k).value();
    let mu = -alphas.iter().sum::<f64>() / params.gamma;
    spectral_integral(k, cfg, pre, mu, |ps| {
        let b = chain_block(&ChainKind::Torus, alphas, ps, params, &cfg.block)?;
        let (block_sq, block_sq_prev) = block_squares(&b, &q)?;
        Ok(NodeValue {
            rho: dozz.rho_torus_chain(alphas, ps)?,
            block_sq,
            block_sq_prev,
        })
    })
}

/// q_j = z_j / z_{j+1} for j = 2..=k−2; z₁ = 0 and z_k = ∞ are implied.
pub fn sphere_chain_moduli(z: &[Complex64]) -> Result<Vec<Complex64>> {
    let k = z.len();
    if k < 4 {
        return Err(LcftError::DimensionMismatch(format!(
            "sphere chain needs k ≥ 4 points, got {k}"
        )));
    }
    for j in 1..k - 2 {
        if !(z[j].norm() > 0.0 && z[j].norm() < z[j + 1].norm()) {
            return Err(LcftError::Domain(format!(
                "need 0 < |z_{}| < |z_{}|",
                j + 1,
                j + 2
            )));
        }
    }
    if !(z[1].norm() < 1.0 && z[k - 2].norm() > 1.0) {
        return Err(LcftError::Domain("need |z₂| < 1 < |z_{k−1}|".into()));
    }
    Ok((1..k - 2).map(|j| z[j] / z[j + 1]).collect())
}

/// ⟨∏ V_{α_j}(z_j)⟩ on the sphere with the DOZZ metric.
pub fn sphere_k_point(
    alphas: &[f64],
    z: &[Complex64],
    params: &CftParams,
    cfg: &BootstrapConfig,
) -> Result<CorrelatorResult> {
    if alphas.len() != z.len() {
        return Err(LcftError::DimensionMismatch(format!(
            "{} weights for {} points",
            alphas.len(),
            z.len()
        )));
    }
    check_weights(alphas, params)?;
    let total: f64 = alphas.iter().sum();
    let q_param = params.q();
    if total <= 2.0 * q_param {
        return Err(LcftError::Validation(vec![Violation {
            vertex: None,
            rule: "sum of alphas above 2Q".into(),
            margin: total - 2.0 * q_param,
        }]));
    }
    let q = sphere_chain_moduli(z)?;
    let k = alphas.len();
    let dozz = Dozz::new(*params)?;
    let pre = ExactConstant::sphere(k).value();
    let kind = ChainKind::Sphere { z: z.to_vec() };
    spectral_integral(
        k - 3,
        cfg,
        pre,
        (2.0 * q_param - total) / params.gamma,
        |ps| {
            let b = chain_block(&kind, alphas, ps, params, &cfg.block)?;
            let (block_sq, block_sq_prev) = block_squares(&b, &q)?;
            Ok(NodeValue {
                rho: dozz.rho_sphere_chain(alphas, ps)?,
                block_sq,
                block_sq_prev,
            })
        },
    )
}

/// Correlator of the surface glued along an admissible graph, with moduli on its edges.
pub fn graph_correlator(
    graph: &AdmissibleGraph,
    metric: &MetricConstants,
    params: &CftParams,
    cfg: &BootstrapConfig,
) -> Result<CorrelatorResult> {
    validate_graph(graph, params)?;
    let links = graph.edges.len();
    let q = graph.moduli();
    let constants: Vec<f64> = (0..graph.vertices.len())
        .map(|v| metric.for_kind(vertex_layout(graph, v).kind))
        .collect();
    let dozz = Dozz::new(*params)?;
    let pre = ExactConstant::graph(links).value();
    let genus = graph.genus() as f64;
    let mu = (2.0 * params.q() * (1.0 - genus) - graph.alphas().iter().sum::<f64>()) / params.gamma;
    spectral_integral(links, cfg, pre, mu, |ps| {
        let b = graph_block(graph, ps, params, &cfg.block)?;
        let (block_sq, block_sq_prev) = block_squares(&b, &q)?;
        Ok(NodeValue {
            rho: dozz.rho_graph(graph, ps, &constants)?,
            block_sq,
            block_sq_prev,
        })
    })
}
