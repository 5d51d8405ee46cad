//! Truncated block series for tori, sphere chains and general graphs.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::network::{contract_network, Tensor};
use super::tensors::{
    annulus_tensor, block_coeff_tensor, disk_tensor, BlockCoeffTensor, LevelBasis, VertexKind,
};
use crate::error::{LcftError, Result};
use crate::graph::{AdmissibleGraph, SlotUse};
use crate::params::CftParams;
use crate::quadrature::pairwise_sum;
use crate::virasoro::{
    shapovalov_inverse, shapovalov_with, GramInverse, VermaModule, DEFAULT_COND_GUARD,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockOptions {
    /// Box truncation: every level index runs over 0..=N.
    pub truncation: u32,
    pub cond_guard: f64,
}

impl Default for BlockOptions {
    fn default() -> Self {
        Self {
            truncation: 6,
            cond_guard: DEFAULT_COND_GUARD,
        }
    }
}

/// F⁻¹ at one weight for every level up to N.
#[derive(Debug, Clone)]
pub struct GramInverses {
    pub delta: Complex64,
    pub levels: Vec<GramInverse>,
}

impl GramInverses {
    pub fn new(delta: Complex64, c: f64, n_max: u32, cond_guard: f64) -> Result<Self> {
        let mut module = VermaModule::new(delta, Complex64::new(c, 0.0));
        let levels = (0..=n_max)
            .map(|n| shapovalov_inverse(&shapovalov_with(&mut module, n), cond_guard))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { delta, levels })
    }

    pub fn level(&self, n: u32) -> &DMatrix<Complex64> {
        &self.levels[n as usize].entries
    }

    /// Block-diagonal ⊕_n qⁿ F⁻¹_n over the full level basis.
    pub fn dressed(&self, q: Complex64) -> DMatrix<Complex64> {
        let n_max = self.levels.len() as u32 - 1;
        let basis = LevelBasis::new(n_max);
        let mut m = DMatrix::zeros(basis.dim(), basis.dim());
        let mut qn = Complex64::new(1.0, 0.0);
        for n in 0..=n_max {
            let r = basis.range(n);
            let f = self.level(n);
            for (i, ii) in r.clone().enumerate() {
                for (j, jj) in r.clone().enumerate() {
                    m[(ii, jj)] = qn * f[(i, j)];
                }
            }
            qn *= q;
        }
        m
    }

    pub fn max_residual(&self) -> f64 {
        self.levels.iter().map(|g| g.residual).fold(0.0, f64::max)
    }

    pub fn max_condition(&self) -> f64 {
        self.levels.iter().map(|g| g.condition).fold(0.0, f64::max)
    }
}

/// prefactor(|q|) × Σ_n W_n ∏ q_i^{n_i}, with the q-independent part held in `constant`.
#[derive(Debug, Clone, Serialize)]
pub struct BlockSeries {
    /// Exponent of |q_i| in the prefactor, per modulus.
    pub abs_exponents: Vec<f64>,
    pub constant: f64,
    pub truncation: u32,
    #[serde(skip)]
    pub coefficients: BTreeMap<Vec<u32>, Complex64>,
}

fn check_moduli(q: &[Complex64], expected: usize) -> Result<()> {
    if q.len() != expected {
        return Err(LcftError::DimensionMismatch(format!(
            "{} moduli given, {} expected",
            q.len(),
            expected
        )));
    }
    for (i, z) in q.iter().enumerate() {
        let r = z.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(LcftError::Domain(format!(
                "modulus q[{i}] = {z} must satisfy 0 < |q| < 1"
            )));
        }
    }
    Ok(())
}

fn monomial(q: &[Complex64], n: &[u32]) -> Complex64 {
    q.iter().zip(n).map(|(z, &k)| z.powu(k)).product()
}

impl BlockSeries {
    pub fn moduli_count(&self) -> usize {
        self.abs_exponents.len()
    }

    pub fn coefficient(&self, n: &[u32]) -> Complex64 {
        self.coefficients.get(n).copied().unwrap_or_default()
    }

    /// ∏ |q_i|^{e_i} times the constant.
    pub fn prefactor(&self, q: &[Complex64]) -> Result<f64> {
        check_moduli(q, self.moduli_count())?;
        Ok(self.constant
            * q.iter()
                .zip(&self.abs_exponents)
                .map(|(z, e)| z.norm().powf(*e))
                .product::<f64>())
    }

    /// The holomorphic part Σ W_n qⁿ.
    pub fn series(&self, q: &[Complex64]) -> Result<Complex64> {
        check_moduli(q, self.moduli_count())?;
        let terms: Vec<Complex64> = self
            .coefficients
            .iter()
            .map(|(n, w)| w * monomial(q, n))
            .collect();
        Ok(pairwise_sum(&terms, Complex64::new(0.0, 0.0)))
    }

    pub fn value(&self, q: &[Complex64]) -> Result<Complex64> {
        Ok(self.series(q)? * self.prefactor(q)?)
    }

    /// Contribution of the shell max_i n_i = K, for K = 0..=N.
    pub fn shell_contributions(&self, q: &[Complex64]) -> Result<Vec<Complex64>> {
        check_moduli(q, self.moduli_count())?;
        let mut shells = vec![Vec::new(); self.truncation as usize + 1];
        for (n, w) in &self.coefficients {
            let k = n.iter().copied().max().unwrap_or(0) as usize;
            shells[k].push(w * monomial(q, n));
        }
        Ok(shells
            .iter()
            .map(|s| pairwise_sum(s, Complex64::new(0.0, 0.0)))
            .collect())
    }

    /// Partial sums S_K of the holomorphic part over the shells K' ≤ K.
    pub fn partial_sums(&self, q: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut acc = Complex64::new(0.0, 0.0);
        Ok(self
            .shell_contributions(q)?
            .into_iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect())
    }

    /// `n1;n2;...,re,im` lines under a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("multi_degree,re,im\n");
        for (n, w) in &self.coefficients {
            let key: Vec<String> = n.iter().map(|k| k.to_string()).collect();
            let _ = writeln!(s, "{},{:e},{:e}", key.join(";"), w.re, w.im);
        }
        s
    }
}

fn box_degrees(dims: usize, n_max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..dims {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=n_max).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

fn torus_exponent(params: &CftParams, p: f64) -> f64 {
    -params.central_charge() / 24.0 + params.spectral_weight(p)
}

fn spectral(params: &CftParams, p: f64) -> Complex64 {
    Complex64::new(params.spectral_weight(p), 0.0)
}

fn weight(params: &CftParams, alpha: f64) -> Complex64 {
    params.weight(Complex64::new(alpha, 0.0))
}

/// |q|^{−c_L/24+Δ_{Q+ip}} Σ_{n≤N} qⁿ Tr(F⁻¹_{Q+ip,n} w^A_{n,n}(α₁, p, p)).
pub fn torus_one_point_block(
    alpha1: f64,
    p: f64,
    params: &CftParams,
    opts: &BlockOptions,
) -> Result<BlockSeries> {
    let c = params.central_charge();
    let n_max = opts.truncation;
    let dh = spectral(params, p);
    let inv = GramInverses::new(dh, c, n_max, opts.cond_guard)?;
    let a = annulus_tensor(dh, weight(params, alpha1), dh, c, n_max);
    let mut coefficients = BTreeMap::new();
    for n in 0..=n_max {
        let w = a.matrix_block(n, n);
        coefficients.insert(vec![n], (inv.level(n) * w).trace());
    }
    Ok(BlockSeries {
        abs_exponents: vec![torus_exponent(params, p)],
        constant: 1.0,
        truncation: n_max,
        coefficients,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainKind {
    /// k marked points on a torus cut into k annuli; k moduli.
    Torus,
    /// k ≥ 4 points z₁ = 0, …, z_k = ∞ on the sphere; k − 3 moduli. The
    /// entries z[0] and z[k−1] are ignored.
    Sphere { z: Vec<Complex64> },
}

/// Chain blocks of the torus and sphere k-point functions.
pub fn chain_block(
    kind: &ChainKind,
    alphas: &[f64],
    ps: &[f64],
    params: &CftParams,
    opts: &BlockOptions,
) -> Result<BlockSeries> {
    let c = params.central_charge();
    let n_max = opts.truncation;
    let k = alphas.len();
    let mismatch = |m: String| LcftError::DimensionMismatch(m);
    let inverses = ps
        .iter()
        .map(|&p| GramInverses::new(spectral(params, p), c, n_max, opts.cond_guard))
        .collect::<Result<Vec<_>>>()?;
    match kind {
        ChainKind::Torus => {
            if k == 0 || ps.len() != k {
                return Err(mismatch(format!(
                    "torus chain: {} weights, {} momenta",
                    k,
                    ps.len()
                )));
            }
            // a[j] = w^A(p_j, α_j, p_{j−1}) with p_0 = p_k.
            let a: Vec<BlockCoeffTensor> = (0..k)
                .map(|j| {
                    let prev = if j == 0 { k - 1 } else { j - 1 };
                    annulus_tensor(
                        spectral(params, ps[j]),
                        weight(params, alphas[j]),
                        spectral(params, ps[prev]),
                        c,
                        n_max,
                    )
                })
                .collect();
            let mut coefficients = BTreeMap::new();
            for n in box_degrees(k, n_max) {
                // F⁻¹_{p_k} w(p_k, α_k, p_{k−1}) F⁻¹_{p_{k−1}} ··· F⁻¹_{p_1} w(p_1, α_1, p_k).
                let mut m = inverses[k - 1].level(n[k - 1]).clone();
                for j in (0..k).rev() {
                    let prev = if j == 0 { k - 1 } else { j - 1 };
                    m = m * a[j].matrix_block(n[j], n[prev]);
                    if j > 0 {
                        m = m * inverses[prev].level(n[prev]);
                    }
                }
                coefficients.insert(n, m.trace());
            }
            Ok(BlockSeries {
                abs_exponents: ps.iter().map(|&p| torus_exponent(params, p)).collect(),
                constant: 1.0,
                truncation: n_max,
                coefficients,
            })
        }
        ChainKind::Sphere { z } => {
            if k < 4 || ps.len() != k - 3 || z.len() != k {
                return Err(mismatch(format!(
                    "sphere chain: {} weights, {} momenta, {} points",
                    k,
                    ps.len(),
                    z.len()
                )));
            }
            let dw = |j: usize| weight(params, alphas[j]).re;
            let mut constant = 1.0;
            for j in 1..k - 1 {
                let r = z[j].norm();
                constant *= if r < 1.0 {
                    r.powf(-dw(j))
                } else {
                    r.powf(dw(j))
                };
            }
            constant *= z[1].norm().powf(-dw(0)) * z[k - 2].norm().powf(dw(k - 1));
            let m = k - 3;
            // Disk vectors w^D(p₂, α₂, α₁) and w^D(p_{k−2}, α_{k−1}, α_k).
            let left = disk_tensor(
                spectral(params, ps[0]),
                weight(params, alphas[1]),
                weight(params, alphas[0]),
                n_max,
            );
            let right = disk_tensor(
                spectral(params, ps[m - 1]),
                weight(params, alphas[k - 2]),
                weight(params, alphas[k - 1]),
                n_max,
            );
            // Annuli w^A(p_j, α_{j+1}, p_{j+1}) between consecutive channels.
            let a: Vec<BlockCoeffTensor> = (0..m.saturating_sub(1))
                .map(|j| {
                    annulus_tensor(
                        spectral(params, ps[j]),
                        weight(params, alphas[j + 2]),
                        spectral(params, ps[j + 1]),
                        c,
                        n_max,
                    )
                })
                .collect();
            let mut coefficients = BTreeMap::new();
            for n in box_degrees(m, n_max) {
                let mut v: DVector<Complex64> = right.vector_block(n[m - 1]);
                for j in (0..m).rev() {
                    v = inverses[j].level(n[j]) * v;
                    if j > 0 {
                        v = a[j - 1].matrix_block(n[j - 1], n[j]) * v;
                    }
                }
                coefficients.insert(n.clone(), left.vector_block(n[0]).dot(&v));
            }
            Ok(BlockSeries {
                abs_exponents: ps.iter().map(|&p| params.spectral_weight(p)).collect(),
                constant,
                truncation: n_max,
                coefficients,
            })
        }
    }
}

/// How a vertex's slots map onto its coefficient tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexLayout {
    pub kind: Option<VertexKind>,
    /// Slots supplying the three tensor weights, in tensor order.
    pub weight_slots: [usize; 3],
    /// Slots carrying descendant legs, in tensor order.
    pub leg_slots: Vec<usize>,
}

/// Pant: slot order. Annulus: lower boundary slot is "out". Disk: the lower
/// marked slot is the vertex insertion, the higher one the center.
pub fn vertex_layout(graph: &AdmissibleGraph, v: usize) -> VertexLayout {
    let slots = &graph.vertices[v].slots;
    let links: Vec<usize> = (0..3)
        .filter(|&s| matches!(slots[s], SlotUse::Link { .. }))
        .collect();
    let marks: Vec<usize> = (0..3)
        .filter(|&s| matches!(slots[s], SlotUse::Marked { .. }))
        .collect();
    match links.len() {
        3 => VertexLayout {
            kind: Some(VertexKind::Pant),
            weight_slots: [0, 1, 2],
            leg_slots: links,
        },
        2 => VertexLayout {
            kind: Some(VertexKind::Annulus),
            weight_slots: [links[0], marks[0], links[1]],
            leg_slots: links,
        },
        1 => VertexLayout {
            kind: Some(VertexKind::Disk),
            weight_slots: [links[0], marks[0], marks[1]],
            leg_slots: links,
        },
        _ => VertexLayout {
            kind: None,
            weight_slots: [0, 1, 2],
            leg_slots: vec![],
        },
    }
}

fn slot_weight(
    graph: &AdmissibleGraph,
    v: usize,
    s: usize,
    ps: &[f64],
    params: &CftParams,
) -> Complex64 {
    match graph.vertices[v].slots[s] {
        SlotUse::Link { edge, .. } => spectral(params, ps[edge]),
        SlotUse::Marked { alpha } => weight(params, alpha),
    }
}

pub fn vertex_deltas(
    graph: &AdmissibleGraph,
    v: usize,
    ps: &[f64],
    params: &CftParams,
) -> [Complex64; 3] {
    let l = vertex_layout(graph, v);
    l.weight_slots.map(|s| slot_weight(graph, v, s, ps, params))
}

fn leg_id(graph: &AdmissibleGraph, v: usize, s: usize) -> usize {
    match graph.vertices[v].slots[s] {
        SlotUse::Link { edge, end } => 2 * edge + end,
        SlotUse::Marked { .. } => unreachable!("marked slots carry no leg"),
    }
}

type CacheKey = (VertexKind, [u64; 6], u32, u64);

/// Shared memo of coefficient tensors keyed by kind, weights, truncation and c.
#[derive(Debug, Default)]
pub struct TensorCache {
    map: RwLock<HashMap<CacheKey, Arc<BlockCoeffTensor>>>,
}

impl TensorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(
        &self,
        kind: VertexKind,
        deltas: [Complex64; 3],
        c: f64,
        n_max: u32,
    ) -> Arc<BlockCoeffTensor> {
        let bits = [
            deltas[0].re.to_bits(),
            deltas[0].im.to_bits(),
            deltas[1].re.to_bits(),
            deltas[1].im.to_bits(),
            deltas[2].re.to_bits(),
            deltas[2].im.to_bits(),
        ];
        let key = (kind, bits, n_max, c.to_bits());
        if let Some(t) = self.map.read().expect("cache lock").get(&key) {
            return t.clone();
        }
        let t = Arc::new(block_coeff_tensor(kind, deltas, c, n_max));
        self.map
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert(t)
            .clone()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Vertex coefficient tensors for a graph at the given momenta.
pub fn graph_tensors(
    graph: &AdmissibleGraph,
    ps: &[f64],
    params: &CftParams,
    n_max: u32,
    cache: &TensorCache,
) -> Vec<Option<Arc<BlockCoeffTensor>>> {
    let c = params.central_charge();
    (0..graph.vertices.len())
        .map(|v| {
            vertex_layout(graph, v)
                .kind
                .map(|k| cache.get(k, vertex_deltas(graph, v, ps, params), c, n_max))
        })
        .collect()
}

fn restricted(t: &BlockCoeffTensor, levels: &[u32]) -> (Vec<usize>, Vec<Complex64>) {
    let d = t.basis.dim();
    let ranges: Vec<_> = levels.iter().map(|&n| t.basis.range(n)).collect();
    let dims: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
    let total: usize = dims.iter().product();
    let mut data = Vec::with_capacity(total);
    for mut flat in 0..total {
        let mut idx = vec![0; ranges.len()];
        for a in (0..ranges.len()).rev() {
            idx[a] = ranges[a].start + flat % dims[a];
            flat /= dims[a];
        }
        let off = idx.iter().fold(0, |acc, &i| acc * d + i);
        data.push(t.data[off]);
    }
    (dims, data)
}

fn vertex_network_tensor(
    graph: &AdmissibleGraph,
    v: usize,
    t: &BlockCoeffTensor,
    levels: Option<&[u32]>,
) -> Result<Tensor> {
    let layout = vertex_layout(graph, v);
    let legs: Vec<usize> = layout
        .leg_slots
        .iter()
        .map(|&s| leg_id(graph, v, s))
        .collect();
    match levels {
        Some(lv) => {
            let per_leg: Vec<u32> = legs.iter().map(|&l| lv[l / 2]).collect();
            let (dims, data) = restricted(t, &per_leg);
            Tensor::new(legs, dims, data)
        }
        None => {
            let d = t.basis.dim();
            Tensor::new(legs.clone(), vec![d; legs.len()], t.data.clone())
        }
    }
}

fn matrix_tensor(legs: [usize; 2], m: &DMatrix<Complex64>) -> Result<Tensor> {
    let data = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)])
        .collect();
    Tensor::new(legs.to_vec(), vec![m.nrows(), m.ncols()], data)
}

/// Σ_n W_n qⁿ evaluated directly by contracting with the dressed ⊕ qⁿF⁻¹_n legs.
pub fn graph_series_value(
    graph: &AdmissibleGraph,
    tensors: &[Option<Arc<BlockCoeffTensor>>],
    inverses: &[&GramInverses],
    q: &[Complex64],
) -> Result<Complex64> {
    check_moduli(q, graph.edges.len())?;
    let mut net = Vec::new();
    for (v, t) in tensors.iter().enumerate() {
        if let Some(t) = t {
            net.push(vertex_network_tensor(graph, v, t, None)?);
        }
    }
    for (e, inv) in inverses.iter().enumerate() {
        net.push(matrix_tensor([2 * e, 2 * e + 1], &inv.dressed(q[e]))?);
    }
    contract_network(net)
}

fn graph_exponents(graph: &AdmissibleGraph, ps: &[f64], params: &CftParams) -> Vec<f64> {
    (0..graph.edges.len())
        .map(|e| torus_exponent(params, ps[e]))
        .collect()
}

/// Block of an admissible graph: ∏|q_e|^{−c_L/24+Δ_e} × Σ_n W_n ∏ q_e^{n_e}.
pub fn graph_block(
    graph: &AdmissibleGraph,
    ps: &[f64],
    params: &CftParams,
    opts: &BlockOptions,
) -> Result<BlockSeries> {
    if ps.len() != graph.edges.len() {
        return Err(LcftError::DimensionMismatch(format!(
            "{} momenta for {} linking edges",
            ps.len(),
            graph.edges.len()
        )));
    }
    let c = params.central_charge();
    let n_max = opts.truncation;
    let cache = TensorCache::new();
    let tensors = graph_tensors(graph, ps, params, n_max, &cache);
    let inverses = ps
        .iter()
        .map(|&p| GramInverses::new(spectral(params, p), c, n_max, opts.cond_guard))
        .collect::<Result<Vec<_>>>()?;
    let mut coefficients = BTreeMap::new();
    for n in box_degrees(graph.edges.len(), n_max) {
        let mut net = Vec::new();
        for (v, t) in tensors.iter().enumerate() {
            if let Some(t) = t {
                net.push(vertex_network_tensor(graph, v, t, Some(&n))?);
            }
        }
        for (e, inv) in inverses.iter().enumerate() {
            net.push(matrix_tensor([2 * e, 2 * e + 1], inv.level(n[e]))?);
        }
        coefficients.insert(n, contract_network(net)?);
    }
    Ok(BlockSeries {
        abs_exponents: graph_exponents(graph, ps, params),
        constant: 1.0,
        truncation: n_max,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_enumeration() {
        assert_eq!(
            box_degrees(2, 1),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(box_degrees(0, 3), vec![Vec::<u32>::new()]);
    }

    #[test]
    fn torus_level_zero_and_one() {
        let params = CftParams::new(2f64.sqrt(), 1.0).unwrap();
        let s = torus_one_point_block(
            1.2,
            0.7,
            &params,
            &BlockOptions {
                truncation: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(s.coefficient(&[0]), Complex64::new(1.0, 0.0));
        let da = params.weight(Complex64::new(1.2, 0.0)).re;
        let dh = params.spectral_weight(0.7);
        let want = da * (da - 1.0) / (2.0 * dh) + 1.0;
        assert!((s.coefficient(&[1]).re - want).abs() < 1e-13);
    }
}
