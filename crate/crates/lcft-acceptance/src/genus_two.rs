//! Genus-two partition function written out term by term from the printed formula:
//! two pants glued along p₁, each closed on itself (p₂ on the first, p₃ on the second),
//! density C(Q−ip₁, Q−ip₂, Q+ip₂) C(Q+ip₁, Q+ip₃, Q−ip₃), prefactor 2^{3/2}/(2π)⁵.
//! No graph machinery or tensor network is involved.

use std::f64::consts::PI;

use lcft_core::blocks::pant_tensor;
use lcft_core::dozz::dozz_constant;
use lcft_core::quadrature::Quadrature;
use lcft_core::virasoro::{partitions, shapovalov};
use lcft_core::{CftParams, Complex64, Result};
use nalgebra::DMatrix;

struct LevelData {
    /// Tensor-basis index of each diagram, per level.
    index: Vec<Vec<usize>>,
    /// F⁻¹ per level, in `partitions(n)` order.
    inverse: Vec<DMatrix<f64>>,
}

fn level_data(
    delta: f64,
    c: f64,
    n_max: u32,
    tensor_index: impl Fn(&lcft_core::virasoro::YoungDiagram) -> usize,
) -> LevelData {
    let mut index = Vec::new();
    let mut inverse = Vec::new();
    for n in 0..=n_max {
        let basis = partitions(n);
        index.push(basis.iter().map(&tensor_index).collect());
        let f = shapovalov(Complex64::new(delta, 0.0), c, n);
        let real = f.entries.map(|z| z.re);
        inverse.push(
            real.try_inverse()
                .expect("Gram matrix on the spectrum line is invertible"),
        );
    }
    LevelData { index, inverse }
}

/// |F|² for one node, by the literal sum over (ν₁, ν₁′, ν₂, ν₂′, ν₃, ν₃′) with equal levels per edge.
fn block_value(p: [f64; 3], q: [Complex64; 3], params: &CftParams, n_max: u32) -> Complex64 {
    let c = params.central_charge();
    let d: Vec<f64> = p.iter().map(|&x| params.spectral_weight(x)).collect();
    let cd = |x: f64| Complex64::new(x, 0.0);
    let w1 = pant_tensor([cd(d[0]), cd(d[1]), cd(d[1])], c, n_max);
    let w2 = pant_tensor([cd(d[0]), cd(d[2]), cd(d[2])], c, n_max);
    let dim = w1.basis.dim();
    let at = |t: &lcft_core::blocks::BlockCoeffTensor, a: usize, b: usize, e: usize| {
        t.data[(a * dim + b) * dim + e]
    };
    let lv: Vec<LevelData> = d
        .iter()
        .map(|&dk| {
            level_data(dk, c, n_max, |y| {
                w1.basis.index_of(y).expect("diagram in basis")
            })
        })
        .collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for n1 in 0..=n_max as usize {
        for n2 in 0..=n_max as usize {
            for n3 in 0..=n_max as usize {
                let mono = q[0].powu(n1 as u32) * q[1].powu(n2 as u32) * q[2].powu(n3 as u32);
                let (i1, i2, i3) = (&lv[0].index[n1], &lv[1].index[n2], &lv[2].index[n3]);
                let (f1, f2, f3) = (&lv[0].inverse[n1], &lv[1].inverse[n2], &lv[2].inverse[n3]);
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..i1.len() {
                    for a2 in 0..i1.len() {
                        for b in 0..i2.len() {
                            for b2 in 0..i2.len() {
                                for e in 0..i3.len() {
                                    for e2 in 0..i3.len() {
                                        let inv = f1[(a, a2)] * f2[(b, b2)] * f3[(e, e2)];
                                        // w^{P2}_{ν₁′ν₃′ν₃} w^{P1}_{ν₁ν₂′ν₂}
                                        acc += inv
                                            * at(&w2, i1[a2], i3[e2], i3[e])
                                            * at(&w1, i1[a], i2[b2], i2[b]);
                                    }
                                }
                            }
                        }
                    }
                }
                sum += mono * acc;
            }
        }
    }
    let pre: f64 = (0..3).map(|k| q[k].norm().powf(-c / 24.0 + d[k])).product();
    sum * pre
}

/// The genus-two correlator over a tensor grid of `quad` nodes, with unit metric constants.
pub fn genus_two_transcription(
    q: [Complex64; 3],
    params: &CftParams,
    quad: &Quadrature,
    n_max: u32,
) -> Result<f64> {
    let qq = params.q();
    let spec = |p: f64, sign: f64| Complex64::new(qq, sign * p);
    let mut total = 0.0;
    for (i, &p1) in quad.nodes.iter().enumerate() {
        for (j, &p2) in quad.nodes.iter().enumerate() {
            for (k, &p3) in quad.nodes.iter().enumerate() {
                let rho = dozz_constant([spec(p1, -1.0), spec(p2, -1.0), spec(p2, 1.0)], params)?
                    * dozz_constant([spec(p1, 1.0), spec(p3, 1.0), spec(p3, -1.0)], params)?;
                let f = block_value([p1, p2, p3], q, params, n_max);
                total +=
                    quad.weights[i] * quad.weights[j] * quad.weights[k] * (rho * f.norm_sqr()).re;
            }
        }
    }
    Ok(2f64.powf(1.5) / (2.0 * PI).powi(5) * total)
}
