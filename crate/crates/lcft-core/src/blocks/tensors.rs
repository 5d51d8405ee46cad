//! Block coefficient tensors for the three kinds of building blocks.
//!
//! Annulus and disk coefficients are chiral vertex matrix elements
//! ⟨L_{−ν}Δ_out| V_{Δ_v}(1) |L_{−ν′}Δ_in⟩ normalized by the primary one,
//! obtained by commuting modes through V with
//! [L_n, V(z)] = zⁿ(z∂_z + (n+1)Δ_v)V(z). Pant coefficients come from the
//! descendant recursion at ẑ.

use std::collections::HashMap;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::descendant::{DescendantCorrelator, InsertionPoints};
use crate::virasoro::{partitions, VermaModule, YoungDiagram};

/// All Young diagrams of level ≤ n_max, level by level in canonical order.
#[derive(Debug, Clone)]
pub struct LevelBasis {
    pub n_max: u32,
    pub diagrams: Vec<YoungDiagram>,
    offsets: Vec<usize>,
    index: HashMap<YoungDiagram, usize>,
}

impl LevelBasis {
    pub fn new(n_max: u32) -> Self {
        let mut diagrams = Vec::new();
        let mut offsets = vec![0];
        for n in 0..=n_max {
            diagrams.extend(partitions(n));
            offsets.push(diagrams.len());
        }
        let index = diagrams
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), i))
            .collect();
        Self {
            n_max,
            diagrams,
            offsets,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.diagrams.len()
    }

    pub fn range(&self, level: u32) -> Range<usize> {
        self.offsets[level as usize]..self.offsets[level as usize + 1]
    }

    pub fn index_of(&self, d: &YoungDiagram) -> Option<usize> {
        self.index.get(d).copied()
    }

    pub fn level_of(&self, i: usize) -> u32 {
        self.diagrams[i].level()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Disk,
    Annulus,
    Pant,
}

impl VertexKind {
    pub fn rank(self) -> usize {
        match self {
            VertexKind::Disk => 1,
            VertexKind::Annulus => 2,
            VertexKind::Pant => 3,
        }
    }
}

/// Dense coefficient tensor over `basis` on each descendant leg, row-major.
///
/// Weight conventions: disk `[Δ_p, Δ_v, Δ_center]` with the descendant on p;
/// annulus `[Δ_out, Δ_v, Δ_in]` indexed `[ν_out][ν_in]`; pant the three slot
/// weights at ẑ.
#[derive(Debug, Clone)]
pub struct BlockCoeffTensor {
    pub kind: VertexKind,
    pub deltas: [Complex64; 3],
    pub basis: LevelBasis,
    pub data: Vec<Complex64>,
}

impl BlockCoeffTensor {
    pub fn rank(&self) -> usize {
        self.kind.rank()
    }

    pub fn get(&self, nus: &[&YoungDiagram]) -> Option<Complex64> {
        if nus.len() != self.rank() {
            return None;
        }
        let d = self.basis.dim();
        let mut flat = 0;
        for nu in nus {
            flat = flat * d + self.basis.index_of(nu)?;
        }
        Some(self.data[flat])
    }

    /// Annulus entries restricted to levels (n_out, n_in).
    pub fn matrix_block(&self, n_out: u32, n_in: u32) -> DMatrix<Complex64> {
        assert_eq!(self.kind, VertexKind::Annulus);
        let d = self.basis.dim();
        let (r, c) = (self.basis.range(n_out), self.basis.range(n_in));
        DMatrix::from_fn(r.len(), c.len(), |i, j| {
            self.data[(r.start + i) * d + c.start + j]
        })
    }

    /// Disk entries restricted to level n.
    pub fn vector_block(&self, n: u32) -> DVector<Complex64> {
        assert_eq!(self.kind, VertexKind::Disk);
        DVector::from_iterator(
            self.basis.range(n).len(),
            self.basis.range(n).map(|i| self.data[i]),
        )
    }
}

/// w^D[ν] = ⟨L_{−ν}Δ_p| V_{Δ_v}(1) |Δ_b⟩, a product over the parts of ν.
pub fn disk_tensor(
    delta_p: Complex64,
    delta_v: Complex64,
    delta_b: Complex64,
    n_max: u32,
) -> BlockCoeffTensor {
    let basis = LevelBasis::new(n_max);
    let data = basis
        .diagrams
        .iter()
        .map(|nu| {
            let mut acc = Complex64::new(1.0, 0.0);
            let mut prefix = 0u32;
            for &a in nu.parts() {
                acc *= delta_p + prefix as f64 + delta_v * a as f64 - delta_b;
                prefix += a;
            }
            acc
        })
        .collect();
    BlockCoeffTensor {
        kind: VertexKind::Disk,
        deltas: [delta_p, delta_v, delta_b],
        basis,
        data,
    }
}

/// w^A[ν][ν′] = ⟨L_{−ν}Δ_out| V_{Δ_v}(1) |L_{−ν′}Δ_in⟩ for all levels ≤ n_max.
pub fn annulus_tensor(
    delta_out: Complex64,
    delta_v: Complex64,
    delta_in: Complex64,
    c: f64,
    n_max: u32,
) -> BlockCoeffTensor {
    let basis = LevelBasis::new(n_max);
    let d = basis.dim();
    let mut module = VermaModule::new(delta_in, Complex64::new(c, 0.0));
    let mut t = vec![Complex64::new(0.0, 0.0); d * d];

    // Bra primary: peel the ket from its outermost (smallest) mode.
    for (j, nu) in basis.diagrams.iter().enumerate() {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut inner = nu.level();
        for &m in nu.parts().iter().rev() {
            inner -= m;
            acc *= delta_in + inner as f64 + delta_v * m as f64 - delta_out;
        }
        t[j] = acc;
    }
    // Bra ⟨Δ_out|L_{μ₁}···L_{μ_k}: move L_{μ_k} onto the ket first.
    for i in 1..d {
        let mu = &basis.diagrams[i];
        let parts = mu.parts();
        let a = *parts.last().expect("nonempty");
        let prefix = YoungDiagram::from_parts(&parts[..parts.len() - 1]).expect("valid prefix");
        let pi = basis.index_of(&prefix).expect("prefix in basis");
        let n_prefix = prefix.level() as f64;
        for j in 0..d {
            let ket = &basis.diagrams[j];
            let mut acc = (delta_out + n_prefix - delta_v - delta_in - ket.level() as f64
                + (a as f64 + 1.0) * delta_v)
                * t[pi * d + j];
            if ket.level() >= a {
                for (e, coef) in module.act_basis(a as i32, ket) {
                    let ei = basis.index_of(&e).expect("lowered ket in basis");
                    acc += coef * t[pi * d + ei];
                }
            }
            t[i * d + j] = acc;
        }
    }
    BlockCoeffTensor {
        kind: VertexKind::Annulus,
        deltas: [delta_out, delta_v, delta_in],
        basis,
        data: t,
    }
}

/// w_P[ν₁][ν₂][ν₃] at ẑ for all levels ≤ n_max on each slot.
pub fn pant_tensor(deltas: [Complex64; 3], c: f64, n_max: u32) -> BlockCoeffTensor {
    let basis = LevelBasis::new(n_max);
    let mut corr = DescendantCorrelator::new(deltas, c);
    let at = InsertionPoints::canonical();
    let mut data = Vec::with_capacity(basis.dim().pow(3));
    for a in &basis.diagrams {
        for b in &basis.diagrams {
            for cc in &basis.diagrams {
                data.push(corr.value(a, b, cc, &at));
            }
        }
    }
    BlockCoeffTensor {
        kind: VertexKind::Pant,
        deltas,
        basis,
        data,
    }
}

/// Uniform entry point: weights ordered as documented on [`BlockCoeffTensor`].
pub fn block_coeff_tensor(
    kind: VertexKind,
    deltas: [Complex64; 3],
    c: f64,
    n_max: u32,
) -> BlockCoeffTensor {
    match kind {
        VertexKind::Disk => disk_tensor(deltas[0], deltas[1], deltas[2], n_max),
        VertexKind::Annulus => annulus_tensor(deltas[0], deltas[1], deltas[2], c, n_max),
        VertexKind::Pant => pant_tensor(deltas, c, n_max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn normalization_and_level_one() {
        let (o, v, i) = (cx(1.3), cx(0.4), cx(0.9));
        let a = annulus_tensor(o, v, i, 28.0, 2);
        let e = YoungDiagram::empty();
        let one = YoungDiagram::from_parts(&[1]).unwrap();
        assert_eq!(a.get(&[&e, &e]), Some(cx(1.0)));
        assert!((a.get(&[&one, &e]).unwrap() - (o + v - i)).norm() < 1e-14);
        assert!((a.get(&[&e, &one]).unwrap() - (i + v - o)).norm() < 1e-14);
        let want = 2.0 * i + (o + v - i - 1.0) * (i + v - o);
        assert!((a.get(&[&one, &one]).unwrap() - want).norm() < 1e-13);
        let dk = disk_tensor(o, v, i, 2);
        assert!((dk.get(&[&one]).unwrap() - (o + v - i)).norm() < 1e-14);
    }

    #[test]
    fn in_out_swap_is_transpose() {
        let (o, v, i) = (Complex64::new(1.3, 0.2), cx(0.45), cx(2.1));
        let a = annulus_tensor(o, v, i, 26.5, 4);
        let b = annulus_tensor(i, v, o, 26.5, 4);
        let d = a.basis.dim();
        for r in 0..d {
            for s in 0..d {
                let x = a.data[r * d + s];
                let y = b.data[s * d + r];
                assert!(
                    (x - y).norm() <= 1e-10 * (1.0 + x.norm()),
                    "{r} {s}: {x} {y}"
                );
            }
        }
    }
}
