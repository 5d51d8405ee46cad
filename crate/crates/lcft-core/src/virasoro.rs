//! Virasoro Verma modules: Young diagrams, normal-ordered generator action,
//! Shapovalov Gram matrices and their guarded inverses.
//!
//! A diagram ν = (ν(1) ≥ … ≥ ν(k)) labels L_{−ν(k)}···L_{−ν(1)}|Δ⟩, so the
//! smallest part is the outermost generator.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LcftError, Result};

/// Scalars the Verma-module algebra can run over.
pub trait Field:
    Clone
    + PartialEq
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(n: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn zero() -> Self {
        Self::from_i64(0)
    }
}

impl Field for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Field for Complex64 {
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct YoungDiagram(Vec<u32>);

impl YoungDiagram {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a diagram from parts in any order; zero parts are rejected.
    pub fn from_parts(parts: &[u32]) -> Result<Self> {
        if parts.contains(&0) {
            return Err(LcftError::Domain(
                "Young diagram parts must be positive".into(),
            ));
        }
        let mut v = parts.to_vec();
        v.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self(v))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn level(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of parts s(ν).
    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn smallest(&self) -> Option<u32> {
        self.0.last().copied()
    }

    fn without_smallest(&self) -> Self {
        Self(self.0[..self.0.len() - 1].to_vec())
    }

    fn with_part(&self, p: u32) -> Self {
        let mut v = self.0.clone();
        let pos = v.iter().position(|&x| x < p).unwrap_or(v.len());
        v.insert(pos, p);
        Self(v)
    }
}

impl Debug for YoungDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// All partitions of n in reverse-lexicographic order, e.g. (2), (1,1).
pub fn partitions(n: u32) -> Vec<YoungDiagram> {
    fn rec(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<YoungDiagram>) {
        if n == 0 {
            out.push(YoungDiagram(prefix.clone()));
            return;
        }
        for first in (1..=n.min(max)).rev() {
            prefix.push(first);
            rec(n - first, first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Graded vector Σ_ν v_ν L_{−ν}|Δ⟩ with all ν at one level.
#[derive(Clone, PartialEq, Debug)]
pub struct VermaVector<F: Field> {
    pub level: u32,
    pub coeffs: BTreeMap<YoungDiagram, F>,
}

impl<F: Field> VermaVector<F> {
    pub fn zero(level: u32) -> Self {
        Self {
            level,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis(d: YoungDiagram, one: F) -> Self {
        let level = d.level();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(d, one);
        Self { level, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(Field::is_zero)
    }

    pub fn coeff(&self, d: &YoungDiagram) -> F {
        self.coeffs.get(d).cloned().unwrap_or_else(F::zero)
    }

    fn add_scaled(&mut self, d: YoungDiagram, c: F) {
        match self.coeffs.get_mut(&d) {
            Some(v) => *v = v.clone() + c,
            None => {
                self.coeffs.insert(d, c);
            }
        }
    }
}

/// Highest-weight module of weight Δ at central charge c with a memoized action table.
#[derive(Debug, Clone)]
pub struct VermaModule<F: Field> {
    pub delta: F,
    pub c: F,
    cache: HashMap<(i32, YoungDiagram), Vec<(YoungDiagram, F)>>,
}

impl<F: Field> VermaModule<F> {
    pub fn new(delta: F, c: F) -> Self {
        Self {
            delta,
            c,
            cache: HashMap::new(),
        }
    }

    /// L_n applied to the basis vector of d, in canonical form.
    pub fn act_basis(&mut self, n: i32, d: &YoungDiagram) -> Vec<(YoungDiagram, F)> {
        let key = (n, d.clone());
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let mut out: BTreeMap<YoungDiagram, F> = BTreeMap::new();
        let push = |out: &mut BTreeMap<YoungDiagram, F>, e: YoungDiagram, c: F| {
            let v = match out.remove(&e) {
                Some(v) => v + c,
                None => c,
            };
            out.insert(e, v);
        };
        let level = d.level() as i64;
        if n == 0 {
            push(&mut out, d.clone(), self.delta.clone() + F::from_i64(level));
        } else if n < 0 {
            let a = (-n) as u32;
            match d.smallest() {
                None => push(&mut out, d.with_part(a), F::from_i64(1)),
                Some(m1) if a <= m1 => push(&mut out, d.with_part(a), F::from_i64(1)),
                Some(m1) => {
                    // L_{−a} L_{−m1} ψ = L_{−m1} L_{−a} ψ + (m1 − a) L_{−a−m1} ψ
                    let psi = d.without_smallest();
                    for (e, c) in self.act_basis(n, &psi) {
                        for (f, c2) in self.act_basis(-(m1 as i32), &e) {
                            push(&mut out, f, c.clone() * c2);
                        }
                    }
                    let k = F::from_i64(m1 as i64 - a as i64);
                    for (e, c) in self.act_basis(-((a + m1) as i32), &psi) {
                        push(&mut out, e, k.clone() * c);
                    }
                }
            }
        } else if let Some(m1) = d.smallest() {
            // L_n L_{−m1} ψ = L_{−m1} L_n ψ + (n + m1) L_{n−m1} ψ + (c/12)(n³ − n) δ_{n,m1} ψ
            let psi = d.without_smallest();
            for (e, c) in self.act_basis(n, &psi) {
                for (f, c2) in self.act_basis(-(m1 as i32), &e) {
                    push(&mut out, f, c.clone() * c2);
                }
            }
            let k = F::from_i64(n as i64 + m1 as i64);
            for (e, c) in self.act_basis(n - m1 as i32, &psi) {
                push(&mut out, e, k.clone() * c);
            }
            if n as u32 == m1 {
                let n = n as i64;
                let central = self.c.clone() * (F::from_i64(n * n * n - n) / F::from_i64(12));
                push(&mut out, psi, central);
            }
        }
        let v: Vec<_> = out.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        self.cache.insert(key, v.clone());
        v
    }

    /// L_n v, normal-ordered.
    pub fn apply(&mut self, n: i32, v: &VermaVector<F>) -> VermaVector<F> {
        let new_level = v.level as i64 - n as i64;
        if new_level < 0 {
            return VermaVector::zero(0);
        }
        let mut out = VermaVector::zero(new_level as u32);
        for (d, c) in &v.coeffs {
            if c.is_zero() {
                continue;
            }
            for (e, k) in self.act_basis(n, d) {
                out.add_scaled(e, c.clone() * k);
            }
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        out
    }

    /// Gram entries ⟨L_{−ν}Δ, L_{−ν′}Δ⟩ over `partitions(n)`, upper triangle mirrored.
    pub fn gram(&mut self, n: u32) -> Vec<Vec<F>> {
        let basis = partitions(n);
        let index: HashMap<YoungDiagram, usize> = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, d)| (d, i))
            .collect();
        let dim = basis.len();
        let mut g = vec![vec![F::zero(); dim]; dim];
        for (j, ket) in basis.iter().enumerate() {
            let v = VermaVector::basis(ket.clone(), F::from_i64(1));
            let mut seq = Vec::new();
            self.bra_dfs(&v, 1, &mut seq, &mut |seq, val| {
                let bra = YoungDiagram(seq.iter().rev().copied().collect());
                g[index[&bra]][j] = val;
            });
        }
        for i in 0..dim {
            for j in 0..i {
                g[i][j] = g[j][i].clone();
            }
        }
        g
    }

    /// Applies non-decreasing sequences of annihilators L_{p₁}, L_{p₂}, … to v until
    /// level 0 and reports the surviving vacuum coefficient per sequence.
    fn bra_dfs(
        &mut self,
        v: &VermaVector<F>,
        min: u32,
        seq: &mut Vec<u32>,
        sink: &mut dyn FnMut(&[u32], F),
    ) {
        if v.level == 0 {
            sink(seq, v.coeff(&YoungDiagram::empty()));
            return;
        }
        for p in min..=v.level {
            let w = self.apply(p as i32, v);
            if w.is_zero() {
                continue;
            }
            seq.push(p);
            self.bra_dfs(&w, p, seq, sink);
            seq.pop();
        }
    }
}

/// L_n v for a single call; prefer a shared `VermaModule` in loops.
pub fn apply_virasoro(
    n: i32,
    v: &VermaVector<Complex64>,
    delta: Complex64,
    c: f64,
) -> VermaVector<Complex64> {
    VermaModule::new(delta, Complex64::new(c, 0.0)).apply(n, v)
}

#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub level: u32,
    pub delta: Complex64,
    pub c: f64,
    pub basis: Vec<YoungDiagram>,
    pub entries: DMatrix<Complex64>,
}

/// Shapovalov form at level n.
pub fn shapovalov(delta: Complex64, c: f64, n: u32) -> GramMatrix {
    let mut m = VermaModule::new(delta, Complex64::new(c, 0.0));
    shapovalov_with(&mut m, n)
}

pub fn shapovalov_with(module: &mut VermaModule<Complex64>, n: u32) -> GramMatrix {
    let g = module.gram(n);
    let dim = g.len();
    let entries = DMatrix::from_fn(dim, dim, |i, j| g[i][j]);
    GramMatrix {
        level: n,
        delta: module.delta,
        c: module.c.re,
        basis: partitions(n),
        entries,
    }
}

#[derive(Debug, Clone)]
pub struct GramInverse {
    pub level: u32,
    pub entries: DMatrix<Complex64>,
    /// ‖F·F⁻¹ − I‖_max.
    pub residual: f64,
    /// Condition estimate of the diagonally equilibrated matrix.
    pub condition: f64,
    pub positive_definite: bool,
}

pub const DEFAULT_COND_GUARD: f64 = 1e10;

/// F⁻¹, via Cholesky when F is real positive definite and LU otherwise.
pub fn shapovalov_inverse(f: &GramMatrix, cond_guard: f64) -> Result<GramInverse> {
    let a = &f.entries;
    let dim = a.nrows();
    if dim == 0 {
        return Ok(GramInverse {
            level: f.level,
            entries: a.clone(),
            residual: 0.0,
            condition: 1.0,
            positive_definite: true,
        });
    }
    let scale: Vec<f64> = (0..dim).map(|i| a[(i, i)].norm().sqrt()).collect();
    if scale.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return Err(LcftError::DegenerateWeight {
            cond: f64::INFINITY,
            guard: cond_guard,
        });
    }
    let scaled = DMatrix::from_fn(dim, dim, |i, j| a[(i, j)] / (scale[i] * scale[j]));
    let max_abs = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let is_real = a.iter().all(|z| z.im.abs() <= 1e-14 * max_abs);

    let mut positive_definite = false;
    let (inv_scaled, condition) = if is_real {
        let s = scaled.map(|z| z.re);
        let eig = nalgebra::SymmetricEigen::new(s.clone());
        let (lo, hi) = eig
            .eigenvalues
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| {
                (lo.min(e.abs()), hi.max(e.abs()))
            });
        let cond = if lo == 0.0 { f64::INFINITY } else { hi / lo };
        if cond > cond_guard || !cond.is_finite() {
            return Err(LcftError::DegenerateWeight {
                cond,
                guard: cond_guard,
            });
        }
        let inv = match s.clone().cholesky() {
            Some(ch) => {
                positive_definite = true;
                ch.inverse()
            }
            None => s.lu().try_inverse().ok_or(LcftError::DegenerateWeight {
                cond: f64::INFINITY,
                guard: cond_guard,
            })?,
        };
        (inv.map(|x| Complex64::new(x, 0.0)), cond)
    } else {
        let sv = scaled.clone().svd(false, false).singular_values;
        let hi = sv.iter().cloned().fold(0.0, f64::max);
        let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let cond = if lo == 0.0 { f64::INFINITY } else { hi / lo };
        if cond > cond_guard || !cond.is_finite() {
            return Err(LcftError::DegenerateWeight {
                cond,
                guard: cond_guard,
            });
        }
        let inv = scaled
            .lu()
            .try_inverse()
            .ok_or(LcftError::DegenerateWeight {
                cond: f64::INFINITY,
                guard: cond_guard,
            })?;
        (inv, cond)
    };
    let mut entries = DMatrix::from_fn(dim, dim, |i, j| inv_scaled[(i, j)] / (scale[i] * scale[j]));
    // Symmetrize so F⁻¹ shares the exact symmetry of F.
    for i in 0..dim {
        for j in 0..i {
            let m = (entries[(i, j)] + entries[(j, i)]) / 2.0;
            entries[(i, j)] = m;
            entries[(j, i)] = m;
        }
    }
    let prod = a * &entries;
    let residual = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| (prod[(i, j)] - if i == j { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max);
    Ok(GramInverse {
        level: f.level,
        entries,
        residual,
        condition,
        positive_definite,
    })
}

/// |det F| divided by the product of the row norms (Hadamard ratio, in [0, 1]).
pub fn normalized_determinant(f: &GramMatrix) -> f64 {
    let a = &f.entries;
    if a.nrows() == 0 {
        return 1.0;
    }
    let det = a.clone().lu().determinant().norm();
    let rows: f64 = (0..a.nrows())
        .map(|i| a.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .product();
    if rows == 0.0 {
        0.0
    } else {
        det / rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn partition_counts_and_order() {
        let counts: Vec<usize> = (0..9).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15, 22]);
        assert_eq!(partitions(0), vec![YoungDiagram::empty()]);
        let p2: Vec<Vec<u32>> = partitions(2).iter().map(|d| d.parts().to_vec()).collect();
        assert_eq!(p2, vec![vec![2], vec![1, 1]]);
        let p4: Vec<Vec<u32>> = partitions(4).iter().map(|d| d.parts().to_vec()).collect();
        assert_eq!(
            p4,
            vec![
                vec![4],
                vec![3, 1],
                vec![2, 2],
                vec![2, 1, 1],
                vec![1, 1, 1, 1]
            ]
        );
    }

    #[test]
    fn generator_examples() {
        let d = cx(0.37);
        let c = 7.5;
        let v = VermaVector::basis(YoungDiagram::from_parts(&[1]).unwrap(), cx(1.0));
        let r = apply_virasoro(0, &v, d, c);
        assert_eq!(r.coeff(&YoungDiagram::from_parts(&[1]).unwrap()), d + 1.0);
        let r = apply_virasoro(1, &v, d, c);
        assert_eq!(r.coeff(&YoungDiagram::empty()), 2.0 * d);
        let v2 = VermaVector::basis(YoungDiagram::from_parts(&[2]).unwrap(), cx(1.0));
        let r = apply_virasoro(2, &v2, d, c);
        assert_eq!(r.coeff(&YoungDiagram::empty()), 4.0 * d + c / 2.0);
    }

    #[test]
    fn raising_reorders_to_canonical_form() {
        // L_{−2} L_{−1}|Δ⟩ = L_{−1} L_{−2}|Δ⟩ − L_{−3}|Δ⟩
        let mut m = VermaModule::new(0.3, 2.0);
        let v = VermaVector::basis(YoungDiagram::from_parts(&[1]).unwrap(), 1.0);
        let r = m.apply(-2, &v);
        assert_eq!(r.coeff(&YoungDiagram::from_parts(&[2, 1]).unwrap()), 1.0);
        assert_eq!(r.coeff(&YoungDiagram::from_parts(&[3]).unwrap()), -1.0);
        assert_eq!(r.coeffs.len(), 2);
    }

    #[test]
    fn level_two_gram() {
        let (d, c) = (0.75, 3.5);
        let g = shapovalov(cx(d), c, 2);
        let want = [
            [4.0 * d + c / 2.0, 6.0 * d],
            [6.0 * d, 8.0 * d * d + 4.0 * d],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g.entries[(i, j)], cx(want[i][j]));
            }
        }
        assert_eq!(shapovalov(cx(d), c, 0).entries[(0, 0)], cx(1.0));
        assert_eq!(shapovalov(cx(d), c, 1).entries[(0, 0)], cx(2.0 * d));
    }

    #[test]
    fn inverse_and_guard() {
        let g = shapovalov(cx(0.4), 28.0, 1);
        let inv = shapovalov_inverse(&g, DEFAULT_COND_GUARD).unwrap();
        assert!((inv.entries[(0, 0)] - 1.0 / 0.8).norm() < 1e-15);
        let z = shapovalov(cx(0.0), 28.0, 1);
        assert!(matches!(
            shapovalov_inverse(&z, DEFAULT_COND_GUARD),
            Err(LcftError::DegenerateWeight { .. })
        ));
    }
}
