//! Three-point functions with descendant insertions at finite points,
//! reduced to differential operators acting on the holomorphic half
//! H(z) = ∏_{i<j} (z_i − z_j)^{Δ_k − Δ_i − Δ_j}.
//!
//! Functions of the insertion points are kept as Laurent polynomials in
//! z12, z13, z23 multiplying H, so every ratio to H is branch-free.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use crate::virasoro::{VermaModule, VermaVector, YoungDiagram};

/// Exponent offsets (k12, k13, k23) relative to H.
type Key = (i32, i32, i32);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LaurentExpr {
    pub terms: BTreeMap<Key, Complex64>,
}

impl LaurentExpr {
    fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0, 0), Complex64::new(1.0, 0.0));
        Self { terms }
    }

    fn add_term(&mut self, k: Key, c: Complex64) {
        if c.re == 0.0 && c.im == 0.0 {
            return;
        }
        *self.terms.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    fn add_scaled(&mut self, other: &LaurentExpr, shift: Key, c: Complex64) {
        for (k, v) in &other.terms {
            self.add_term((k.0 + shift.0, k.1 + shift.1, k.2 + shift.2), *v * c);
        }
    }

    /// Σ c · z12^{k12} z13^{k13} z23^{k23}: the ratio to H at the given points.
    pub fn evaluate(&self, z: &InsertionPoints) -> Complex64 {
        match z {
            InsertionPoints::Finite(p) => {
                let (z12, z13, z23) = (p[0] - p[1], p[0] - p[2], p[1] - p[2]);
                self.terms
                    .iter()
                    .map(|(k, c)| c * z12.powi(k.0) * z13.powi(k.1) * z23.powi(k.2))
                    .sum()
            }
            InsertionPoints::FirstAtInfinity(z2, z3) => {
                let z23 = z2 - z3;
                // Every offset is non-positive, so only k12 = k13 = 0 survives.
                self.terms
                    .iter()
                    .filter(|(k, _)| k.0 == 0 && k.1 == 0)
                    .map(|(k, c)| c * z23.powi(k.2))
                    .sum()
            }
        }
    }
}

/// Where the three primaries sit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InsertionPoints {
    Finite([Complex64; 3]),
    /// z₁ → ∞ with the ratio to H kept finite.
    FirstAtInfinity(Complex64, Complex64),
}

impl InsertionPoints {
    /// ẑ = (−1/2, 1/2, i√3/2), an equilateral triangle of unit side.
    pub fn canonical() -> Self {
        InsertionPoints::Finite([
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 3f64.sqrt() / 2.0),
        ])
    }
}

/// Generalized binomial coefficient binom(x, k) for integer x.
fn binom(x: i64, k: u32) -> f64 {
    let mut r = 1.0;
    for j in 0..k as i64 {
        r *= (x - j) as f64 / (j + 1) as f64;
    }
    r
}

/// Coefficient of (z_i − z_s)^{1−m−k} L_{k−1} when a mode L_{−m} at z_s is moved onto z_i.
fn transfer_coeff(m: u32, k: u32) -> f64 {
    -binom(1 - m as i64, k)
}

/// Memoized evaluator of (L_{−ν₁}V₁ | L_{−ν₂}V₂ | L_{−ν₃}V₃) / H as functions of z.
#[derive(Debug, Clone)]
pub struct DescendantCorrelator {
    pub deltas: [Complex64; 3],
    /// H exponents (a12, a13, a23).
    exps: [Complex64; 3],
    m1: VermaModule<Complex64>,
    m2: VermaModule<Complex64>,
    memo: HashMap<(YoungDiagram, YoungDiagram, YoungDiagram), LaurentExpr>,
}

impl DescendantCorrelator {
    pub fn new(deltas: [Complex64; 3], c: f64) -> Self {
        let [d1, d2, d3] = deltas;
        let cc = Complex64::new(c, 0.0);
        Self {
            deltas,
            exps: [d3 - d1 - d2, d2 - d1 - d3, d1 - d2 - d3],
            m1: VermaModule::new(d1, cc),
            m2: VermaModule::new(d2, cc),
            memo: HashMap::new(),
        }
    }

    /// ∂/∂z_i of f·H, expressed again relative to H.
    fn derivative(&self, f: &LaurentExpr, i: usize) -> LaurentExpr {
        let [a12, a13, a23] = self.exps;
        let mut out = LaurentExpr::default();
        for (&(k12, k13, k23), &c) in &f.terms {
            let e12 = (a12 + k12 as f64) * c;
            let e13 = (a13 + k13 as f64) * c;
            let e23 = (a23 + k23 as f64) * c;
            match i {
                1 => {
                    out.add_term((k12 - 1, k13, k23), e12);
                    out.add_term((k12, k13 - 1, k23), e13);
                }
                2 => {
                    out.add_term((k12 - 1, k13, k23), -e12);
                    out.add_term((k12, k13, k23 - 1), e23);
                }
                _ => {
                    out.add_term((k12, k13 - 1, k23), -e13);
                    out.add_term((k12, k13, k23 - 1), -e23);
                }
            }
        }
        out
    }

    /// −(z_i − u)^{1−m} ∂_i f + (m−1)(z_i − u)^{−m} Δ_i f, where z_i − u = sign · z_{pair}.
    fn ward_term(&self, f: &LaurentExpr, m: u32, i: usize, pair: usize, sign: f64) -> LaurentExpr {
        let shift = |p: i32| -> Key {
            match pair {
                12 => (p, 0, 0),
                13 => (0, p, 0),
                _ => (0, 0, p),
            }
        };
        let m = m as i32;
        let mut out = LaurentExpr::default();
        let df = self.derivative(f, i);
        out.add_scaled(&df, shift(1 - m), Complex64::new(-sign.powi(1 - m), 0.0));
        let w = (m - 1) as f64 * sign.powi(-m) * self.deltas[i - 1];
        out.add_scaled(f, shift(-m), w);
        out
    }

    /// The correlator as a Laurent expression relative to H.
    pub fn expr(&mut self, n1: &YoungDiagram, n2: &YoungDiagram, n3: &YoungDiagram) -> LaurentExpr {
        let key = (n1.clone(), n2.clone(), n3.clone());
        if let Some(e) = self.memo.get(&key) {
            return e.clone();
        }
        let one = Complex64::new(1.0, 0.0);
        let mut out = LaurentExpr::default();
        if let Some(m) = n3.smallest() {
            // Move the outermost L_{−m} of slot 3 onto slots 2 and 1.
            let rest = strip(n3);
            let v2 = VermaVector::basis(n2.clone(), one);
            for k in 0..=(n2.level() + 1) {
                let tc = transfer_coeff(m, k);
                if tc == 0.0 {
                    continue;
                }
                let w = self.m2.apply(k as i32 - 1, &v2);
                for (e, c) in &w.coeffs {
                    let sub = self.expr(n1, e, &rest);
                    out.add_scaled(&sub, (0, 0, 1 - m as i32 - k as i32), c * tc);
                }
            }
            let v1 = VermaVector::basis(n1.clone(), one);
            for k in 0..=(n1.level() + 1) {
                let tc = transfer_coeff(m, k);
                if tc == 0.0 {
                    continue;
                }
                let w = self.m1.apply(k as i32 - 1, &v1);
                for (e, c) in &w.coeffs {
                    let sub = self.expr(e, n2, &rest);
                    out.add_scaled(&sub, (0, 1 - m as i32 - k as i32, 0), c * tc);
                }
            }
        } else if let Some(m) = n2.smallest() {
            // Slot 3 is primary: its contribution is a differential operator.
            let rest = strip(n2);
            let inner = self.expr(n1, &rest, n3);
            out = self.ward_term(&inner, m, 3, 23, -1.0);
            let v1 = VermaVector::basis(n1.clone(), one);
            for k in 0..=(n1.level() + 1) {
                let tc = transfer_coeff(m, k);
                if tc == 0.0 {
                    continue;
                }
                let w = self.m1.apply(k as i32 - 1, &v1);
                for (e, c) in &w.coeffs {
                    let sub = self.expr(e, &rest, n3);
                    out.add_scaled(&sub, (1 - m as i32 - k as i32, 0, 0), c * tc);
                }
            }
        } else if let Some(m) = n1.smallest() {
            let rest = strip(n1);
            let inner = self.expr(&rest, n2, n3);
            out = self.ward_term(&inner, m, 2, 12, -1.0);
            let t3 = self.ward_term(&inner, m, 3, 13, -1.0);
            out.add_scaled(&t3, (0, 0, 0), one);
        } else {
            out = LaurentExpr::one();
        }
        self.memo.insert(key, out.clone());
        out
    }

    pub fn value(
        &mut self,
        n1: &YoungDiagram,
        n2: &YoungDiagram,
        n3: &YoungDiagram,
        at: &InsertionPoints,
    ) -> Complex64 {
        self.expr(n1, n2, n3).evaluate(at)
    }
}

fn strip(d: &YoungDiagram) -> YoungDiagram {
    let parts = d.parts();
    YoungDiagram::from_parts(&parts[..parts.len() - 1]).expect("parts stay positive")
}

/// Normalized coefficient (L_{−ν₁}V₁ | L_{−ν₂}V₂ | L_{−ν₃}V₃)/H at the canonical points ẑ.
pub fn three_point_descendant(
    deltas: [Complex64; 3],
    c: f64,
    nus: [&YoungDiagram; 3],
) -> Complex64 {
    DescendantCorrelator::new(deltas, c).value(
        nus[0],
        nus[1],
        nus[2],
        &InsertionPoints::canonical(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn yd(p: &[u32]) -> YoungDiagram {
        YoungDiagram::from_parts(p).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(-1, 3), -1.0);
        assert_eq!(binom(0, 0), 1.0);
        assert_eq!(binom(0, 2), 0.0);
        assert_eq!(transfer_coeff(2, 0), -1.0);
        assert_eq!(transfer_coeff(2, 1), 1.0);
        assert_eq!(transfer_coeff(3, 1), 2.0);
    }

    #[test]
    fn empty_is_one() {
        let d = [
            Complex64::new(0.3, 0.0),
            Complex64::new(0.7, 0.1),
            Complex64::new(1.1, 0.0),
        ];
        let e = YoungDiagram::empty();
        assert_eq!(
            three_point_descendant(d, 25.0, [&e, &e, &e]),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn level_one_is_translation_derivative() {
        let d = [
            Complex64::new(0.3, 0.0),
            Complex64::new(0.7, 0.0),
            Complex64::new(1.1, 0.0),
        ];
        let e = YoungDiagram::empty();
        let mut dc = DescendantCorrelator::new(d, 25.0);
        let at = InsertionPoints::canonical();
        let s: Complex64 = [
            dc.value(&yd(&[1]), &e, &e, &at),
            dc.value(&e, &yd(&[1]), &e, &at),
            dc.value(&e, &e, &yd(&[1]), &at),
        ]
        .iter()
        .sum();
        assert!(s.norm() < 1e-13);
    }
}
