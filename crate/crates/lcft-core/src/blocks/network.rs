//! Dense tensor-network contraction with a greedy pairwise schedule.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LcftError, Result};

/// Row-major dense tensor whose legs carry global identifiers.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub legs: Vec<usize>,
    pub dims: Vec<usize>,
    pub data: Vec<Complex64>,
}

impl Tensor {
    pub fn new(legs: Vec<usize>, dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        if legs.len() != dims.len() || dims.iter().product::<usize>() != data.len() {
            return Err(LcftError::DimensionMismatch(format!(
                "tensor legs {:?} dims {:?} with {} entries",
                legs,
                dims,
                data.len()
            )));
        }
        Ok(Self { legs, dims, data })
    }

    pub fn scalar(v: Complex64) -> Self {
        Self {
            legs: vec![],
            dims: vec![],
            data: vec![v],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn dim_of(&self, leg: usize) -> Option<usize> {
        self.legs
            .iter()
            .position(|&l| l == leg)
            .map(|i| self.dims[i])
    }

    /// Reshape into a matrix with the given row legs and column legs.
    fn as_matrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<Complex64> {
        let pos = |l: usize| self.legs.iter().position(|&x| x == l).expect("leg present");
        let rpos: Vec<usize> = rows.iter().map(|&l| pos(l)).collect();
        let cpos: Vec<usize> = cols.iter().map(|&l| pos(l)).collect();
        let nr: usize = rpos.iter().map(|&p| self.dims[p]).product();
        let nc: usize = cpos.iter().map(|&p| self.dims[p]).product();
        let mut strides = vec![1usize; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        let offsets = |ps: &[usize], n: usize| -> Vec<usize> {
            (0..n)
                .map(|mut flat| {
                    let mut off = 0;
                    for &p in ps.iter().rev() {
                        off += (flat % self.dims[p]) * strides[p];
                        flat /= self.dims[p];
                    }
                    off
                })
                .collect()
        };
        let ro = offsets(&rpos, nr);
        let co = offsets(&cpos, nc);
        DMatrix::from_fn(nr, nc, |i, j| self.data[ro[i] + co[j]])
    }

    /// Sum over all legs shared with `other`; result legs are self's free legs then other's.
    pub fn contract(&self, other: &Tensor) -> Tensor {
        let shared: Vec<usize> = self
            .legs
            .iter()
            .copied()
            .filter(|l| other.legs.contains(l))
            .collect();
        let a_free: Vec<usize> = self
            .legs
            .iter()
            .copied()
            .filter(|l| !shared.contains(l))
            .collect();
        let b_free: Vec<usize> = other
            .legs
            .iter()
            .copied()
            .filter(|l| !shared.contains(l))
            .collect();
        let a = self.as_matrix(&a_free, &shared);
        let b = other.as_matrix(&shared, &b_free);
        let m = a * b;
        let mut dims: Vec<usize> = a_free.iter().map(|&l| self.dim_of(l).unwrap()).collect();
        dims.extend(b_free.iter().map(|&l| other.dim_of(l).unwrap()));
        let mut legs = a_free;
        legs.extend(b_free);
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)])
            .collect();
        Tensor { legs, dims, data }
    }
}

fn result_size(a: &Tensor, b: &Tensor) -> usize {
    let mut s = 1usize;
    for (l, d) in a.legs.iter().zip(&a.dims) {
        if !b.legs.contains(l) {
            s *= d;
        }
    }
    for (l, d) in b.legs.iter().zip(&b.dims) {
        if !a.legs.contains(l) {
            s *= d;
        }
    }
    s
}

/// Contract a closed network (every leg appears exactly twice) to a scalar.
pub fn contract_network(mut tensors: Vec<Tensor>) -> Result<Complex64> {
    if tensors.is_empty() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    while tensors.len() > 1 {
        let mut best: Option<(usize, usize, usize)> = None;
        for i in 0..tensors.len() {
            for j in (i + 1)..tensors.len() {
                if !tensors[i].legs.iter().any(|l| tensors[j].legs.contains(l)) {
                    continue;
                }
                let s = result_size(&tensors[i], &tensors[j]);
                if best.is_none_or(|(_, _, bs)| s < bs) {
                    best = Some((i, j, s));
                }
            }
        }
        let (i, j, _) =
            best.ok_or_else(|| LcftError::GraphInvalid("tensor network is disconnected".into()))?;
        let b = tensors.remove(j);
        let a = tensors.remove(i);
        tensors.insert(i, a.contract(&b));
    }
    let t = tensors.pop().expect("one tensor left");
    if !t.legs.is_empty() {
        return Err(LcftError::GraphInvalid(format!(
            "open legs remain: {:?}",
            t.legs
        )));
    }
    Ok(t.data[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn matrix_trace_via_network() {
        // Tr(A B) with A = [[1,2],[3,4]], B = [[5,6],[7,8]] is 69.
        let a = Tensor::new(vec![0, 1], vec![2, 2], vec![c(1.), c(2.), c(3.), c(4.)]).unwrap();
        let b = Tensor::new(vec![1, 0], vec![2, 2], vec![c(5.), c(6.), c(7.), c(8.)]).unwrap();
        assert_eq!(contract_network(vec![a, b]).unwrap(), c(69.0));
    }

    #[test]
    fn three_leg_chain() {
        let t = Tensor::new(
            vec![0, 1, 2],
            vec![2, 1, 2],
            (1..=4).map(|x| c(x as f64)).collect(),
        )
        .unwrap();
        let u = Tensor::new(vec![1], vec![1], vec![c(2.0)]).unwrap();
        let g = Tensor::new(vec![0, 2], vec![2, 2], vec![c(1.), c(0.), c(0.), c(1.)]).unwrap();
        // Σ_{i} t[i,0,i]·2 = (1 + 4)·2.
        assert_eq!(contract_network(vec![t, u, g]).unwrap(), c(10.0));
    }
}
