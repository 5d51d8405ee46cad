//! Exact Gram matrices from vacuum expectations of mode words.
//!
//! ⟨Δ| L_{a₁} ··· L_{a_k} |Δ⟩ is reduced by swapping adjacent pairs (n ≥ 0, m < 0)
//! with [L_n, L_m] = (n − m)L_{n+m} + (c/12)(n³ − n)δ_{n+m,0} until every
//! lowering mode sits left of every raising one.

use std::collections::HashMap;

use num_rational::Ratio;

pub type Q = Ratio<i128>;

pub struct WordEvaluator {
    delta: Q,
    c: Q,
    memo: HashMap<Vec<i32>, Q>,
}

impl WordEvaluator {
    pub fn new(delta: Q, c: Q) -> Self {
        Self {
            delta,
            c,
            memo: HashMap::new(),
        }
    }

    pub fn vev(&mut self, word: &[i32]) -> Q {
        if let Some(v) = self.memo.get(word) {
            return *v;
        }
        let v = self.reduce(word);
        self.memo.insert(word.to_vec(), v);
        v
    }

    fn reduce(&mut self, w: &[i32]) -> Q {
        let zero = Q::from_integer(0);
        // Level bookkeeping: a nonzero vev needs total mode sum zero.
        if w.iter().map(|&n| n as i64).sum::<i64>() != 0 {
            return zero;
        }
        let Some(i) = (0..w.len().saturating_sub(1)).find(|&i| w[i] >= 0 && w[i + 1] < 0) else {
            // Normal-ordered: raising modes left, then L₀'s, then lowering modes.
            if w.iter().any(|&n| n != 0) {
                return zero;
            }
            let mut acc = Q::from_integer(1);
            for _ in w {
                acc *= self.delta;
            }
            return acc;
        };
        let (n, m) = (w[i], w[i + 1]);
        let mut swapped = w.to_vec();
        swapped.swap(i, i + 1);
        let mut acc = self.vev(&swapped);
        let k = (n - m) as i128;
        if k != 0 {
            let mut merged = w[..i].to_vec();
            merged.push(n + m);
            merged.extend_from_slice(&w[i + 2..]);
            acc += Q::from_integer(k) * self.vev(&merged);
        }
        if n + m == 0 {
            let nn = n as i128;
            let central = self.c * Q::new(nn * nn * nn - nn, 12);
            let mut rest = w[..i].to_vec();
            rest.extend_from_slice(&w[i + 2..]);
            acc += central * self.vev(&rest);
        }
        acc
    }

    /// ⟨L_{−ν}Δ, L_{−ν′}Δ⟩ with L_{−ν}|Δ⟩ = L_{−ν(k)} ··· L_{−ν(1)}|Δ⟩ for parts ν(1) ≥ … ≥ ν(k).
    pub fn gram_entry(&mut self, nu: &[u32], nu_prime: &[u32]) -> Q {
        let mut word: Vec<i32> = nu.iter().map(|&p| p as i32).collect();
        word.extend(nu_prime.iter().rev().map(|&p| -(p as i32)));
        self.vev(&word)
    }
}

/// Partitions of n as non-increasing part lists, generated independently of the core crate.
pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn go(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for p in (1..=n.min(max)).rev() {
            prefix.push(p);
            go(n - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Exact Gram matrix at level n over [`partitions`].
pub fn exact_gram(delta: Q, c: Q, n: u32) -> (Vec<Vec<u32>>, Vec<Vec<Q>>) {
    let basis = partitions(n);
    let mut ev = WordEvaluator::new(delta, c);
    let g = basis
        .iter()
        .map(|a| basis.iter().map(|b| ev.gram_entry(a, b)).collect())
        .collect();
    (basis, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_two_closed_form() {
        let d = Q::new(3, 4);
        let c = Q::from_integer(28);
        let (basis, g) = exact_gram(d, c, 2);
        assert_eq!(basis, vec![vec![2], vec![1, 1]]);
        let two = Q::from_integer(2);
        let four = Q::from_integer(4);
        assert_eq!(g[0][0], four * d + c / two);
        assert_eq!(g[0][1], Q::from_integer(6) * d);
        assert_eq!(g[1][1], four * d * (two * d + Q::from_integer(1)));
    }

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (0..8).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15]);
    }
}
