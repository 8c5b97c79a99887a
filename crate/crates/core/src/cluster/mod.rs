//! Seed-matrix mutation calculus: extended exchange matrices with a fixed
//! skew-symmetrizer, compatible skew forms and their conjugation under
//! mutation, exchange charts over Q, and the decomposition of a skew
//! integer form into kernel plus a symplectically standard part.

use thiserror::Error;

pub mod charts;
pub mod isogeny;

pub use charts::{exchange_mutation, ClusterChart, QLaurent, QRat};
pub use isogeny::{isogeny_decomposition, CommutationCheck, IsogenyDecomposition};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ClusterError {
    #[error("index {0} is frozen or out of range")]
    FrozenIndex(usize),
    #[error("matrix shapes do not match")]
    ShapeMismatch,
    #[error("no positive diagonal makes the exchange matrix skew-symmetric")]
    NotSkewSymmetrizable,
    #[error("form and exchange matrix are not compatible")]
    NotCompatible,
}

/// An m x n extended exchange matrix whose top n x n block B satisfies
/// d_i b_ij = -d_j b_ji for the carried positive diagonal. Rows past n
/// belong to frozen directions and are unconstrained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seed {
    m: usize,
    n: usize,
    b: Vec<Vec<i64>>,
    d: Vec<i64>,
}

impl Seed {
    pub fn new(b: Vec<Vec<i64>>, d: Vec<i64>) -> Result<Seed, ClusterError> {
        let m = b.len();
        let n = d.len();
        if m == 0 || n == 0 || n > m || b.iter().any(|row| row.len() != n) {
            return Err(ClusterError::ShapeMismatch);
        }
        if d.iter().any(|&x| x <= 0) {
            return Err(ClusterError::NotSkewSymmetrizable);
        }
        for i in 0..n {
            for j in 0..n {
                if d[i] * b[i][j] != -d[j] * b[j][i] {
                    return Err(ClusterError::NotSkewSymmetrizable);
                }
            }
        }
        Ok(Seed { m, n, b, d })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.b
    }

    pub fn symmetrizer(&self) -> &[i64] {
        &self.d
    }

    pub fn at(&self, i: usize, j: usize) -> i64 {
        self.b[i][j]
    }

    /// Matrix mutation in direction k (1-based): negate row and column k,
    /// push `(|b_ik| b_kj + b_ik |b_kj|) / 2` onto everything else. The
    /// carried symmetrizer is re-validated, never recomputed.
    pub fn mutate(&self, k: usize) -> Result<Seed, ClusterError> {
        if k == 0 || k > self.n {
            return Err(ClusterError::FrozenIndex(k));
        }
        let k = k - 1;
        let mut out = self.b.clone();
        for i in 0..self.m {
            for j in 0..self.n {
                out[i][j] = if i == k || j == k {
                    -self.b[i][j]
                } else {
                    self.b[i][j]
                        + (self.b[i][k].abs() * self.b[k][j]
                            + self.b[i][k] * self.b[k][j].abs())
                            / 2
                };
            }
        }
        Seed::new(out, self.d.clone())
    }
}

/// Outcome of testing `B^T Lambda = (D | 0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compatibility {
    pub compatible: bool,
    pub d: Option<Vec<i64>>,
}

/// Multiplies out `B^T Lambda` and accepts iff the left block is a
/// positive integer diagonal and the right block vanishes.
pub fn check_compatible(
    lambda: &[Vec<i64>],
    b: &[Vec<i64>],
) -> Result<Compatibility, ClusterError> {
    let m = lambda.len();
    if m == 0 || lambda.iter().any(|row| row.len() != m) || b.len() != m {
        return Err(ClusterError::ShapeMismatch);
    }
    let n = b[0].len();
    if n == 0 || n > m || b.iter().any(|row| row.len() != n) {
        return Err(ClusterError::ShapeMismatch);
    }
    let mut d = vec![0i64; n];
    for i in 0..n {
        for j in 0..m {
            let entry: i64 = (0..m).map(|t| b[t][i] * lambda[t][j]).sum();
            if i == j {
                if entry <= 0 {
                    return Ok(Compatibility { compatible: false, d: None });
                }
                d[i] = entry;
            } else if entry != 0 {
                return Ok(Compatibility { compatible: false, d: None });
            }
        }
    }
    Ok(Compatibility { compatible: true, d: Some(d) })
}

/// A skew form on Z^m compatible with a seed: `B^T Lambda = (D | 0)` with
/// the same positive diagonal throughout mutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatiblePair {
    lambda: Vec<Vec<i64>>,
    seed: Seed,
    d: Vec<i64>,
}

impl CompatiblePair {
    pub fn new(lambda: Vec<Vec<i64>>, seed: Seed) -> Result<CompatiblePair, ClusterError> {
        let m = seed.m();
        if lambda.len() != m || lambda.iter().any(|row| row.len() != m) {
            return Err(ClusterError::ShapeMismatch);
        }
        for i in 0..m {
            for j in 0..m {
                if lambda[i][j] != -lambda[j][i] {
                    return Err(ClusterError::NotCompatible);
                }
            }
        }
        let comp = check_compatible(&lambda, seed.matrix())?;
        let d = match (comp.compatible, comp.d) {
            (true, Some(d)) => d,
            _ => return Err(ClusterError::NotCompatible),
        };
        if rational_rank(seed.matrix()) != seed.n() {
            return Err(ClusterError::NotCompatible);
        }
        Ok(CompatiblePair { lambda, seed, d })
    }

    pub fn lambda(&self) -> &[Vec<i64>] {
        &self.lambda
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    pub fn d(&self) -> &[i64] {
        &self.d
    }

    /// Mutation of the pair: the form transports by `E_k^T Lambda E_k`
    /// where E_k is the identity with column k replaced by
    /// `(max(0, b_ik))_i` and -1 on the diagonal; the seed mutates by the
    /// matrix rule. Compatibility with the identical D is re-checked.
    pub fn mutate(&self, k: usize) -> Result<CompatiblePair, ClusterError> {
        if k == 0 || k > self.seed.n() {
            return Err(ClusterError::FrozenIndex(k));
        }
        let m = self.seed.m();
        let kk = k - 1;
        let mut e = vec![vec![0i64; m]; m];
        for (i, row) in e.iter_mut().enumerate() {
            row[i] = 1;
        }
        for i in 0..m {
            e[i][kk] = if i == kk { -1 } else { self.seed.at(i, kk).max(0) };
        }
        let mut lambda = vec![vec![0i64; m]; m];
        for (i, row) in lambda.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let mut acc = 0i64;
                for s in 0..m {
                    for t in 0..m {
                        acc += e[s][i] * self.lambda[s][t] * e[t][j];
                    }
                }
                *slot = acc;
            }
        }
        let pair = CompatiblePair::new(lambda, self.seed.mutate(k)?)?;
        assert_eq!(pair.d, self.d, "mutation must preserve the diagonal of the pairing");
        Ok(pair)
    }
}

/// Rank over Q by fraction-free elimination; the matrices here are tiny.
fn rational_rank(a: &[Vec<i64>]) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut w: Vec<Vec<i128>> =
        a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| w[r][col] != 0) else {
            continue;
        };
        w.swap(rank, pivot);
        for r in rank + 1..rows {
            if w[r][col] != 0 {
                let (p, q) = (w[rank][col], w[r][col]);
                for c in 0..cols {
                    w[r][c] = w[r][c] * p - w[rank][c] * q;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}
