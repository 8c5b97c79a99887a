//! Integer symplectic matrices and the word search that separates the last
//! coordinates of a finite set of lattice vectors.

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::QmodError;

/// A 2s x 2s integer matrix g with g^T J g = J, where J is the block form
/// [[0, I], [-I, 0]].
#[derive(Clone, PartialEq, Eq)]
pub struct SymplecticMatrix {
    g: Vec<Vec<i64>>,
}

impl std::fmt::Debug for SymplecticMatrix {
    fn fmt(&self, w: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows: Vec<String> = self
            .g
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|c| c.to_string()).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(w, "[{}]", rows.join(", "))
    }
}

impl SymplecticMatrix {
    pub fn new(g: Vec<Vec<i64>>) -> Result<SymplecticMatrix, QmodError> {
        let n = g.len();
        if n == 0 || n % 2 != 0 || g.iter().any(|row| row.len() != n) {
            return Err(QmodError::NotSymplectic);
        }
        let s = n / 2;
        for i in 0..n {
            for j in 0..n {
                // (g^T J g)[i][j] with the block J above.
                let mut acc = 0i64;
                for k in 0..s {
                    acc += g[k][i] * g[k + s][j] - g[k + s][i] * g[k][j];
                }
                let expect = if i < s && j == i + s {
                    1
                } else if i >= s && j == i - s {
                    -1
                } else {
                    0
                };
                if acc != expect {
                    return Err(QmodError::NotSymplectic);
                }
            }
        }
        Ok(SymplecticMatrix { g })
    }

    pub fn identity(size: usize) -> SymplecticMatrix {
        assert!(size > 0 && size % 2 == 0);
        let mut g = vec![vec![0i64; size]; size];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = 1;
        }
        SymplecticMatrix { g }
    }

    pub fn size(&self) -> usize {
        self.g.len()
    }

    pub fn at(&self, i: usize, j: usize) -> i64 {
        self.g[i][j]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.g
    }

    pub fn mul(&self, rhs: &SymplecticMatrix) -> SymplecticMatrix {
        let n = self.size();
        assert_eq!(n, rhs.size());
        let mut g = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = (0..n).map(|k| self.g[i][k] * rhs.g[k][j]).sum();
            }
        }
        SymplecticMatrix { g }
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.size());
        self.g.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Search alphabet, in the order words are tried: per-pair rotations, then
/// positive and negative one-pair shears, then symmetric cross shears, then
/// pair swaps.
fn generator_set(s: usize) -> Vec<SymplecticMatrix> {
    let n = 2 * s;
    let id = || {
        let mut g = vec![vec![0i64; n]; n];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = 1;
        }
        g
    };
    let mut gens: Vec<Vec<Vec<i64>>> = Vec::new();
    for i in 0..s {
        let mut g = id();
        g[i][i] = 0;
        g[i][s + i] = -1;
        g[s + i][i] = 1;
        g[s + i][s + i] = 0;
        gens.push(g);
    }
    for sign in [1i64, -1] {
        for i in 0..s {
            let mut g = id();
            g[s + i][i] = sign;
            gens.push(g);
        }
        for i in 0..s {
            let mut g = id();
            g[i][s + i] = sign;
            gens.push(g);
        }
    }
    for sign in [1i64, -1] {
        for i in 0..s {
            for j in i + 1..s {
                let mut g = id();
                g[s + i][j] = sign;
                g[s + j][i] = sign;
                gens.push(g);
                let mut g = id();
                g[i][s + j] = sign;
                g[j][s + i] = sign;
                gens.push(g);
            }
        }
    }
    for i in 0..s {
        for j in i + 1..s {
            let mut g = id();
            g[i][i] = 0;
            g[j][j] = 0;
            g[i][j] = 1;
            g[j][i] = 1;
            g[s + i][s + i] = 0;
            g[s + j][s + j] = 0;
            g[s + i][s + j] = 1;
            g[s + j][s + i] = 1;
            gens.push(g);
        }
    }
    gens.into_iter().map(|g| SymplecticMatrix::new(g).expect("alphabet is symplectic")).collect()
}

fn distinct_last_coordinates(g: &SymplecticMatrix, vectors: &[Vec<i64>]) -> bool {
    let mut seen = BTreeSet::new();
    for v in vectors {
        let last = *g.apply(v).last().unwrap();
        if !seen.insert(last) {
            return false;
        }
    }
    true
}

const VISITED_CAP: usize = 200_000;
const RANDOM_BUDGET: usize = 4_000;

/// Breadth-first search over words in the alphabet, shortest word first and
/// alphabet order within a length, so the result is the lexicographically
/// smallest success. Past `depth` (or the visited cap) a seeded random walk
/// takes over.
pub fn bernstein_step(
    monomials: &[Vec<i64>],
    depth: usize,
    seed: u64,
) -> Result<SymplecticMatrix, QmodError> {
    assert!(!monomials.is_empty(), "need at least one monomial");
    let n = monomials[0].len();
    assert!(n >= 2 && n % 2 == 0, "lattice dimension must be even");
    assert!(monomials.iter().all(|v| v.len() == n));
    let vectors: Vec<Vec<i64>> = monomials.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();

    let gens = generator_set(n / 2);
    let mut queue = VecDeque::new();
    let mut visited = BTreeSet::new();
    let start = SymplecticMatrix::identity(n);
    visited.insert(start.g.clone());
    queue.push_back((start, 0usize));
    while let Some((g, len)) = queue.pop_front() {
        if distinct_last_coordinates(&g, &vectors) {
            return Ok(g);
        }
        if len == depth || visited.len() > VISITED_CAP {
            continue;
        }
        for gen in &gens {
            let next = gen.mul(&g);
            if visited.insert(next.g.clone()) {
                queue.push_back((next, len + 1));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_BUDGET {
        let len = rng.gen_range(1..=depth + 4);
        let mut g = SymplecticMatrix::identity(n);
        for _ in 0..len {
            g = gens[rng.gen_range(0..gens.len())].mul(&g);
        }
        if distinct_last_coordinates(&g, &vectors) {
            return Ok(g);
        }
    }
    Err(QmodError::SearchExhausted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_symplectic() {
        assert_eq!(
            SymplecticMatrix::new(vec![vec![1, 1], vec![1, 1]]).unwrap_err(),
            QmodError::NotSymplectic
        );
        assert_eq!(
            SymplecticMatrix::new(vec![vec![2, 0], vec![0, 1]]).unwrap_err(),
            QmodError::NotSymplectic
        );
        SymplecticMatrix::new(vec![vec![0, -1], vec![1, 0]]).unwrap();
    }

    #[test]
    fn four_dimensional_alphabet_is_symplectic() {
        // generator_set already round-trips through the constructor; pin
        // the count: 2 rotations, 8 one-pair shears, 4 cross shears, 1 swap.
        assert_eq!(generator_set(2).len(), 15);
        assert_eq!(generator_set(1).len(), 5);
    }

    #[test]
    fn already_separated_input_returns_identity() {
        let g = bernstein_step(&[vec![1, 0], vec![0, 1]], 8, 0).unwrap();
        assert_eq!(g, SymplecticMatrix::identity(2));
    }

    #[test]
    fn collinear_pair_needs_one_rotation() {
        let g = bernstein_step(&[vec![1, 0], vec![2, 0]], 8, 0).unwrap();
        assert_eq!(g.rows().to_vec(), vec![vec![0, -1], vec![1, 0]]);
        assert_eq!(g.apply(&[1, 0]), vec![0, 1]);
        assert_eq!(g.apply(&[2, 0]), vec![0, 2]);
    }

    #[test]
    fn three_monomials_need_one_shear() {
        let g = bernstein_step(&[vec![1, 0], vec![1, 2], vec![0, 2]], 8, 0).unwrap();
        assert_eq!(g.rows().to_vec(), vec![vec![1, 0], vec![1, 1]]);
        let last: Vec<i64> =
            [[1, 0], [1, 2], [0, 2]].iter().map(|v| g.apply(&v[..])[1]).collect();
        assert_eq!(last, vec![1, 3, 2]);
    }

    #[test]
    fn duplicate_monomials_collapse() {
        let g = bernstein_step(&[vec![3, 1], vec![3, 1]], 8, 0).unwrap();
        assert_eq!(g, SymplecticMatrix::identity(2));
    }
}
