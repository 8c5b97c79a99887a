//! Splitting a skew integer form on Z^s into its kernel and a complement
//! on which it is nondegenerate, then rescaling a rational symplectic
//! basis of the complement to integer exponent vectors. The resulting
//! monomials generate a subtorus on which the commutation pairing is
//! d^2 times the standard one.

use num::{BigInt, BigRational, Integer, One, Zero};

/// Outcome of one pairing comparison between two of the Y monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutationCheck {
    pub i: usize,
    pub j: usize,
    pub exponent: i64,
    pub expected: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsogenyDecomposition {
    /// Basis of the kernel sublattice of the form.
    pub kernel: Vec<Vec<i64>>,
    /// Basis of a complementary sublattice; together with the kernel it
    /// spans Z^s (the change of basis is unimodular).
    pub complement: Vec<Vec<i64>>,
    /// Rank of the form, always even.
    pub two_r: usize,
    /// Common denominator clearing the rational symplectic basis.
    pub d: i64,
    /// Exponent vectors of the Y monomials, d times the symplectic basis.
    pub y_exponents: Vec<Vec<i64>>,
    pub commutation: Vec<CommutationCheck>,
    pub all_pass: bool,
}

/// Smith normal form with transforms: returns (u, s, v) with u a v = s,
/// u and v unimodular and s diagonal with a divisibility chain.
pub fn smith_form(a: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut s: Vec<Vec<i64>> = a.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);

    let steps = rows.min(cols);
    for t in 0..steps {
        loop {
            let Some((pi, pj)) = pivot(&s, t) else {
                break;
            };
            swap_rows(&mut s, &mut u, t, pi);
            swap_cols(&mut s, &mut v, t, pj);
            let mut clean = true;
            for r in t + 1..rows {
                if s[r][t] != 0 {
                    let q = div_round(s[r][t], s[t][t]);
                    row_op(&mut s, &mut u, r, t, -q);
                    clean &= s[r][t] == 0;
                }
            }
            for c in t + 1..cols {
                if s[t][c] != 0 {
                    let q = div_round(s[t][c], s[t][t]);
                    col_op(&mut s, &mut v, c, t, -q);
                    clean &= s[t][c] == 0;
                }
            }
            if clean {
                // The pivot must also divide the rest of the block for the
                // chain condition; fold a bad row in and retry.
                let bad = (t + 1..rows).find(|&r| {
                    (t + 1..cols).any(|c| s[r][c] % s[t][t] != 0)
                });
                match bad {
                    Some(r) => row_op(&mut s, &mut u, t, r, 1),
                    None => break,
                }
            }
        }
        if s[t][t] < 0 {
            for c in 0..cols {
                s[t][c] = -s[t][c];
            }
            for c in 0..rows {
                u[t][c] = -u[t][c];
            }
        }
    }
    (u, s, v)
}

fn identity(n: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

fn pivot(s: &[Vec<i64>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..s.len() {
        for j in t..s[i].len() {
            if s[i][j] != 0
                && best.map_or(true, |(bi, bj)| s[i][j].abs() < s[bi][bj].abs())
            {
                best = Some((i, j));
            }
        }
    }
    best
}

fn div_round(a: i64, b: i64) -> i64 {
    // Quotient minimizing |a - q b|.
    let q = a / b;
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + r.signum() * b.signum()
    } else {
        q
    }
}

fn swap_rows(s: &mut [Vec<i64>], u: &mut [Vec<i64>], a: usize, b: usize) {
    if a != b {
        s.swap(a, b);
        u.swap(a, b);
    }
}

fn swap_cols(s: &mut [Vec<i64>], v: &mut [Vec<i64>], a: usize, b: usize) {
    if a != b {
        for row in s.iter_mut() {
            row.swap(a, b);
        }
        for row in v.iter_mut() {
            row.swap(a, b);
        }
    }
}

/// row a += f * row b, mirrored into u.
fn row_op(s: &mut [Vec<i64>], u: &mut [Vec<i64>], a: usize, b: usize, f: i64) {
    for c in 0..s[a].len() {
        s[a][c] += f * s[b][c];
    }
    for c in 0..u[a].len() {
        u[a][c] += f * u[b][c];
    }
}

/// col a += f * col b, mirrored into v.
fn col_op(s: &mut [Vec<i64>], v: &mut [Vec<i64>], a: usize, b: usize, f: i64) {
    for row in s.iter_mut() {
        row[a] += f * row[b];
    }
    for row in v.iter_mut() {
        row[a] += f * row[b];
    }
}

fn pairing(lambda: &[Vec<i64>], x: &[BigRational], y: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            if lambda[i][j] != 0 {
                acc += xi * yj * BigRational::from(BigInt::from(lambda[i][j]));
            }
        }
    }
    acc
}

fn pairing_int(lambda: &[Vec<i64>], x: &[i64], y: &[i64]) -> i64 {
    let mut acc = 0i64;
    for (i, &xi) in x.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            acc += xi * lambda[i][j] * yj;
        }
    }
    acc
}

/// Splits Z^s under a skew integer form: kernel and complement from the
/// Smith form, then a symplectic basis of the complement over Q, cleared
/// to integer exponent vectors by the common denominator d. Every pair of
/// the resulting monomials is checked against d^2 times the standard
/// pairing.
pub fn isogeny_decomposition(lambda: &[Vec<i64>]) -> IsogenyDecomposition {
    let s = lambda.len();
    assert!(lambda.iter().all(|row| row.len() == s), "form must be square");
    for i in 0..s {
        for j in 0..s {
            assert_eq!(lambda[i][j], -lambda[j][i], "form must be skew");
        }
    }

    let (_, snf, v) = smith_form(lambda);
    let mut kernel = Vec::new();
    let mut complement = Vec::new();
    for j in 0..s {
        let col: Vec<i64> = (0..s).map(|i| v[i][j]).collect();
        if snf[j][j] == 0 {
            kernel.push(col);
        } else {
            complement.push(col);
        }
    }
    // Order both bases by leading coordinate; permuting basis vectors
    // keeps the spanned lattices.
    let leading = |v: &Vec<i64>| (v.iter().position(|&x| x != 0), v.clone());
    kernel.sort_by_key(leading);
    complement.sort_by_key(leading);
    let two_r = complement.len();
    assert_eq!(two_r % 2, 0, "skew forms have even rank");

    // Symplectic reduction of the restricted form over Q. Vectors live in
    // the ambient lattice coordinates.
    let mut pool: Vec<Vec<BigRational>> = complement
        .iter()
        .map(|col| col.iter().map(|&x| BigRational::from(BigInt::from(x))).collect())
        .collect();
    let mut left = Vec::new();
    let mut right = Vec::new();
    while !pool.is_empty() {
        let u = pool.remove(0);
        let partner = (0..pool.len())
            .find(|&j| !pairing(lambda, &u, &pool[j]).is_zero())
            .expect("the form is nondegenerate on the complement");
        let w0 = pool.remove(partner);
        let scale = pairing(lambda, &u, &w0).recip();
        let w: Vec<BigRational> = w0.iter().map(|c| c * &scale).collect();
        for v in pool.iter_mut() {
            let a = pairing(lambda, v, &w);
            let b = pairing(lambda, v, &u);
            for (slot, (ui, wi)) in v.iter_mut().zip(u.iter().zip(&w)) {
                *slot = &*slot - &a * ui + &b * wi;
            }
        }
        left.push(u);
        right.push(w);
    }
    let basis: Vec<Vec<BigRational>> = left.into_iter().chain(right).collect();

    let mut d = BigInt::one();
    for v in &basis {
        for c in v {
            d = d.lcm(c.denom());
        }
    }
    let y_exponents: Vec<Vec<i64>> = basis
        .iter()
        .map(|v| {
            v.iter()
                .map(|c| {
                    let cleared = c * BigRational::from(d.clone());
                    assert!(cleared.is_integer());
                    i64::try_from(cleared.to_integer()).expect("exponent fits i64")
                })
                .collect()
        })
        .collect();
    let d = i64::try_from(d).expect("denominator fits i64");

    let r = two_r / 2;
    let mut commutation = Vec::new();
    let mut all_pass = true;
    for i in 0..two_r {
        for j in i + 1..two_r {
            let exponent = pairing_int(lambda, &y_exponents[i], &y_exponents[j]);
            let expected = if j == i + r { d * d } else { 0 };
            all_pass &= exponent == expected;
            commutation.push(CommutationCheck { i: i + 1, j: j + 1, exponent, expected });
        }
    }

    IsogenyDecomposition { kernel, complement, two_r, d, y_exponents, commutation, all_pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let n = a.len();
        let m = b[0].len();
        let mut out = vec![vec![0i64; m]; n];
        for i in 0..n {
            for j in 0..m {
                out[i][j] = (0..b.len()).map(|t| a[i][t] * b[t][j]).sum();
            }
        }
        out
    }

    fn det(a: &[Vec<i64>]) -> i64 {
        let n = a.len();
        if n == 1 {
            return a[0][0];
        }
        let mut acc = 0i64;
        for j in 0..n {
            if a[0][j] == 0 {
                continue;
            }
            let minor: Vec<Vec<i64>> = (1..n)
                .map(|i| {
                    (0..n).filter(|&c| c != j).map(|c| a[i][c]).collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            acc += sign * a[0][j] * det(&minor);
        }
        acc
    }

    #[test]
    fn smith_form_diagonalizes_with_unimodular_transforms() {
        let cases = vec![
            vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]],
            vec![vec![0, 1], vec![-1, 0]],
            vec![vec![0, 0], vec![0, 0]],
            vec![vec![3, 6], vec![9, 12]],
        ];
        for a in cases {
            let (u, s, v) = smith_form(&a);
            assert_eq!(matmul(&matmul(&u, &a), &v), s);
            assert_eq!(det(&u).abs(), 1);
            assert_eq!(det(&v).abs(), 1);
            let n = a.len();
            let m = a[0].len();
            for i in 0..n {
                for j in 0..m {
                    if i != j {
                        assert_eq!(s[i][j], 0);
                    }
                }
            }
            for t in 1..n.min(m) {
                if s[t][t] != 0 {
                    assert_ne!(s[t - 1][t - 1], 0);
                    assert_eq!(s[t][t] % s[t - 1][t - 1], 0);
                }
            }
        }
    }

    #[test]
    fn unit_form_needs_no_denominator() {
        let out = isogeny_decomposition(&[vec![0, 1], vec![-1, 0]]);
        assert!(out.kernel.is_empty());
        assert_eq!(out.two_r, 2);
        assert_eq!(out.d, 1);
        assert_eq!(out.y_exponents, vec![vec![1, 0], vec![0, 1]]);
        assert!(out.all_pass);
        // Pairing of the two Y monomials is d^2 = 1.
        assert_eq!(out.commutation, vec![CommutationCheck { i: 1, j: 2, exponent: 1, expected: 1 }]);
    }

    #[test]
    fn doubled_form_scales_the_exponents() {
        let out = isogeny_decomposition(&[vec![0, 2], vec![-2, 0]]);
        assert!(out.kernel.is_empty());
        assert_eq!(out.d, 2);
        assert_eq!(out.two_r, 2);
        // Y_1 = X_1^2 and Y_2 = X_2, which q^4-commute.
        assert_eq!(out.y_exponents, vec![vec![2, 0], vec![0, 1]]);
        assert_eq!(out.commutation.len(), 1);
        assert_eq!(out.commutation[0].exponent, 4);
        assert!(out.all_pass);
    }

    #[test]
    fn zero_form_is_all_kernel() {
        let out = isogeny_decomposition(&[vec![0; 3], vec![0; 3], vec![0; 3]]);
        assert_eq!(out.kernel.len(), 3);
        assert_eq!(out.two_r, 0);
        assert_eq!(out.d, 1);
        assert!(out.y_exponents.is_empty());
        assert!(out.all_pass);
    }

    fn random_skew(rng: &mut ChaCha8Rng, s: usize) -> Vec<Vec<i64>> {
        let mut a = vec![vec![0i64; s]; s];
        for i in 0..s {
            for j in i + 1..s {
                a[i][j] = rng.gen_range(-4..=4);
                a[j][i] = -a[i][j];
            }
        }
        a
    }

    #[test]
    fn random_forms_split_into_kernel_and_standard_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let mut seen_rank_two = 0;
        while seen_rank_two < 20 {
            let s = rng.gen_range(2..=4);
            let lambda = random_skew(&mut rng, s);
            let out = isogeny_decomposition(&lambda);
            assert!(out.all_pass);
            assert_eq!(out.kernel.len() + out.two_r, s);
            // Kernel columns really annihilate the form.
            for v in &out.kernel {
                for j in 0..s {
                    assert_eq!((0..s).map(|i| v[i] * lambda[i][j]).sum::<i64>(), 0);
                }
            }
            // Kernel and complement assemble to a unimodular matrix, so
            // they span Z^s together.
            let mut change: Vec<Vec<i64>> = vec![vec![0; s]; s];
            for (c, col) in out.kernel.iter().chain(&out.complement).enumerate() {
                for (r, &x) in col.iter().enumerate() {
                    change[r][c] = x;
                }
            }
            assert_eq!(det(&change).abs(), 1);
            if out.two_r == 2 {
                seen_rank_two += 1;
            }
        }
    }
}
