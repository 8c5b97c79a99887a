//! Ideals of `(Z/m)[u]/(f)` as coefficient lattices.
//!
//! An ideal pulled back to `Z[u]/(f, m)` is a sublattice of `Z^d` containing
//! `m Z^d`, so a Hermite normal form of the generator rows (with the `m e_i`
//! rows appended) decides membership and measures the quotient.

use super::RingElement;

/// Row-style upper triangular Hermite basis: `h[i][i] > 0`, entries above a
/// pivot reduced into `[0, h[i][i])`.
#[derive(Clone, Debug)]
pub struct IdealBasis {
    m: u64,
    d: usize,
    h: Vec<Vec<i128>>,
}

impl IdealBasis {
    pub(super) fn new(m: u64, d: usize, mut rows: Vec<Vec<i128>>) -> IdealBasis {
        for i in 0..d {
            let mut r = vec![0i128; d];
            r[i] = m as i128;
            rows.push(r);
        }
        let h = hermite_upper(rows, d);
        IdealBasis { m, d, h }
    }

    pub fn contains(&self, x: &RingElement) -> bool {
        let mut v: Vec<i128> = x.coeffs().iter().map(|&c| c as i128).collect();
        v.resize(self.d, 0);
        self.reduce_vec(&mut v);
        v.iter().all(|&c| c == 0)
    }

    /// Reduce `v` modulo the lattice, leaving the canonical representative
    /// with `v[j]` in `[0, h[j][j])`.
    fn reduce_vec(&self, v: &mut [i128]) {
        for j in (0..self.d).rev() {
            let pivot = self.h[j][j];
            let q = v[j].div_euclid(pivot);
            if q != 0 {
                for k in 0..self.d {
                    v[k] -= q * self.h[j][k];
                }
            }
        }
    }

    pub fn quotient_size(&self) -> u128 {
        self.h.iter().enumerate().map(|(i, r)| r[i] as u128).product()
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.quotient_size() == 1
    }

    /// Canonical representatives of every residue class.
    pub fn transversal(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let total = self.quotient_size();
        let diag: Vec<i128> = (0..self.d).map(|i| self.h[i][i]).collect();
        (0..total).map(move |mut idx| {
            let mut raw = vec![0i128; self.d];
            for j in 0..self.d {
                raw[j] = (idx % diag[j] as u128) as i128;
                idx /= diag[j] as u128;
            }
            // Digits in the diagonal box are not yet canonical; reduce.
            let mut v = raw;
            self.reduce_vec(&mut v);
            v.iter().map(|&c| c.rem_euclid(self.m as i128) as u64).collect()
        })
    }

    /// True when `x` is a unit in the quotient by this ideal: the lattice
    /// spanned by this basis together with `x u^k` rows is everything.
    pub fn is_unit_mod(&self, x: &RingElement) -> bool {
        let ring = x.ring().clone();
        let mut rows = self.h.clone();
        let u = ring.gen_u().ok();
        let mut cur = x.clone();
        for _ in 0..self.d {
            rows.push(cur.coeffs().iter().map(|&c| c as i128).collect());
            match &u {
                Some(u) => cur = cur.mul(u),
                None => break,
            }
        }
        let one = ring.one();
        let h = hermite_upper(rows, self.d);
        let stacked = IdealBasis { m: self.m, d: self.d, h };
        stacked.is_unit_ideal() || {
            let mut v: Vec<i128> = one.coeffs().iter().map(|&c| c as i128).collect();
            stacked.reduce_vec(&mut v);
            v.iter().all(|&c| c == 0)
        }
    }
}

/// Hermite normal form by Euclidean column elimination; rows span the same
/// lattice as the input. Input rows always contain `m e_i`, so the lattice
/// has full rank and each pivot is positive.
fn hermite_upper(mut rows: Vec<Vec<i128>>, d: usize) -> Vec<Vec<i128>> {
    rows.retain(|r| r.iter().any(|&c| c != 0));
    let mut h: Vec<Vec<i128>> = Vec::with_capacity(d);
    for col in 0..d {
        // Gcd all rows with support starting at `col` into one pivot row.
        loop {
            let mut best: Option<usize> = None;
            for (i, r) in rows.iter().enumerate() {
                if r[..col].iter().all(|&c| c == 0) && r[col] != 0 {
                    let better = match best {
                        None => true,
                        Some(b) => r[col].abs() < rows[b][col].abs(),
                    };
                    if better {
                        best = Some(i);
                    }
                }
            }
            let pivot_idx = best.expect("full-rank lattice always yields a pivot");
            let pivot = rows.swap_remove(pivot_idx);
            let mut done = true;
            for r in rows.iter_mut() {
                if r[..col].iter().all(|&c| c == 0) && r[col] != 0 {
                    let q = r[col].div_euclid(pivot[col].abs()) * pivot[col].signum();
                    for k in 0..d {
                        r[k] -= q * pivot[k];
                    }
                    if r[col] != 0 {
                        done = false;
                    }
                }
            }
            rows.push(pivot);
            if done {
                break;
            }
        }
        let idx = rows
            .iter()
            .position(|r| r[..col].iter().all(|&c| c == 0) && r[col] != 0)
            .unwrap();
        let mut pivot = rows.swap_remove(idx);
        if pivot[col] < 0 {
            for c in pivot.iter_mut() {
                *c = -*c;
            }
        }
        h.push(pivot);
        rows.retain(|r| r.iter().any(|&c| c != 0));
    }
    // Reduce entries above each pivot into the canonical range.
    for i in (0..d).rev() {
        for j in (0..i).rev() {
            let q = h[j][i].div_euclid(h[i][i]);
            if q != 0 {
                for k in 0..d {
                    let sub = q * h[i][k];
                    h[j][k] -= sub;
                }
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::super::Ring;

    #[test]
    fn unit_ideal_detected() {
        let z9 = Ring::integer_residue(9).unwrap();
        let s = Ring::monic_quotient(&z9, &[-3, 0, 1]).unwrap();
        let two = s.int(2);
        assert!(s.ideal(&[two]).is_unit_ideal());
        let u1 = s.one().add(&s.gen_u().unwrap());
        assert!(s.ideal(&[u1]).is_unit_ideal(), "1+u is a unit");
    }

    #[test]
    fn maximal_ideal_quotient_size() {
        let z9 = Ring::integer_residue(9).unwrap();
        let s = Ring::monic_quotient(&z9, &[-3, 0, 1]).unwrap();
        let u = s.gen_u().unwrap();
        // (u) contains u^2 = 3, so the quotient is F_3.
        assert_eq!(s.ideal(&[u.clone()]).quotient_size(), 3);
        // (3) leaves u with u^2 = 0: quotient F_3[u]/(u^2) of size 9.
        assert_eq!(s.ideal(&[s.int(3)]).quotient_size(), 9);
        // (u^3) = (3u): x + yu mod (9, 3u) gives 27 classes.
        assert_eq!(s.ideal(&[u.pow(3)]).quotient_size(), 27);
    }

    #[test]
    fn zero_ideal_in_residue_ring() {
        let z8 = Ring::integer_residue(8).unwrap();
        let i = z8.ideal(&[z8.int(2)]);
        assert_eq!(i.quotient_size(), 2);
        assert!(i.contains(&z8.int(6)));
        assert!(!i.contains(&z8.int(3)));
    }

    #[test]
    fn transversal_covers_quotient() {
        let z9 = Ring::integer_residue(9).unwrap();
        let s = Ring::monic_quotient(&z9, &[-3, 0, 1]).unwrap();
        let u = s.gen_u().unwrap();
        let ideal = s.ideal(&[u]);
        let reps: Vec<Vec<u64>> = ideal.transversal().collect();
        assert_eq!(reps.len(), 3);
        let mut seen = std::collections::HashSet::new();
        for r in &reps {
            assert!(seen.insert(r.clone()), "transversal repeats a class");
        }
    }
}
