//! Square matrices over any of the exact coefficient types, with the
//! Berkowitz characteristic polynomial (division-free, so valid over
//! non-field rings) and Bareiss fraction-free rank.

use super::{LaurentPoly, PolyError, RatFunc};
use crate::rings::RingElement;

/// Commutative ring element usable as a matrix entry. `zero_of`/`one_of`
/// take a witness because our values carry their ring.
pub trait Entry: Clone + PartialEq {
    fn zero_of(&self) -> Self;
    fn one_of(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Entry for RingElement {
    fn zero_of(&self) -> Self {
        self.ring().zero()
    }
    fn one_of(&self) -> Self {
        self.ring().one()
    }
    fn add(&self, other: &Self) -> Self {
        RingElement::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        RingElement::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        RingElement::mul(self, other)
    }
    fn neg(&self) -> Self {
        RingElement::neg(self)
    }
    fn is_zero(&self) -> bool {
        RingElement::is_zero(self)
    }
}

impl Entry for LaurentPoly {
    fn zero_of(&self) -> Self {
        LaurentPoly::zero(self.ring(), self.vars())
    }
    fn one_of(&self) -> Self {
        LaurentPoly::one(self.ring(), self.vars())
    }
    fn add(&self, other: &Self) -> Self {
        LaurentPoly::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        LaurentPoly::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        LaurentPoly::mul(self, other)
    }
    fn neg(&self) -> Self {
        LaurentPoly::neg(self)
    }
    fn is_zero(&self) -> bool {
        LaurentPoly::is_zero(self)
    }
}

#[derive(Clone, PartialEq)]
pub struct Matrix<T: Entry> {
    n: usize,
    data: Vec<T>,
}

impl<T: Entry + std::fmt::Display> std::fmt::Debug for Matrix<T> {
    fn fmt(&self, w: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(w, "[")?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.at(i, j).to_string()).collect();
            writeln!(w, "  [{}]", row.join(", "))?;
        }
        write!(w, "]")
    }
}

impl<T: Entry> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Matrix<T>, PolyError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PolyError::SizeMismatch);
        }
        Ok(Matrix { n, data: rows.into_iter().flatten().collect() })
    }

    pub fn zero(n: usize, witness: &T) -> Matrix<T> {
        Matrix { n, data: vec![witness.zero_of(); n * n] }
    }

    pub fn identity(n: usize, witness: &T) -> Matrix<T> {
        let mut m = Matrix::zero(n, witness);
        for i in 0..n {
            *m.at_mut(i, i) = witness.one_of();
        }
        m
    }

    pub fn scalar(n: usize, value: &T) -> Matrix<T> {
        let mut m = Matrix::zero(n, value);
        for i in 0..n {
            *m.at_mut(i, i) = value.clone();
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.n + j]
    }

    pub fn witness(&self) -> &T {
        &self.data[0]
    }

    pub fn map<U: Entry, F: Fn(&T) -> U>(&self, f: F) -> Matrix<U> {
        Matrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<U: Entry, E, F: Fn(&T) -> Result<U, E>>(&self, f: F) -> Result<Matrix<U>, E> {
        let data: Result<Vec<U>, E> = self.data.iter().map(f).collect();
        Ok(Matrix { n: self.n, data: data? })
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.at(i, j).clone()).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn check_size(&self, other: &Matrix<T>) -> Result<(), PolyError> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(PolyError::SizeMismatch)
        }
    }

    pub fn add(&self, other: &Matrix<T>) -> Matrix<T> {
        self.check_size(other).expect("size mismatch in add");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix<T>) -> Matrix<T> {
        self.check_size(other).expect("size mismatch in sub");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn neg(&self) -> Matrix<T> {
        Matrix { n: self.n, data: self.data.iter().map(|a| a.neg()).collect() }
    }

    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        self.check_size(other).expect("size mismatch in mul");
        let n = self.n;
        let z = self.data[0].zero_of();
        let mut out = Matrix { n, data: vec![z; n * n] };
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let t = out.at(i, j).add(&a.mul(b));
                    *out.at_mut(i, j) = t;
                }
            }
        }
        out
    }

    pub fn scalar_mul(&self, c: &T) -> Matrix<T> {
        Matrix { n: self.n, data: self.data.iter().map(|a| a.mul(c)).collect() }
    }

    pub fn pow(&self, e: u64) -> Matrix<T> {
        let mut acc = Matrix::identity(self.n, &self.data[0]);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn transpose(&self) -> Matrix<T> {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.at(j, i).clone());
            }
        }
        Matrix { n, data }
    }

    pub fn trace(&self) -> T {
        let mut acc = self.data[0].zero_of();
        for i in 0..self.n {
            acc = acc.add(self.at(i, i));
        }
        acc
    }

    /// Coefficients of `det(lambda I - M)` by the Berkowitz method,
    /// descending in lambda: `[1, c_1, ..., c_n]`. No divisions, so exact
    /// over any commutative coefficient ring.
    pub fn charpoly(&self) -> Vec<T> {
        let n = self.n;
        let one = self.data[0].one_of();
        let zero = self.data[0].zero_of();
        let mut coeffs: Vec<T> = vec![one.clone()];
        for i in (0..n).rev() {
            let k = n - i;
            let mut t: Vec<T> = vec![zero.clone(); k + 1];
            t[0] = one.clone();
            t[1] = self.at(i, i).neg();
            if k >= 2 {
                let r: Vec<T> = (i + 1..n).map(|j| self.at(i, j).clone()).collect();
                let mut v: Vec<T> = (i + 1..n).map(|j| self.at(j, i).clone()).collect();
                for idx in 2..=k {
                    let mut dot = zero.clone();
                    for (a, b) in r.iter().zip(&v) {
                        dot = dot.add(&a.mul(b));
                    }
                    t[idx] = dot.neg();
                    if idx < k {
                        // v <- M_sub v
                        let mut nv = vec![zero.clone(); v.len()];
                        for (a, slot) in nv.iter_mut().enumerate() {
                            let mut acc = zero.clone();
                            for (b, vb) in v.iter().enumerate() {
                                acc = acc.add(&self.at(i + 1 + a, i + 1 + b).mul(vb));
                            }
                            *slot = acc;
                        }
                        v = nv;
                    }
                }
            }
            let mut next = vec![zero.clone(); coeffs.len() + 1];
            for (j, slot) in next.iter_mut().enumerate() {
                let mut acc = zero.clone();
                for (l, tl) in t.iter().enumerate() {
                    if l <= j && j - l < coeffs.len() {
                        acc = acc.add(&tl.mul(&coeffs[j - l]));
                    }
                }
                *slot = acc;
            }
            coeffs = next;
        }
        coeffs
    }

    /// Determinant through the characteristic polynomial:
    /// `det M = (-1)^n c_n`.
    pub fn det(&self) -> T {
        let chi = self.charpoly();
        let last = chi.into_iter().last().unwrap();
        if self.n % 2 == 1 {
            last.neg()
        } else {
            last
        }
    }
}

impl Matrix<LaurentPoly> {
    /// Rank by Bareiss fraction-free elimination. Coefficients must form a
    /// field (every exact division is by an earlier pivot).
    pub fn rank_bareiss(&self) -> Result<usize, PolyError> {
        rank_bareiss_rows(self.rows())
    }
}

/// Bareiss rank of a rectangular row list.
pub fn rank_bareiss_rows(mut m: Vec<Vec<LaurentPoly>>) -> Result<usize, PolyError> {
    let nrows = m.len();
    let ncols = m.first().map_or(0, |r| r.len());
    if m.iter().any(|r| r.len() != ncols) {
        return Err(PolyError::SizeMismatch);
    }
    let mut prev: Option<LaurentPoly> = None;
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(pr) = (rank..nrows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let pivot = m[rank][col].clone();
        for i in rank + 1..nrows {
            for j in col + 1..ncols {
                let num = pivot.mul(&m[i][j]).sub(&m[i][col].mul(&m[rank][j]));
                m[i][j] = match &prev {
                    None => num,
                    Some(d) => num
                        .try_div_exact(d)?
                        .expect("Bareiss cross-product always divisible by prior pivot"),
                };
            }
            m[i][col] = pivot.zero_of();
        }
        prev = Some(pivot);
        rank += 1;
    }
    Ok(rank)
}

impl Matrix<RatFunc> {
    /// Same-rank polynomial matrix: scale each row by the product of its
    /// denominators (nonzero over a field, so rank is preserved).
    pub fn clear_denominators(&self) -> Matrix<LaurentPoly> {
        let n = self.n;
        let mut rows: Vec<Vec<LaurentPoly>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut prod = self.at(i, 0).den().one_of();
            for j in 0..n {
                prod = prod.mul(self.at(i, j).den());
            }
            let row: Vec<LaurentPoly> = (0..n)
                .map(|j| {
                    let e = self.at(i, j);
                    let cofactor = prod
                        .try_div_exact(e.den())
                        .expect("denominator divides row product")
                        .expect("denominator divides row product");
                    e.num().mul(&cofactor)
                })
                .collect();
            rows.push(row);
        }
        Matrix::from_rows(rows).unwrap()
    }
}
