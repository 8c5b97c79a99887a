//! Sparse elements of a quantum torus in the symmetric E-basis: a term is a
//! lattice vector v with a coefficient, and products follow
//! E(v)E(w) = s^{omega(v,w)} E(v+w) for the algebra's skew form omega.
//!
//! For the standard algebra on r pairs the lattice is ordered (shift block,
//! multiplication block): T_i = E(e_i), x_i = E(e_{r+i}), and omega is
//! [[0, I], [-I, 0]]. That is the unique ordering under which
//! omega(e_1, e_2) = 1 reproduces T x = q x T.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::rings::{Ring, RingElement};

use super::{QmodError, SymplecticMatrix};

#[derive(Clone)]
pub struct QAlgebra {
    ring: Ring,
    skew: Arc<Vec<Vec<i64>>>,
    q: RingElement,
    s: RingElement,
    s_inv: RingElement,
}

impl PartialEq for QAlgebra {
    fn eq(&self, other: &QAlgebra) -> bool {
        self.ring == other.ring && *self.skew == *other.skew && self.q == other.q && self.s == other.s
    }
}

impl std::fmt::Debug for QAlgebra {
    fn fmt(&self, w: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(w, "QAlgebra(rank {}, q = {}, over {:?})", self.rank(), self.q, self.ring)
    }
}

fn standard_skew(r: usize) -> Vec<Vec<i64>> {
    let n = 2 * r;
    let mut m = vec![vec![0i64; n]; n];
    for i in 0..r {
        m[i][r + i] = 1;
        m[r + i][i] = -1;
    }
    m
}

/// Multiplicative order of a unit, or None past the cap (for the rings
/// here every unit group is tiny).
fn unit_order(e: &RingElement, one: &RingElement) -> Option<u64> {
    let mut pow = e.clone();
    for k in 1..=10_000u64 {
        if pow == *one {
            return Some(k);
        }
        pow = pow.mul(e);
    }
    None
}

fn find_square_root(ring: &Ring, q: &RingElement) -> Option<RingElement> {
    if let Some(ord) = unit_order(q, &ring.one()) {
        if ord % 2 == 1 {
            return Some(q.pow((ord + 1) / 2));
        }
    }
    let d = ring.degree() as u32;
    let m = ring.modulus();
    if m.checked_pow(d).map_or(true, |total| total > 100_000) {
        return None;
    }
    let mut coeffs = vec![0i64; d as usize];
    loop {
        let e = ring.element(&coeffs);
        if e.mul(&e) == *q {
            return Some(e);
        }
        let mut pos = 0;
        loop {
            if pos == coeffs.len() {
                return None;
            }
            coeffs[pos] += 1;
            if coeffs[pos] < m as i64 {
                break;
            }
            coeffs[pos] = 0;
            pos += 1;
        }
    }
}

impl QAlgebra {
    /// The algebra on r shift/multiplication pairs with the standard skew
    /// form, finding a square root of q in the ring.
    pub fn standard(ring: &Ring, r: usize, q: &RingElement) -> Result<QAlgebra, QmodError> {
        let s = find_square_root(ring, q).ok_or(QmodError::MissingSqrtQ)?;
        QAlgebra::general(ring, standard_skew(r), q, &s)
    }

    pub fn standard_with_root(
        ring: &Ring,
        r: usize,
        q: &RingElement,
        s: &RingElement,
    ) -> Result<QAlgebra, QmodError> {
        QAlgebra::general(ring, standard_skew(r), q, s)
    }

    pub fn general(
        ring: &Ring,
        skew: Vec<Vec<i64>>,
        q: &RingElement,
        s: &RingElement,
    ) -> Result<QAlgebra, QmodError> {
        let n = skew.len();
        assert!(n > 0 && skew.iter().all(|row| row.len() == n), "skew form must be square");
        for i in 0..n {
            for j in 0..n {
                assert_eq!(skew[i][j], -skew[j][i], "skew form must be antisymmetric");
            }
        }
        if s.mul(s) != *q {
            return Err(QmodError::MissingSqrtQ);
        }
        let s_inv = s.inv()?;
        Ok(QAlgebra {
            ring: ring.clone(),
            skew: Arc::new(skew),
            q: q.clone(),
            s: s.clone(),
            s_inv,
        })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.skew.len()
    }

    pub fn q(&self) -> &RingElement {
        &self.q
    }

    pub fn sqrt_q(&self) -> &RingElement {
        &self.s
    }

    pub fn is_standard(&self) -> bool {
        self.rank() % 2 == 0 && *self.skew == standard_skew(self.rank() / 2)
    }

    fn omega(&self, v: &[i32], w: &[i32]) -> i64 {
        let mut acc = 0i64;
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0 {
                continue;
            }
            for (j, &wj) in w.iter().enumerate() {
                acc += vi as i64 * self.skew[i][j] * wj as i64;
            }
        }
        acc
    }

    fn s_pow(&self, k: i64) -> RingElement {
        if k >= 0 {
            self.s.pow(k as u64)
        } else {
            self.s_inv.pow((-k) as u64)
        }
    }

    pub fn zero(&self) -> QWeylElement {
        QWeylElement { alg: self.clone(), terms: BTreeMap::new() }
    }

    pub fn one(&self) -> QWeylElement {
        self.e(&vec![0; self.rank()])
    }

    /// The basis element E(v) itself.
    pub fn e(&self, v: &[i32]) -> QWeylElement {
        self.element(v, &self.ring.one())
    }

    pub fn element(&self, v: &[i32], coeff: &RingElement) -> QWeylElement {
        assert_eq!(v.len(), self.rank(), "lattice vector has wrong length");
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(v.to_vec(), coeff.clone());
        }
        QWeylElement { alg: self.clone(), terms }
    }

    /// Shift generator of the i-th pair (standard algebras only).
    pub fn t(&self, i: usize) -> QWeylElement {
        assert!(self.is_standard(), "t(i) needs the standard skew form");
        assert!(i < self.rank() / 2);
        let mut v = vec![0; self.rank()];
        v[i] = 1;
        self.e(&v)
    }

    /// Multiplication generator of the i-th pair (standard algebras only).
    pub fn x(&self, i: usize) -> QWeylElement {
        assert!(self.is_standard(), "x(i) needs the standard skew form");
        let r = self.rank() / 2;
        assert!(i < r);
        let mut v = vec![0; self.rank()];
        v[r + i] = 1;
        self.e(&v)
    }
}

#[derive(Clone, PartialEq)]
pub struct QWeylElement {
    alg: QAlgebra,
    terms: BTreeMap<Vec<i32>, RingElement>,
}

impl std::fmt::Display for QWeylElement {
    fn fmt(&self, w: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(w, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(v, c)| {
                let idx: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                let basis = format!("E({})", idx.join(","));
                if c.is_one() {
                    basis
                } else {
                    format!("({})*{}", c, basis)
                }
            })
            .collect();
        write!(w, "{}", parts.join(" + "))
    }
}

impl std::fmt::Debug for QWeylElement {
    fn fmt(&self, w: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(w, "{}", self)
    }
}

impl QWeylElement {
    pub fn algebra(&self) -> &QAlgebra {
        &self.alg
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &RingElement)> {
        self.terms.iter()
    }

    fn compatible(&self, rhs: &QWeylElement) -> Result<(), QmodError> {
        if self.alg != rhs.alg {
            return Err(QmodError::LatticeMismatch);
        }
        Ok(())
    }

    fn add_term(&mut self, v: Vec<i32>, c: RingElement) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(v) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                let sum = slot.get().add(&c);
                if sum.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, rhs: &QWeylElement) -> Result<QWeylElement, QmodError> {
        self.compatible(rhs)?;
        let mut out = self.clone();
        for (v, c) in &rhs.terms {
            out.add_term(v.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> QWeylElement {
        let terms = self.terms.iter().map(|(v, c)| (v.clone(), c.neg())).collect();
        QWeylElement { alg: self.alg.clone(), terms }
    }

    pub fn sub(&self, rhs: &QWeylElement) -> Result<QWeylElement, QmodError> {
        self.add(&rhs.neg())
    }

    pub fn scalar_mul(&self, c: &RingElement) -> QWeylElement {
        let mut out = self.alg.zero();
        for (v, a) in &self.terms {
            out.add_term(v.clone(), a.mul(c));
        }
        out
    }

    pub fn mul(&self, rhs: &QWeylElement) -> Result<QWeylElement, QmodError> {
        self.compatible(rhs)?;
        let mut out = self.alg.zero();
        for (v, a) in &self.terms {
            for (w, b) in &rhs.terms {
                let scale = self.alg.s_pow(self.alg.omega(v, w));
                let sum: Vec<i32> = v.iter().zip(w).map(|(x, y)| x + y).collect();
                out.add_term(sum, a.mul(b).mul(&scale));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u64) -> Result<QWeylElement, QmodError> {
        let mut acc = self.alg.one();
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn commutator(&self, rhs: &QWeylElement) -> Result<QWeylElement, QmodError> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }
}

/// The lattice automorphism E(v) -> E(gv). Symplectic g preserve the
/// standard skew form, so this extends to an algebra automorphism.
pub fn sp_twist(g: &SymplecticMatrix, d: &QWeylElement) -> Result<QWeylElement, QmodError> {
    if g.size() != d.alg.rank() || !d.alg.is_standard() {
        return Err(QmodError::LatticeMismatch);
    }
    let mut out = d.alg.zero();
    for (v, c) in &d.terms {
        let vi: Vec<i64> = v.iter().map(|&e| e as i64).collect();
        let image: Vec<i32> = g
            .apply(&vi)
            .into_iter()
            .map(|e| i32::try_from(e).expect("twisted exponent fits i32"))
            .collect();
        out.add_term(image, c.clone());
    }
    Ok(out)
}
