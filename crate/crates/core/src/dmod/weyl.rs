//! Normal-form arithmetic in the algebra of polynomial differential
//! operators: elements are stored as sums of `c x^a d^b` with every `x` to
//! the left of every `d`, and products are renormalized through
//! `[d_i, x_j] = delta_ij`.
//!
//! The commutation coefficient for one variable is
//! `d^b x^c = sum_k binom(b,k) c(c-1)...(c-k+1) x^(c-k) d^(b-k)`,
//! and variables commute across indices, so the multi-index rule is the
//! product over coordinates. Binomials come from a Pascal table mod m, so
//! nothing here divides.

use std::collections::BTreeMap;
use std::fmt;

use crate::multipoly::{Entry, LaurentPoly, Mono};
use crate::rings::{Ring, RingElement};

#[derive(Clone, PartialEq)]
pub struct WeylElement {
    r: usize,
    ring: Ring,
    /// (exponents of x, exponents of d) -> coefficient; all exponents >= 0.
    terms: BTreeMap<(Mono, Mono), RingElement>,
}

impl WeylElement {
    pub fn zero(ring: &Ring, r: usize) -> WeylElement {
        WeylElement { r, ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn one(ring: &Ring, r: usize) -> WeylElement {
        WeylElement::term(ring, r, Mono::constant(r), Mono::constant(r), &ring.one())
    }

    pub fn term(ring: &Ring, r: usize, xs: Mono, ds: Mono, c: &RingElement) -> WeylElement {
        assert_eq!(xs.0.len(), r);
        assert_eq!(ds.0.len(), r);
        assert!(xs.0.iter().chain(&ds.0).all(|&e| e >= 0));
        let mut w = WeylElement::zero(ring, r);
        w.add_term(xs, ds, c.clone());
        w
    }

    /// The coordinate operator `x_i`.
    pub fn x(ring: &Ring, r: usize, i: usize) -> WeylElement {
        WeylElement::term(ring, r, Mono::var(r, i), Mono::constant(r), &ring.one())
    }

    /// The derivation `d_i`.
    pub fn d(ring: &Ring, r: usize, i: usize) -> WeylElement {
        WeylElement::term(ring, r, Mono::constant(r), Mono::var(r, i), &ring.one())
    }

    /// Embed a polynomial in x as an order-zero operator.
    pub fn from_poly(p: &LaurentPoly) -> WeylElement {
        let r = p.vars().len();
        let mut w = WeylElement::zero(p.ring(), r);
        for (m, c) in p.terms() {
            assert!(m.0.iter().all(|&e| e >= 0), "Laurent exponent in operator");
            w.add_term(m.clone(), Mono::constant(r), c.clone());
        }
        w
    }

    /// The multiplication part, if the element has order zero.
    pub fn as_poly(&self, vars: &std::sync::Arc<crate::multipoly::VarSet>) -> Option<LaurentPoly> {
        let mut p = LaurentPoly::zero(&self.ring, vars);
        for ((xs, ds), c) in &self.terms {
            if !ds.is_constant() {
                return None;
            }
            p = p.add(&LaurentPoly::monomial(&self.ring, vars, xs.clone(), c));
        }
        Some(p)
    }

    fn add_term(&mut self, xs: Mono, ds: Mono, c: RingElement) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((xs, ds)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &WeylElement) -> WeylElement {
        assert_eq!(self.r, other.r);
        assert!(self.ring == other.ring, "ring mismatch");
        let mut out = self.clone();
        for ((xs, ds), c) in &other.terms {
            out.add_term(xs.clone(), ds.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &WeylElement) -> WeylElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> WeylElement {
        let mut out = WeylElement::zero(&self.ring, self.r);
        for ((xs, ds), c) in &self.terms {
            out.terms.insert((xs.clone(), ds.clone()), c.neg());
        }
        out
    }

    pub fn mul(&self, other: &WeylElement) -> WeylElement {
        assert_eq!(self.r, other.r);
        assert!(self.ring == other.ring, "ring mismatch");
        let max_b = self
            .terms
            .keys()
            .flat_map(|(_, b)| b.0.iter().copied())
            .max()
            .unwrap_or(0) as usize;
        let pascal = pascal_mod(max_b + 1, &self.ring);
        let mut out = WeylElement::zero(&self.ring, self.r);
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                // (x^a1 d^b1)(x^a2 d^b2): commute d^b1 past x^a2 one
                // coordinate at a time.
                let coeff0 = c1.mul(c2);
                let mut parts: Vec<(Mono, Mono, RingElement)> =
                    vec![(a1.clone(), b2.clone(), coeff0)];
                for i in 0..self.r {
                    let b = b1.0[i];
                    let c = a2.0[i];
                    let kmax = b.min(c);
                    let mut next = Vec::with_capacity(parts.len() * (kmax as usize + 1));
                    for (xs, ds, coeff) in &parts {
                        for k in 0..=kmax {
                            let w = pascal[b as usize][k as usize]
                                .mul(&falling_mod(&self.ring, c, k));
                            if w.is_zero() {
                                continue;
                            }
                            let mut xs2 = xs.clone();
                            let mut ds2 = ds.clone();
                            xs2.0[i] += c - k;
                            ds2.0[i] += b - k;
                            next.push((xs2, ds2, coeff.mul(&w)));
                        }
                    }
                    parts = next;
                }
                for (xs, ds, coeff) in parts {
                    out.add_term(xs, ds, coeff);
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u64) -> WeylElement {
        let mut acc = WeylElement::one(&self.ring, self.r);
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

    pub fn commutator(&self, other: &WeylElement) -> WeylElement {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn scalar_mul(&self, c: &RingElement) -> WeylElement {
        let mut out = WeylElement::zero(&self.ring, self.r);
        for ((xs, ds), a) in &self.terms {
            out.add_term(xs.clone(), ds.clone(), a.mul(c));
        }
        out
    }
}

impl Entry for WeylElement {
    fn zero_of(&self) -> Self {
        WeylElement::zero(&self.ring, self.r)
    }
    fn one_of(&self) -> Self {
        WeylElement::one(&self.ring, self.r)
    }
    fn add(&self, other: &Self) -> Self {
        WeylElement::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        WeylElement::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        WeylElement::mul(self, other)
    }
    fn neg(&self) -> Self {
        WeylElement::neg(self)
    }
    fn is_zero(&self) -> bool {
        WeylElement::is_zero(self)
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(w, "0");
        }
        let mut first = true;
        for ((xs, ds), c) in &self.terms {
            if !first {
                write!(w, " + ")?;
            }
            first = false;
            let mut factors = Vec::new();
            if !c.is_one() || (xs.is_constant() && ds.is_constant()) {
                factors.push(format!("({c})"));
            }
            for (i, &e) in xs.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{}", i + 1, e)),
                }
            }
            for (i, &e) in ds.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("d{}", i + 1)),
                    _ => factors.push(format!("d{}^{}", i + 1, e)),
                }
            }
            write!(w, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for WeylElement {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(w, "{}", self)
    }
}

/// Rows 0..=n of Pascal's triangle reduced into the ring.
fn pascal_mod(n: usize, ring: &Ring) -> Vec<Vec<RingElement>> {
    let mut rows: Vec<Vec<RingElement>> = Vec::with_capacity(n + 1);
    for b in 0..=n {
        let mut row = vec![ring.zero(); b + 1];
        row[0] = ring.one();
        if b > 0 {
            row[b] = ring.one();
            for k in 1..b {
                row[k] = rows[b - 1][k - 1].add(&rows[b - 1][k]);
            }
        }
        rows.push(row);
    }
    rows
}

/// `c (c-1) ... (c-k+1)` in the ring.
fn falling_mod(ring: &Ring, c: i32, k: i32) -> RingElement {
    let mut acc = ring.one();
    for t in 0..k {
        acc = acc.mul(&ring.int((c - t) as i64));
    }
    acc
}
