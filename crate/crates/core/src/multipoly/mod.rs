//! Sparse multivariate Laurent polynomials over the coefficient rings in
//! [`crate::rings`], plus rational functions and polynomial matrices.
//!
//! Terms are kept in a map keyed by exponent vectors under graded-lex order,
//! so iteration, printing, and leading-term selection all agree. Negative
//! exponents are legal only in variables flagged Laurent at roster build
//! time.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

use crate::rings::{Ring, RingElement, RingError};

pub mod matrix;
pub mod parse;
pub mod ratfunc;

pub use matrix::{rank_bareiss_rows, Entry, Matrix};
pub use parse::parse_poly;
pub use ratfunc::RatFunc;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("variable rosters do not match")]
    RosterMismatch,
    #[error("matrix sizes do not match")]
    SizeMismatch,
    #[error("division by the zero polynomial")]
    DivisionByZeroPoly,
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("shift parameter q is not a unit")]
    NonUnitQ,
    #[error("negative exponent on non-Laurent expression {0}")]
    NegativeExponent(String),
    #[error("exponent of {0} is not divisible by {1}")]
    ExponentNotDivisible(String, u64),
    #[error("parse error at byte {0}: {1}")]
    Parse(usize, String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Named, ordered variable roster. Shared by reference between all
/// polynomials built over it.
#[derive(Debug, PartialEq, Eq)]
pub struct VarSet {
    names: Vec<String>,
    laurent: Vec<bool>,
}

impl VarSet {
    pub fn new(names: &[&str], laurent: &[bool]) -> Arc<VarSet> {
        assert_eq!(names.len(), laurent.len());
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            assert!(!names[..i].contains(n), "duplicate variable name {n}");
        }
        Arc::new(VarSet { names, laurent: laurent.to_vec() })
    }

    /// Roster `prefix1..prefixN`, all with the same Laurent flag.
    pub fn numbered(prefix: &str, n: usize, laurent: bool) -> Arc<VarSet> {
        let names: Vec<String> = (1..=n).map(|i| format!("{prefix}{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        VarSet::new(&refs, &vec![laurent; n])
    }

    pub fn concat(a: &VarSet, b: &VarSet) -> Arc<VarSet> {
        let names: Vec<&str> = a.names.iter().chain(&b.names).map(|s| s.as_str()).collect();
        let laurent: Vec<bool> = a.laurent.iter().chain(&b.laurent).copied().collect();
        VarSet::new(&names, &laurent)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(|s| s.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn is_laurent(&self, i: usize) -> bool {
        self.laurent[i]
    }
}

/// Exponent vector. Orders by total degree, ties broken pointwise with the
/// earlier variable dominating, so `BTreeMap` iteration walks ascending
/// graded-lex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<i32>);

impl Mono {
    pub fn constant(nvars: usize) -> Mono {
        Mono(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Mono {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Mono(e)
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn checked_add(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.checked_add(b).expect("exponent overflow"))
                .collect(),
        )
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| a <= b)
    }

    pub fn sub(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(&a, &b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(&a, &b)| a.max(b)).collect())
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Monomial comparison used where the order is a caller choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonomialOrder {
    GrLex,
    Lex,
}

impl MonomialOrder {
    pub fn cmp(&self, a: &Mono, b: &Mono) -> Ordering {
        match self {
            MonomialOrder::GrLex => a.cmp(b),
            MonomialOrder::Lex => a.0.cmp(&b.0),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    ring: Ring,
    vars: Arc<VarSet>,
    terms: BTreeMap<Mono, RingElement>,
}

impl LaurentPoly {
    pub fn zero(ring: &Ring, vars: &Arc<VarSet>) -> LaurentPoly {
        LaurentPoly { ring: ring.clone(), vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(c: &RingElement, vars: &Arc<VarSet>) -> LaurentPoly {
        let mut p = LaurentPoly::zero(c.ring(), vars);
        p.add_term(Mono::constant(vars.len()), c.clone());
        p
    }

    pub fn one(ring: &Ring, vars: &Arc<VarSet>) -> LaurentPoly {
        LaurentPoly::constant(&ring.one(), vars)
    }

    pub fn int(ring: &Ring, vars: &Arc<VarSet>, n: i64) -> LaurentPoly {
        LaurentPoly::constant(&ring.int(n), vars)
    }

    pub fn var(ring: &Ring, vars: &Arc<VarSet>, i: usize) -> LaurentPoly {
        let mut p = LaurentPoly::zero(ring, vars);
        p.add_term(Mono::var(vars.len(), i), ring.one());
        p
    }

    pub fn monomial(ring: &Ring, vars: &Arc<VarSet>, mono: Mono, c: &RingElement) -> LaurentPoly {
        assert_eq!(mono.0.len(), vars.len());
        let mut p = LaurentPoly::zero(ring, vars);
        p.add_term(mono, c.clone());
        p
    }

    pub(crate) fn add_term(&mut self, mono: Mono, c: RingElement) {
        debug_assert!(mono
            .0
            .iter()
            .enumerate()
            .all(|(i, &e)| e >= 0 || self.vars.is_laurent(i)));
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
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

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &RingElement)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map_or(false, |(m, c)| m.is_constant() && c.is_one())
    }

    /// The constant value if no variable appears.
    pub fn as_constant(&self) -> Option<RingElement> {
        match self.terms.len() {
            0 => Some(self.ring.zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_constant().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn coeff(&self, mono: &Mono) -> RingElement {
        self.terms.get(mono).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn leading(&self, order: MonomialOrder) -> Option<(&Mono, &RingElement)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| order.cmp(a, b))
    }

    pub fn check_compatible(&self, other: &LaurentPoly) -> Result<(), PolyError> {
        if self.ring != other.ring || !Arc::ptr_eq(&self.vars, &other.vars) && self.vars != other.vars
        {
            return Err(PolyError::RosterMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        self.check_compatible(other).expect("roster mismatch in add");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &LaurentPoly) -> LaurentPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LaurentPoly {
        let mut out = LaurentPoly::zero(&self.ring, &self.vars);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c.neg());
        }
        out
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        self.check_compatible(other).expect("roster mismatch in mul");
        let mut out = LaurentPoly::zero(&self.ring, &self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.checked_add(mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn scalar_mul(&self, c: &RingElement) -> LaurentPoly {
        let mut out = LaurentPoly::zero(&self.ring, &self.vars);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a.mul(c));
        }
        out
    }

    pub fn mul_int(&self, n: i64) -> LaurentPoly {
        self.scalar_mul(&self.ring.int(n))
    }

    pub fn pow(&self, e: u64) -> LaurentPoly {
        let mut acc = LaurentPoly::one(&self.ring, &self.vars);
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

    /// Inverse when the polynomial is a single term with unit coefficient
    /// and all inverted variables Laurent.
    pub fn inv_monomial(&self) -> Result<LaurentPoly, PolyError> {
        if self.terms.len() != 1 {
            return Err(PolyError::NegativeExponent(self.to_string()));
        }
        let (m, c) = self.terms.iter().next().unwrap();
        for (i, &e) in m.0.iter().enumerate() {
            if e != 0 && !self.vars.is_laurent(i) {
                return Err(PolyError::NegativeExponent(self.vars.name(i).to_string()));
            }
        }
        let cinv = c.inv().map_err(PolyError::Ring)?;
        let inv_mono = Mono(m.0.iter().map(|&e| -e).collect());
        Ok(LaurentPoly::monomial(&self.ring, &self.vars, inv_mono, &cinv))
    }

    pub fn pow_i(&self, e: i64) -> Result<LaurentPoly, PolyError> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv_monomial()?.pow(e.unsigned_abs()))
        }
    }

    /// Formal partial derivative in variable `i`.
    pub fn partial(&self, i: usize) -> Result<LaurentPoly, PolyError> {
        if i >= self.vars.len() {
            return Err(PolyError::UnknownVariable(format!("#{i}")));
        }
        let mut out = LaurentPoly::zero(&self.ring, &self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] = e - 1;
            out.add_term(m2, c.mul(&self.ring.int(e as i64)));
        }
        Ok(out)
    }

    pub fn partial_times(&self, i: usize, times: u32) -> Result<LaurentPoly, PolyError> {
        let mut out = self.clone();
        for _ in 0..times {
            out = out.partial(i)?;
        }
        Ok(out)
    }

    /// Evaluate at a full point. Negative exponents require the coordinate
    /// to be a unit.
    pub fn eval(&self, point: &[RingElement]) -> Result<RingElement, PolyError> {
        if point.len() != self.vars.len() {
            return Err(PolyError::RosterMismatch);
        }
        let mut acc = self.ring.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                t = t.mul(&point[i].pow_i(e as i64).map_err(PolyError::Ring)?);
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Replace variable `i` by a polynomial over the same roster. Exponents
    /// of `i` must be nonnegative.
    pub fn substitute_var(&self, i: usize, by: &LaurentPoly) -> Result<LaurentPoly, PolyError> {
        self.check_compatible(by)?;
        let mut out = LaurentPoly::zero(&self.ring, &self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e < 0 {
                return Err(PolyError::NegativeExponent(self.vars.name(i).to_string()));
            }
            let mut rest = m.clone();
            rest.0[i] = 0;
            let term = LaurentPoly::monomial(&self.ring, &self.vars, rest, c);
            out = out.add(&term.mul(&by.pow(e as u64)));
        }
        Ok(out)
    }

    /// `x_i -> x_i + c`.
    pub fn additive_shift(&self, i: usize, c: &RingElement) -> Result<LaurentPoly, PolyError> {
        let shifted = LaurentPoly::var(&self.ring, &self.vars, i)
            .add(&LaurentPoly::constant(c, &self.vars));
        self.substitute_var(i, &shifted)
    }

    /// `x_i -> q x_i`: each term picks up `q^(e_i)`. Works for negative
    /// exponents because `q` must be a unit.
    pub fn q_shift(&self, i: usize, q: &RingElement) -> Result<LaurentPoly, PolyError> {
        if i >= self.vars.len() {
            return Err(PolyError::UnknownVariable(format!("#{i}")));
        }
        if !q.is_unit() {
            return Err(PolyError::NonUnitQ);
        }
        let mut out = LaurentPoly::zero(&self.ring, &self.vars);
        for (m, c) in &self.terms {
            let factor = q.pow_i(m.0[i] as i64).map_err(PolyError::Ring)?;
            out.add_term(m.clone(), c.mul(&factor));
        }
        Ok(out)
    }

    /// Coefficientwise p-th power with the roster renamed; exponents are
    /// kept. A ring homomorphism in characteristic p.
    pub fn frobenius_twist(&self, p: u64, new_vars: &Arc<VarSet>) -> Result<LaurentPoly, PolyError> {
        if new_vars.len() != self.vars.len() {
            return Err(PolyError::RosterMismatch);
        }
        let mut out = LaurentPoly::zero(&self.ring, new_vars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.pow(p));
        }
        Ok(out)
    }

    /// Divide every exponent by `p` and rename the roster; fails unless all
    /// exponents are multiples of `p`. Coefficients are untouched, so this
    /// is the inverse of substituting `new_i -> old_i^p`.
    pub fn contract_exponents(&self, p: u64, new_vars: &Arc<VarSet>) -> Result<LaurentPoly, PolyError> {
        if new_vars.len() != self.vars.len() {
            return Err(PolyError::RosterMismatch);
        }
        let mut out = LaurentPoly::zero(&self.ring, new_vars);
        for (m, c) in &self.terms {
            let mut e2 = Vec::with_capacity(m.0.len());
            for (i, &e) in m.0.iter().enumerate() {
                if e as i64 % p as i64 != 0 {
                    return Err(PolyError::ExponentNotDivisible(
                        self.vars.name(i).to_string(),
                        p,
                    ));
                }
                e2.push(e / p as i32);
            }
            out.add_term(Mono(e2), c.clone());
        }
        Ok(out)
    }

    /// Move to a larger roster; `map[i]` is the new index of old variable
    /// `i`.
    pub fn embed(&self, new_vars: &Arc<VarSet>, map: &[usize]) -> Result<LaurentPoly, PolyError> {
        if map.len() != self.vars.len() {
            return Err(PolyError::RosterMismatch);
        }
        let mut out = LaurentPoly::zero(&self.ring, new_vars);
        for (m, c) in &self.terms {
            let mut e2 = vec![0i32; new_vars.len()];
            for (i, &e) in m.0.iter().enumerate() {
                e2[map[i]] = e;
            }
            out.add_term(Mono(e2), c.clone());
        }
        Ok(out)
    }

    /// Same exponents over a renamed roster of equal length.
    pub fn rename(&self, new_vars: &Arc<VarSet>) -> Result<LaurentPoly, PolyError> {
        if new_vars.len() != self.vars.len() {
            return Err(PolyError::RosterMismatch);
        }
        Ok(LaurentPoly { ring: self.ring.clone(), vars: new_vars.clone(), terms: self.terms.clone() })
    }

    /// Push coefficients through a ring map.
    pub fn map_coeffs<F>(&self, target: &Ring, new_vars: &Arc<VarSet>, f: F) -> LaurentPoly
    where
        F: Fn(&RingElement) -> RingElement,
    {
        let mut out = LaurentPoly::zero(target, new_vars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Group terms by their exponents on `subset`, returning for each
    /// distinct subset-exponent the cofactor polynomial over `rest_vars`
    /// (the complementary roster, in original order).
    pub fn coefficients_on(
        &self,
        subset: &[usize],
        rest_vars: &Arc<VarSet>,
    ) -> Vec<(Mono, LaurentPoly)> {
        let rest_idx: Vec<usize> = (0..self.vars.len()).filter(|i| !subset.contains(i)).collect();
        assert_eq!(rest_idx.len(), rest_vars.len());
        let mut groups: BTreeMap<Mono, LaurentPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key = Mono(subset.iter().map(|&i| m.0[i]).collect());
            let rest = Mono(rest_idx.iter().map(|&i| m.0[i]).collect());
            groups
                .entry(key)
                .or_insert_with(|| LaurentPoly::zero(&self.ring, rest_vars))
                .add_term(rest, c.clone());
        }
        groups.into_iter().collect()
    }

    pub fn min_exponent(&self, i: usize) -> Option<i32> {
        self.terms.keys().map(|m| m.0[i]).min()
    }

    pub fn max_exponent(&self, i: usize) -> Option<i32> {
        self.terms.keys().map(|m| m.0[i]).max()
    }

    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    /// Multiply by the monomial `x^shift` (Laurent flags permitting).
    pub fn shift_exponents(&self, shift: &Mono) -> LaurentPoly {
        let mut out = LaurentPoly::zero(&self.ring, &self.vars);
        for (m, c) in &self.terms {
            out.add_term(m.checked_add(shift), c.clone());
        }
        out
    }

    /// Per-variable monomial content: the componentwise minimum exponent.
    pub fn monomial_content(&self) -> Mono {
        let n = self.vars.len();
        let mut min = vec![i32::MAX; n];
        for m in self.terms.keys() {
            for i in 0..n {
                min[i] = min[i].min(m.0[i]);
            }
        }
        if self.terms.is_empty() {
            return Mono::constant(n);
        }
        Mono(min)
    }

    /// Exact quotient `self / g` over a field, if it exists. Strips the
    /// shared monomial content first so the greedy leading-term loop runs
    /// inside an honest polynomial ring, where graded-lex is a well-order.
    pub fn try_div_exact(&self, g: &LaurentPoly) -> Result<Option<LaurentPoly>, PolyError> {
        self.check_compatible(g)?;
        if g.is_zero() {
            return Err(PolyError::DivisionByZeroPoly);
        }
        if self.is_zero() {
            return Ok(Some(self.clone()));
        }
        let cf = self.monomial_content();
        let cg = g.monomial_content();
        let f0 = self.shift_exponents(&Mono(cf.0.iter().map(|&e| -e).collect()));
        let g0 = g.shift_exponents(&Mono(cg.0.iter().map(|&e| -e).collect()));
        let (gm, gc) = g0.leading(MonomialOrder::GrLex).unwrap();
        let gc_inv = match gc.inv() {
            Ok(v) => v,
            Err(_) => return Ok(None),
        };
        let mut rem = f0;
        let mut quot = LaurentPoly::zero(&self.ring, &self.vars);
        while let Some((fm, fc)) = rem.leading(MonomialOrder::GrLex) {
            if !gm.divides(fm) {
                return Ok(None);
            }
            let qm = fm.sub(gm);
            if qm.0.iter().any(|&e| e < 0) {
                return Ok(None);
            }
            let qc = fc.mul(&gc_inv);
            let t = LaurentPoly::monomial(&self.ring, &self.vars, qm, &qc);
            rem = rem.sub(&t.mul(&g0));
            quot = quot.add(&t);
        }
        let shift = cf.sub(&cg);
        for (i, &e) in shift.0.iter().enumerate() {
            if e < 0 && !self.vars.is_laurent(i) {
                return Ok(None);
            }
        }
        Ok(Some(quot.shift_exponents(&shift)))
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(w, "{}", self)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(w, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let bal = c.balanced_coeffs();
            let plain_int = bal[1..].iter().all(|&x| x == 0);
            let mono_str = mono_display(m, &self.vars);
            if plain_int {
                let v = bal[0];
                let (sign_neg, mag) = (v < 0, v.abs());
                if first {
                    if sign_neg {
                        write!(w, "-")?;
                    }
                } else if sign_neg {
                    write!(w, " - ")?;
                } else {
                    write!(w, " + ")?;
                }
                match (&mono_str, mag) {
                    (None, _) => write!(w, "{mag}")?,
                    (Some(ms), 1) => write!(w, "{ms}")?,
                    (Some(ms), _) => write!(w, "{mag}*{ms}")?,
                }
            } else {
                if !first {
                    write!(w, " + ")?;
                }
                match &mono_str {
                    None => write!(w, "({c})")?,
                    Some(ms) => write!(w, "({c})*{ms}")?,
                }
            }
            first = false;
        }
        Ok(())
    }
}

fn mono_display(m: &Mono, vars: &VarSet) -> Option<String> {
    let mut parts = Vec::new();
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(vars.name(i).to_string()),
            _ => parts.push(format!("{}^{}", vars.name(i), e)),
        }
    }
    if parts.is_empty() {
        None
    } else {
        Some(parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::Ring;

    fn fp(p: u64) -> Ring {
        Ring::prime_field(p).unwrap()
    }

    #[test]
    fn freshman_dream_mod_2() {
        let f2 = fp(2);
        let v = VarSet::numbered("x", 2, false);
        let s = LaurentPoly::var(&f2, &v, 0).add(&LaurentPoly::var(&f2, &v, 1));
        let sq = s.pow(2);
        let expect = LaurentPoly::var(&f2, &v, 0)
            .pow(2)
            .add(&LaurentPoly::var(&f2, &v, 1).pow(2));
        assert_eq!(sq, expect);
    }

    #[test]
    fn laurent_cancellation() {
        let f5 = fp(5);
        let v = VarSet::numbered("x", 1, true);
        let x = LaurentPoly::var(&f5, &v, 0);
        let xinv = x.pow_i(-1).unwrap();
        assert!(x.mul(&xinv).is_one());
    }

    #[test]
    fn negative_power_needs_laurent_flag() {
        let f5 = fp(5);
        let v = VarSet::numbered("x", 1, false);
        let x = LaurentPoly::var(&f5, &v, 0);
        assert!(matches!(x.pow_i(-1), Err(PolyError::NegativeExponent(_))));
    }

    #[test]
    fn partial_derivative_basic() {
        let f7 = fp(7);
        let v = VarSet::numbered("x", 2, false);
        let x1 = LaurentPoly::var(&f7, &v, 0);
        let x2 = LaurentPoly::var(&f7, &v, 1);
        let f = x1.pow(3).mul(&x2.pow(2));
        let d = f.partial(1).unwrap();
        let expect = x1.pow(3).mul(&x2).mul_int(2);
        assert_eq!(d, expect);
    }

    #[test]
    fn wilson_factor_from_iterated_derivative() {
        // (d/dx)^(p-1) x^(p-1) = (p-1)! = -1 mod p.
        for p in [3u64, 5, 7] {
            let k = fp(p);
            let v = VarSet::numbered("x", 1, false);
            let f = LaurentPoly::var(&k, &v, 0).pow(p - 1);
            let d = f.partial_times(0, (p - 1) as u32).unwrap();
            assert_eq!(d.as_constant().unwrap(), k.int(-1), "p = {p}");
        }
    }

    #[test]
    fn derivative_of_pth_power_vanishes() {
        for p in [3u64, 5, 7] {
            let k = fp(p);
            let v = VarSet::numbered("X", 1, false);
            let f = LaurentPoly::var(&k, &v, 0).pow(p);
            assert!(f.partial(0).unwrap().is_zero(), "p = {p}");
        }
    }

    #[test]
    fn q_shift_scales_monomial() {
        let f5 = fp(5);
        let v = VarSet::numbered("x", 2, true);
        let f = LaurentPoly::var(&f5, &v, 0).mul(&LaurentPoly::var(&f5, &v, 1));
        let q = f5.int(2);
        let shifted = f.q_shift(1, &q).unwrap();
        assert_eq!(shifted, f.scalar_mul(&q));
    }

    #[test]
    fn q_shift_rejects_non_unit() {
        let z9 = Ring::integer_residue(9).unwrap();
        let v = VarSet::numbered("x", 1, true);
        let f = LaurentPoly::var(&z9, &v, 0);
        assert_eq!(f.q_shift(0, &z9.int(3)), Err(PolyError::NonUnitQ));
    }

    #[test]
    fn additive_shift_square() {
        let f7 = fp(7);
        let v = VarSet::numbered("x", 1, false);
        let x = LaurentPoly::var(&f7, &v, 0);
        let f = x.pow(2);
        let shifted = f.additive_shift(0, &f7.one()).unwrap();
        let expect = x.pow(2).add(&x.mul_int(2)).add(&LaurentPoly::one(&f7, &v));
        assert_eq!(shifted, expect);
    }

    #[test]
    fn frobenius_twist_example() {
        let f3 = fp(3);
        let xs = VarSet::numbered("x", 2, false);
        let caps = VarSet::numbered("X", 2, false);
        let f = LaurentPoly::var(&f3, &xs, 0)
            .mul(&LaurentPoly::var(&f3, &xs, 1).pow(2))
            .mul_int(2);
        let tw = f.frobenius_twist(3, &caps).unwrap();
        let expect = LaurentPoly::var(&f3, &caps, 0)
            .mul(&LaurentPoly::var(&f3, &caps, 1).pow(2))
            .mul_int(2);
        assert_eq!(tw, expect, "2^3 = 2 mod 3 and exponents stay put");
    }

    #[test]
    fn contract_exponents_divides_and_renames() {
        let f3 = fp(3);
        let xs = VarSet::numbered("x", 2, false);
        let caps = VarSet::numbered("X", 2, false);
        let x1 = LaurentPoly::var(&f3, &xs, 0);
        let x2 = LaurentPoly::var(&f3, &xs, 1);
        let f = x1.pow(3).neg().add(&x1.pow(9).mul(&x2.pow(6)));
        let g = f.contract_exponents(3, &caps).unwrap();
        let cx1 = LaurentPoly::var(&f3, &caps, 0);
        let cx2 = LaurentPoly::var(&f3, &caps, 1);
        let expect = cx1.neg().add(&cx1.pow(3).mul(&cx2.pow(2)));
        assert_eq!(g, expect);
        let bad = x1.pow(2);
        assert!(matches!(
            bad.contract_exponents(3, &caps),
            Err(PolyError::ExponentNotDivisible(_, 3))
        ));
    }

    #[test]
    fn grlex_iteration_ascends() {
        let f5 = fp(5);
        let v = VarSet::numbered("x", 2, false);
        let x1 = LaurentPoly::var(&f5, &v, 0);
        let x2 = LaurentPoly::var(&f5, &v, 1);
        let f = x1
            .pow(2)
            .add(&x1.mul(&x2))
            .add(&x2.pow(2))
            .add(&x1)
            .add(&x2)
            .add(&LaurentPoly::one(&f5, &v));
        let order: Vec<Vec<i32>> = f.terms().map(|(m, _)| m.0.clone()).collect();
        assert_eq!(
            order,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![0, 2],
                vec![1, 1],
                vec![2, 0]
            ]
        );
    }

    #[test]
    fn display_format() {
        let f3 = fp(3);
        let caps = VarSet::numbered("X", 2, false);
        let x1 = LaurentPoly::var(&f3, &caps, 0);
        let x2 = LaurentPoly::var(&f3, &caps, 1);
        let f = x1.neg().add(&x1.pow(3).mul(&x2.pow(2)));
        assert_eq!(f.to_string(), "-X1 + X1^3*X2^2");
        assert_eq!(LaurentPoly::zero(&f3, &caps).to_string(), "0");
        assert_eq!(x2.pow_i(1).unwrap().mul_int(2).to_string(), "-X2");

        let z9 = Ring::integer_residue(9).unwrap();
        let s = Ring::monic_quotient(&z9, &[-3, 0, 1]).unwrap();
        let v = VarSet::numbered("x", 1, false);
        let c = s.element(&[4, 5]);
        let f = LaurentPoly::var(&s, &v, 0).pow(2).scalar_mul(&c);
        assert_eq!(f.to_string(), "(4-4*u)*x1^2");
    }

    #[test]
    fn laurent_display_negative_exponent() {
        let f5 = fp(5);
        let v = VarSet::numbered("x", 1, true);
        let f = LaurentPoly::var(&f5, &v, 0).pow_i(-2).unwrap().mul_int(2);
        assert_eq!(f.to_string(), "2*x1^-2");
    }

    #[test]
    fn exact_division_roundtrip() {
        let f5 = fp(5);
        let v = VarSet::numbered("x", 2, false);
        let x1 = LaurentPoly::var(&f5, &v, 0);
        let x2 = LaurentPoly::var(&f5, &v, 1);
        let g = x1.add(&x2).add(&LaurentPoly::one(&f5, &v));
        let q = x1.pow(2).add(&x2.mul_int(3));
        let f = g.mul(&q);
        assert_eq!(f.try_div_exact(&g).unwrap(), Some(q));
        let f2 = f.add(&LaurentPoly::one(&f5, &v));
        assert_eq!(f2.try_div_exact(&g).unwrap(), None);
    }

    #[test]
    fn exact_division_with_laurent_content() {
        let f5 = fp(5);
        let v = VarSet::numbered("x", 1, true);
        let x = LaurentPoly::var(&f5, &v, 0);
        // (x + x^2) / x = 1 + x, and (1+x)/x = x^-1 + 1 in Laurent mode.
        let f = x.add(&x.pow(2));
        let q = f.try_div_exact(&x).unwrap().unwrap();
        assert_eq!(q, LaurentPoly::one(&f5, &v).add(&x));
        let g = LaurentPoly::one(&f5, &v).add(&x);
        let q2 = g.try_div_exact(&x).unwrap().unwrap();
        assert_eq!(q2, x.pow_i(-1).unwrap().add(&LaurentPoly::one(&f5, &v)));
    }

    #[test]
    fn coefficients_on_groups_by_subset() {
        let f5 = fp(5);
        let all = VarSet::new(&["x1", "t1"], &[false, false]);
        let rest = VarSet::numbered("x", 1, false);
        let x = LaurentPoly::var(&f5, &all, 0);
        let t = LaurentPoly::var(&f5, &all, 1);
        // x^2 t + 2 t + x
        let f = x.pow(2).mul(&t).add(&t.mul_int(2)).add(&x);
        let groups = f.coefficients_on(&[1], &rest);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].0, Mono(vec![0]));
        assert_eq!(groups[0].1.to_string(), "x1");
        assert_eq!(groups[1].0, Mono(vec![1]));
        assert_eq!(groups[1].1.to_string(), "2 + x1^2");
    }

    #[test]
    fn substitute_var_expands() {
        let f5 = fp(5);
        let v = VarSet::new(&["lambda", "P1"], &[false, false]);
        let l = LaurentPoly::var(&f5, &v, 0);
        let p1 = LaurentPoly::var(&f5, &v, 1);
        let f = l.pow(2).add(&l).add(&LaurentPoly::one(&f5, &v));
        let sub = f.substitute_var(0, &p1.mul_int(2)).unwrap();
        let expect = p1.pow(2).mul_int(4).add(&p1.mul_int(2)).add(&LaurentPoly::one(&f5, &v));
        assert_eq!(sub, expect);
    }
}
