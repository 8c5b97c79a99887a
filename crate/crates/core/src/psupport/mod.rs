//! Commutative support-side engine: Groebner bases over fields, ideal
//! membership, Krull dimension, Poisson brackets, and the Lagrangian
//! certificate for support ideals.
//!
//! Two bracket structures are supported. The canonical one lives on an
//! ambient split as (X_1..X_r, P_1..P_r) with {P_i, X_i} = 1. The
//! log-canonical one takes a skew matrix L over the whole ambient with
//! {z_i, z_j} = L_ij z_i z_j. Certificates are always relative to the
//! given generators; no radical is computed.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::multipoly::{LaurentPoly, Mono, MonomialOrder, PolyError, VarSet};
use crate::rings::{Ring, RingError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PsupportError {
    #[error("coefficient ring is not a field")]
    NotAField,
    #[error("polynomial lives in a different ambient than the basis")]
    AmbientMismatch,
    #[error("bracket tag does not match the ambient")]
    TagMismatch,
    #[error("ideal is the unit ideal")]
    UnitIdeal,
    #[error("ideal has no generators or a zero generator")]
    DegenerateGenerators,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Which Poisson structure the ambient carries. The log-canonical matrix
/// is indexed by ambient variables and must be skew-symmetric.
#[derive(Clone, Debug, PartialEq)]
pub enum PoissonTag {
    Canonical,
    LogCanonical(Vec<Vec<i64>>),
}

/// An ideal presented by generators inside a Poisson ambient, together
/// with the half-dimension r it is tested against.
#[derive(Clone, Debug)]
pub struct SupportIdeal {
    vars: Arc<VarSet>,
    gens: Vec<LaurentPoly>,
    tag: PoissonTag,
    r: usize,
}

impl SupportIdeal {
    pub fn new(
        vars: &Arc<VarSet>,
        gens: Vec<LaurentPoly>,
        tag: PoissonTag,
        r: usize,
    ) -> Result<SupportIdeal, PsupportError> {
        if gens.is_empty() || gens.iter().any(|g| g.is_zero()) {
            return Err(PsupportError::DegenerateGenerators);
        }
        if gens.iter().any(|g| g.vars() != vars) {
            return Err(PsupportError::AmbientMismatch);
        }
        match &tag {
            PoissonTag::Canonical => {
                if vars.len() != 2 * r {
                    return Err(PsupportError::TagMismatch);
                }
            }
            PoissonTag::LogCanonical(l) => {
                let n = vars.len();
                if l.len() != n || l.iter().any(|row| row.len() != n) {
                    return Err(PsupportError::TagMismatch);
                }
                for i in 0..n {
                    for j in 0..n {
                        if l[i][j] != -l[j][i] {
                            return Err(PsupportError::TagMismatch);
                        }
                    }
                }
            }
        }
        Ok(SupportIdeal { vars: vars.clone(), gens, tag, r })
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn generators(&self) -> &[LaurentPoly] {
        &self.gens
    }

    pub fn tag(&self) -> &PoissonTag {
        &self.tag
    }

    pub fn half_dimension(&self) -> usize {
        self.r
    }
}

/// A reduced Groebner basis: inter-reduced, monic, S-pairs all reduce to
/// zero. Laurent directions are handled on the affine chart, so every
/// stored exponent is nonnegative.
#[derive(Clone)]
pub struct GroebnerBasis {
    ring: Ring,
    vars: Arc<VarSet>,
    order: MonomialOrder,
    basis: Vec<LaurentPoly>,
}

/// Outcome of reduction modulo a basis.
#[derive(Clone, Debug)]
pub struct Membership {
    pub member: bool,
    pub normal_form: LaurentPoly,
}

/// Shift Laurent directions so every exponent is nonnegative with zero
/// minimum; monomials are units there, so the ideal is unchanged.
fn clear_torus_content(f: &LaurentPoly) -> LaurentPoly {
    if f.is_zero() {
        return f.clone();
    }
    let vars = f.vars();
    let shift: Vec<i32> = (0..vars.len())
        .map(|i| {
            if vars.is_laurent(i) {
                -f.min_exponent(i).unwrap()
            } else {
                0
            }
        })
        .collect();
    if shift.iter().all(|&s| s == 0) {
        f.clone()
    } else {
        f.shift_exponents(&Mono(shift))
    }
}

fn leading_mono(f: &LaurentPoly, order: MonomialOrder) -> Mono {
    f.leading(order).expect("nonzero polynomial").0.clone()
}

fn make_monic(f: &LaurentPoly, order: MonomialOrder) -> Result<LaurentPoly, PsupportError> {
    let (_, lc) = f.leading(order).expect("nonzero polynomial");
    let inv = lc.inv()?;
    let scale = LaurentPoly::constant(&inv, f.vars());
    Ok(f.mul(&scale))
}

/// Full normal form of `f` against monic divisors: every term either
/// cancels against some leading monomial or moves to the remainder.
/// Works on a raw term map so each step costs one divisor, not a whole
/// polynomial rebuild.
fn reduce_full(f: &LaurentPoly, basis: &[LaurentPoly], order: MonomialOrder) -> LaurentPoly {
    let f = clear_torus_content(f);
    let leads: Vec<Mono> = basis.iter().map(|g| leading_mono(g, order)).collect();
    let mut work: std::collections::BTreeMap<Mono, crate::rings::RingElement> =
        f.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    let mut rem = LaurentPoly::zero(f.ring(), f.vars());
    while let Some(lm) = pop_key(&mut work, order) {
        let lc = work.remove(&lm).unwrap();
        match basis.iter().zip(&leads).find(|(_, lg)| lg.divides(&lm)) {
            Some((g, lg)) => {
                // Divisor is monic, so its lead cancels the removed term;
                // fold the scaled tail back in.
                let shift = lm.sub(lg);
                for (m, c) in g.terms() {
                    if m == lg {
                        continue;
                    }
                    let key = m.checked_add(&shift);
                    let delta = c.mul(&lc);
                    match work.entry(key) {
                        std::collections::btree_map::Entry::Vacant(v) => {
                            if !delta.is_zero() {
                                v.insert(delta.neg());
                            }
                        }
                        std::collections::btree_map::Entry::Occupied(mut o) => {
                            let next = o.get().sub(&delta);
                            if next.is_zero() {
                                o.remove();
                            } else {
                                *o.get_mut() = next;
                            }
                        }
                    }
                }
            }
            None => rem.add_term(lm, lc),
        }
    }
    rem
}

fn pop_key(
    work: &std::collections::BTreeMap<Mono, crate::rings::RingElement>,
    order: MonomialOrder,
) -> Option<Mono> {
    match order {
        MonomialOrder::GrLex => work.keys().next_back().cloned(),
        MonomialOrder::Lex => work.keys().max_by(|a, b| order.cmp(a, b)).cloned(),
    }
}

fn spair_key(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

/// Buchberger with the coprime-leading-term and chain criteria, followed
/// by inter-reduction. Basis elements are monic and sorted ascending by
/// leading monomial.
pub fn groebner_basis(
    gens: &[LaurentPoly],
    order: MonomialOrder,
) -> Result<GroebnerBasis, PsupportError> {
    let first = gens.first().ok_or(PsupportError::DegenerateGenerators)?;
    let ring = first.ring().clone();
    if !ring.is_field() {
        return Err(PsupportError::NotAField);
    }
    let vars = first.vars().clone();
    if gens.iter().any(|g| g.vars() != &vars || g.ring() != &ring) {
        return Err(PsupportError::AmbientMismatch);
    }

    let mut basis: Vec<LaurentPoly> = Vec::new();
    for g in gens {
        let g = clear_torus_content(g);
        if !g.is_zero() {
            basis.push(make_monic(&g, order)?);
        }
    }

    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            pairs.insert((i, j));
        }
    }
    let mut leads: Vec<Mono> = basis.iter().map(|g| leading_mono(g, order)).collect();

    // Normal selection: smallest lcm first keeps intermediate elements
    // small on the graph-shaped ideals this engine mostly sees.
    while let Some((i, j)) = pairs
        .iter()
        .min_by(|(a1, b1), (a2, b2)| {
            let l1 = leads[*a1].lcm(&leads[*b1]);
            let l2 = leads[*a2].lcm(&leads[*b2]);
            order.cmp(&l1, &l2)
        })
        .copied()
    {
        pairs.remove(&(i, j));
        let li = &leads[i];
        let lj = &leads[j];
        let l = li.lcm(lj);
        if li.0.iter().zip(&lj.0).all(|(&a, &b)| a.min(b) == 0) {
            continue;
        }
        let chained = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && leads[k].divides(&l)
                && !pairs.contains(&spair_key(i, k))
                && !pairs.contains(&spair_key(j, k))
        });
        if chained {
            continue;
        }
        let one = basis[i].ring().one();
        let fi = LaurentPoly::monomial(basis[i].ring(), &vars, l.sub(li), &one).mul(&basis[i]);
        let fj = LaurentPoly::monomial(basis[j].ring(), &vars, l.sub(lj), &one).mul(&basis[j]);
        let s = fi.sub(&fj);
        let nf = reduce_full(&s, &basis, order);
        if !nf.is_zero() {
            let nf = make_monic(&nf, order)?;
            let idx = basis.len();
            leads.push(leading_mono(&nf, order));
            basis.push(nf);
            for t in 0..idx {
                pairs.insert((t, idx));
            }
        }
    }

    // Minimal set: drop any element whose lead is divided by another
    // surviving lead.
    let mut alive = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !alive[i] {
            continue;
        }
        for j in 0..basis.len() {
            if i != j && alive[j] && leads[j].divides(&leads[i]) && leads[i] != leads[j] {
                alive[i] = false;
                break;
            }
        }
    }
    // Equal leads can only arise transiently; keep the first.
    for i in 0..basis.len() {
        for j in 0..i {
            if alive[i] && alive[j] && leads[i] == leads[j] {
                alive[i] = false;
            }
        }
    }
    let minimal: Vec<LaurentPoly> = basis
        .iter()
        .zip(&alive)
        .filter_map(|(g, &a)| a.then(|| g.clone()))
        .collect();

    // Tail-reduce every element against the others.
    let mut reduced: Vec<LaurentPoly> = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<LaurentPoly> = minimal
            .iter()
            .enumerate()
            .filter_map(|(j, g)| (j != i).then(|| g.clone()))
            .collect();
        let nf = if others.is_empty() {
            minimal[i].clone()
        } else {
            reduce_full(&minimal[i], &others, order)
        };
        reduced.push(make_monic(&nf, order)?);
    }
    reduced.sort_by(|a, b| {
        order.cmp(&leading_mono(a, order), &leading_mono(b, order))
    });

    Ok(GroebnerBasis { ring, vars, order, basis: reduced })
}

impl GroebnerBasis {
    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn elements(&self) -> &[LaurentPoly] {
        &self.basis
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.basis.iter().any(|g| g.is_one())
    }

    pub fn reduce(&self, f: &LaurentPoly) -> Result<Membership, PsupportError> {
        if f.vars() != &self.vars || f.ring() != &self.ring {
            return Err(PsupportError::AmbientMismatch);
        }
        let nf = reduce_full(f, &self.basis, self.order);
        Ok(Membership { member: nf.is_zero(), normal_form: nf })
    }
}

pub fn ideal_membership(f: &LaurentPoly, gb: &GroebnerBasis) -> Result<Membership, PsupportError> {
    gb.reduce(f)
}

/// Dimension of the quotient by the leading-term ideal: the largest
/// variable subset S such that no leading monomial is supported inside S.
pub fn krull_dimension(gb: &GroebnerBasis) -> Result<usize, PsupportError> {
    if gb.is_unit_ideal() {
        return Err(PsupportError::UnitIdeal);
    }
    let nv = gb.vars.len();
    assert!(nv <= 24, "variable count too large for subset enumeration");
    let supports: Vec<u32> = gb
        .basis
        .iter()
        .map(|g| {
            let lm = leading_mono(g, gb.order);
            let mut mask = 0u32;
            for (i, &e) in lm.0.iter().enumerate() {
                if e > 0 {
                    mask |= 1 << i;
                }
            }
            mask
        })
        .collect();
    let mut best = 0usize;
    for s in 0u32..1 << nv {
        let size = s.count_ones() as usize;
        if size <= best {
            continue;
        }
        if supports.iter().all(|&m| m & !s != 0) {
            best = size;
        }
    }
    Ok(best)
}

/// Poisson bracket of two polynomials in the tagged ambient. Both tags
/// yield polynomial output.
pub fn poisson_bracket(
    f: &LaurentPoly,
    g: &LaurentPoly,
    tag: &PoissonTag,
) -> Result<LaurentPoly, PsupportError> {
    let vars = f.vars();
    if g.vars() != vars || g.ring() != f.ring() {
        return Err(PsupportError::AmbientMismatch);
    }
    let n = vars.len();
    let mut acc = LaurentPoly::zero(f.ring(), vars);
    match tag {
        PoissonTag::Canonical => {
            if n % 2 != 0 {
                return Err(PsupportError::TagMismatch);
            }
            let r = n / 2;
            for i in 0..r {
                let a = f.partial(r + i)?.mul(&g.partial(i)?);
                let b = f.partial(i)?.mul(&g.partial(r + i)?);
                acc = acc.add(&a).sub(&b);
            }
        }
        PoissonTag::LogCanonical(l) => {
            if l.len() != n {
                return Err(PsupportError::TagMismatch);
            }
            for i in 0..n {
                for j in i + 1..n {
                    if l[i][j] == 0 {
                        continue;
                    }
                    let zi = LaurentPoly::var(f.ring(), vars, i);
                    let zj = LaurentPoly::var(f.ring(), vars, j);
                    let cross = f
                        .partial(i)?
                        .mul(&g.partial(j)?)
                        .sub(&f.partial(j)?.mul(&g.partial(i)?));
                    acc = acc.add(&zi.mul(&zj).mul(&cross).mul_int(l[i][j]));
                }
            }
        }
    }
    Ok(acc)
}

/// The offending bracket on certificate failure: 1-based indices into the
/// reduced basis, the bracket itself, and its monic normal form.
#[derive(Clone, Debug)]
pub struct BracketWitness {
    pub i: usize,
    pub j: usize,
    pub bracket: LaurentPoly,
    pub normal_form: LaurentPoly,
}

/// Verdict of the dimension-plus-coisotropy test against the given
/// generators. `caveat` is always set: the radical is not computed.
#[derive(Clone)]
pub struct LagrangianCertificate {
    pub lagrangian: bool,
    pub dimension: usize,
    pub coisotropic: bool,
    pub witness: Option<BracketWitness>,
    pub caveat: &'static str,
    pub order: MonomialOrder,
    pub basis: GroebnerBasis,
}

pub const CERTIFICATE_CAVEAT: &str = "with respect to the given generators";

pub fn lagrangian_certificate(
    ideal: &SupportIdeal,
) -> Result<LagrangianCertificate, PsupportError> {
    let order = MonomialOrder::GrLex;
    let gb = groebner_basis(ideal.generators(), order)?;
    let dimension = krull_dimension(&gb)?;
    let mut coisotropic = true;
    let mut witness = None;
    'pairs: for i in 0..gb.basis.len() {
        for j in i + 1..gb.basis.len() {
            let b = poisson_bracket(&gb.basis[i], &gb.basis[j], ideal.tag())?;
            let nf = reduce_full(&b, &gb.basis, order);
            if !nf.is_zero() {
                coisotropic = false;
                witness = Some(BracketWitness {
                    i: i + 1,
                    j: j + 1,
                    bracket: b,
                    normal_form: make_monic(&nf, order)?,
                });
                break 'pairs;
            }
        }
    }
    Ok(LagrangianCertificate {
        lagrangian: dimension == ideal.half_dimension() && coisotropic,
        dimension,
        coisotropic,
        witness,
        caveat: CERTIFICATE_CAVEAT,
        order,
        basis: gb,
    })
}
