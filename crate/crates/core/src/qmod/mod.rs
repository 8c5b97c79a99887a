//! Flat q-difference connections at a root of unity and everything
//! downstream of their N-curvature: the curvature family, eigenvalue
//! forms over the central X coordinates, the multiplicative closedness
//! test, lift checking, and the symplectic side (E-basis quantum tori,
//! Sp twists, the separating-coordinate search).
//!
//! Conventions fixed here and relied on by the CLI and tests:
//! a connection acts by `v -> a_i T_i(v)` where `T_i` scales `x_i` by q;
//! the flatness residual for a pair i < j is `T_i(a_j) a_i - T_j(a_i) a_j`;
//! N-curvature in direction i is the descending product
//! `T_i^(N-1)(a_i) ... T_i(a_i) a_i`;
//! closedness of an eigenvalue tuple is the cross-multiplied identity
//! `X_j L_j dL_i/dX_j = X_i L_i dL_j/dX_i` for every pair i < j.

use std::sync::Arc;

use thiserror::Error;

use crate::dmod::{eigen_forms_of, reduce_poly, DmodError, EigenForm, EigenMode, Flatness};
use crate::multipoly::{LaurentPoly, Matrix, Mono, PolyError, RatFunc, VarSet};
use crate::rings::{ResidueMap, Ring, RingElement, RingError};

pub mod eweyl;
pub mod symplectic;

pub use eweyl::{sp_twist, QAlgebra, QWeylElement};
pub use symplectic::{bernstein_step, SymplecticMatrix};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QmodError {
    #[error("operands live on different lattices or algebras")]
    LatticeMismatch,
    #[error("no square root of q available in the coefficient ring")]
    MissingSqrtQ,
    #[error("matrix does not preserve the standard symplectic form")]
    NotSymplectic,
    #[error("no symplectic word separates the last coordinates within the search budget")]
    SearchExhausted,
    #[error("q does not have exact multiplicative order {0}")]
    WrongOrder(usize),
    #[error("q-connection is not flat")]
    NotFlat,
    #[error("eigenvalue form has a zero component")]
    ZeroEigenvalue,
    #[error("coefficient matrix {0} is not invertible over the Laurent ring")]
    NotInvertible(usize),
    #[error("shapes or designated constants do not match")]
    ShapeMismatch,
    #[error("X-rewriting failed: {0}")]
    RewriteFailed(String),
    #[error(transparent)]
    Dmod(#[from] DmodError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `T_i^k` applied entrywise: `x_i -> q^k x_i`.
fn shift_matrix(m: &Matrix<LaurentPoly>, i: usize, q: &RingElement, k: i64) -> Matrix<LaurentPoly> {
    let factor = q.pow_i(k).expect("q is a unit");
    m.map(|e| e.q_shift(i, &factor).expect("variable index in roster"))
}

/// Division-free inverse through the characteristic polynomial; only the
/// trailing coefficient needs inverting, so this succeeds exactly when
/// the determinant is a unit monomial.
fn unit_monomial_inverse(m: &Matrix<LaurentPoly>) -> Result<Matrix<LaurentPoly>, PolyError> {
    let n = m.size();
    let chi = m.charpoly();
    let scale = chi[n].inv_monomial()?.neg();
    let mut adj = Matrix::identity(n, m.witness());
    for k in 1..n {
        adj = m.mul(&adj).add(&Matrix::scalar(n, &chi[k]));
    }
    Ok(adj.scalar_mul(&scale))
}

/// A q-difference connection on the trivial rank-n bundle over the
/// r-torus: invertible coefficient matrices `a_i` acting by
/// `v -> a_i T_i(v)`, over a coefficient ring with a designated unit q.
#[derive(Clone)]
pub struct QConnection {
    ring: Ring,
    vars: Arc<VarSet>,
    q: RingElement,
    r: usize,
    n: usize,
    a: Vec<Matrix<LaurentPoly>>,
    a_inv: Vec<Matrix<LaurentPoly>>,
}

impl std::fmt::Debug for QConnection {
    fn fmt(&self, w: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(w, "QConnection(r={}, n={}, q={}, over {:?})", self.r, self.n, self.q, self.ring)
    }
}

impl QConnection {
    pub fn new(
        ring: &Ring,
        q: &RingElement,
        a: Vec<Matrix<LaurentPoly>>,
    ) -> Result<QConnection, QmodError> {
        let mut a_inv = Vec::with_capacity(a.len());
        for (idx, m) in a.iter().enumerate() {
            let inv =
                unit_monomial_inverse(m).map_err(|_| QmodError::NotInvertible(idx + 1))?;
            a_inv.push(inv);
        }
        QConnection::with_inverses(ring, q, a, a_inv)
    }

    /// Escape hatch for coefficients whose determinant is a unit but not a
    /// monomial; the supplied inverses are verified on both sides.
    pub fn with_inverses(
        ring: &Ring,
        q: &RingElement,
        a: Vec<Matrix<LaurentPoly>>,
        a_inv: Vec<Matrix<LaurentPoly>>,
    ) -> Result<QConnection, QmodError> {
        q.inv()?;
        if a.is_empty() || a.len() != a_inv.len() {
            return Err(QmodError::ShapeMismatch);
        }
        let n = a[0].size();
        let vars = a[0].witness().vars().clone();
        let r = a.len();
        if vars.len() != r {
            return Err(QmodError::ShapeMismatch);
        }
        for i in 0..r {
            assert!(vars.is_laurent(i), "q-connections live over the Laurent ring");
        }
        for m in a.iter().chain(&a_inv) {
            if m.size() != n {
                return Err(QmodError::ShapeMismatch);
            }
            for i in 0..n {
                for j in 0..n {
                    let e = m.at(i, j);
                    if e.ring() != ring || e.vars() != &vars {
                        return Err(QmodError::Poly(PolyError::RosterMismatch));
                    }
                }
            }
        }
        let id = Matrix::identity(n, a[0].witness());
        for (idx, (m, inv)) in a.iter().zip(&a_inv).enumerate() {
            if m.mul(inv) != id || inv.mul(m) != id {
                return Err(QmodError::NotInvertible(idx + 1));
            }
        }
        Ok(QConnection { ring: ring.clone(), vars, q: q.clone(), r, n, a, a_inv })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn q(&self) -> &RingElement {
        &self.q
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficient(&self, j: usize) -> &Matrix<LaurentPoly> {
        &self.a[j]
    }

    pub fn inverse(&self, j: usize) -> &Matrix<LaurentPoly> {
        &self.a_inv[j]
    }

    fn residual(&self, i: usize, j: usize) -> Matrix<LaurentPoly> {
        let ti_aj = shift_matrix(&self.a[j], i, &self.q, 1);
        let tj_ai = shift_matrix(&self.a[i], j, &self.q, 1);
        ti_aj.mul(&self.a[i]).sub(&tj_ai.mul(&self.a[j]))
    }

    /// All r(r-1)/2 flatness identities, reporting the first failure.
    pub fn check_qflat(&self) -> Flatness {
        for i in 0..self.r {
            for j in i + 1..self.r {
                let res = self.residual(i, j);
                if !res.is_zero() {
                    return Flatness { flat: false, pair: Some((i + 1, j + 1)), witness: Some(res) };
                }
            }
        }
        Flatness { flat: true, pair: None, witness: None }
    }

    /// Conjugate by an invertible g: `a_i -> T_i(g) a_i g^{-1}`.
    pub fn gauge(
        &self,
        g: &Matrix<LaurentPoly>,
        g_inv: &Matrix<LaurentPoly>,
    ) -> Result<QConnection, QmodError> {
        let id = Matrix::identity(self.n, self.a[0].witness());
        if g.mul(g_inv) != id {
            return Err(QmodError::ShapeMismatch);
        }
        let mut a = Vec::with_capacity(self.r);
        let mut a_inv = Vec::with_capacity(self.r);
        for i in 0..self.r {
            let ti_g = shift_matrix(g, i, &self.q, 1);
            let ti_g_inv = shift_matrix(g_inv, i, &self.q, 1);
            a.push(ti_g.mul(&self.a[i]).mul(g_inv));
            a_inv.push(g.mul(&self.a_inv[i]).mul(&ti_g_inv));
        }
        QConnection::with_inverses(&self.ring, &self.q, a, a_inv)
    }

    fn order_check(&self, n_ord: usize) -> Result<(), QmodError> {
        if n_ord == 0 {
            return Err(QmodError::WrongOrder(0));
        }
        let one = self.ring.one();
        let mut pw = self.q.clone();
        for _ in 1..n_ord {
            if pw == one {
                return Err(QmodError::WrongOrder(n_ord));
            }
            pw = pw.mul(&self.q);
        }
        if pw != one {
            return Err(QmodError::WrongOrder(n_ord));
        }
        Ok(())
    }

    /// The multiplication operators `C_i = T_i^(N-1)(a_i) ... T_i(a_i) a_i`
    /// where N is the exact multiplicative order of q. Requires flatness;
    /// the operators then commute and their entries only involve x^N.
    pub fn n_curvature(&self, n_ord: usize) -> Result<QCurvatureFamily, QmodError> {
        self.order_check(n_ord)?;
        if !self.check_qflat().flat {
            return Err(QmodError::NotFlat);
        }
        let mut c = Vec::with_capacity(self.r);
        for i in 0..self.r {
            let mut acc = self.a[i].clone();
            for k in 1..n_ord {
                acc = shift_matrix(&self.a[i], i, &self.q, k as i64).mul(&acc);
            }
            if self.n == 1 && self.a[i].at(0, 0).num_terms() == 1 {
                assert_eq!(
                    *acc.at(0, 0),
                    monomial_curvature(self.a[i].at(0, 0), i, &self.q, n_ord),
                    "iterated curvature disagrees with the one-term closed form"
                );
            }
            c.push(acc);
        }
        for i in 0..self.r {
            for j in i + 1..self.r {
                assert!(
                    c[i].mul(&c[j]).sub(&c[j].mul(&c[i])).is_zero(),
                    "curvature operators of a flat q-connection must commute"
                );
            }
        }
        let fam = QCurvatureFamily::from_x_matrices(n_ord, &self.vars, c)?;
        assert!(
            fam.charpolys_t_invariant(),
            "curvature characteristic polynomials must be shift invariant"
        );
        Ok(fam)
    }

    /// Independent route to the same operators: the ascending product of
    /// negatively shifted factors, `T_i^(-1)(a_i) T_i^(-2)(a_i) ...
    /// T_i^(-N)(a_i)`. Agrees with `n_curvature` because q^N = 1.
    pub fn n_curvature_oracle(
        &self,
        n_ord: usize,
    ) -> Result<Vec<Matrix<LaurentPoly>>, QmodError> {
        self.order_check(n_ord)?;
        let id = Matrix::identity(self.n, self.a[0].witness());
        let mut out = Vec::with_capacity(self.r);
        for i in 0..self.r {
            let mut acc = id.clone();
            for k in 1..=n_ord {
                acc = acc.mul(&shift_matrix(&self.a[i], i, &self.q, -(k as i64)));
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// Closed form for a one-term coefficient `c x^m` in rank 1:
/// `q^(m_i N(N-1)/2) c^N x^(N m)`.
fn monomial_curvature(f: &LaurentPoly, i: usize, q: &RingElement, n_ord: usize) -> LaurentPoly {
    let (m, c) = f.terms().next().expect("one-term coefficient");
    let e = m.0[i] as i64 * (n_ord as i64) * (n_ord as i64 - 1) / 2;
    let scale = q.pow_i(e).expect("q is a unit").mul(&c.pow(n_ord as u64));
    let mono = Mono(m.0.iter().map(|&v| v * n_ord as i32).collect());
    LaurentPoly::monomial(f.ring(), f.vars(), mono, &scale)
}

/// The commuting family `C_1..C_r` of a flat q-connection at exact order
/// N, kept both in the original coordinates and, when every entry
/// rewrites, over the central coordinates `X_i = x_i^N`.
#[derive(Clone)]
pub struct QCurvatureFamily {
    n_ord: usize,
    ring: Ring,
    x_vars: Arc<VarSet>,
    cap_vars: Arc<VarSet>,
    r: usize,
    n: usize,
    c_x: Vec<Matrix<LaurentPoly>>,
    c_cap: Option<Vec<Matrix<LaurentPoly>>>,
}

impl std::fmt::Debug for QCurvatureFamily {
    fn fmt(&self, w: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            w,
            "QCurvatureFamily(N={}, r={}, n={}, rewritten={})",
            self.n_ord,
            self.r,
            self.n,
            self.c_cap.is_some()
        )
    }
}

impl QCurvatureFamily {
    pub fn from_x_matrices(
        n_ord: usize,
        x_vars: &Arc<VarSet>,
        c_x: Vec<Matrix<LaurentPoly>>,
    ) -> Result<QCurvatureFamily, QmodError> {
        let r = c_x.len();
        if r == 0 || x_vars.len() != r || n_ord == 0 {
            return Err(QmodError::ShapeMismatch);
        }
        let n = c_x[0].size();
        if c_x.iter().any(|m| m.size() != n) {
            return Err(QmodError::ShapeMismatch);
        }
        let ring = c_x[0].witness().ring().clone();
        let cap_vars = VarSet::numbered("X", r, true);
        let rewritten: Result<Vec<Matrix<LaurentPoly>>, PolyError> = c_x
            .iter()
            .map(|m| m.try_map(|e| e.contract_exponents(n_ord as u64, &cap_vars)))
            .collect();
        Ok(QCurvatureFamily {
            n_ord,
            ring,
            x_vars: x_vars.clone(),
            cap_vars,
            r,
            n,
            c_x,
            c_cap: rewritten.ok(),
        })
    }

    pub fn order(&self) -> usize {
        self.n_ord
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_matrices(&self) -> &[Matrix<LaurentPoly>] {
        &self.c_x
    }

    pub fn cap_matrices(&self) -> Option<&[Matrix<LaurentPoly>]> {
        self.c_cap.as_deref()
    }

    pub fn cap_vars(&self) -> &Arc<VarSet> {
        &self.cap_vars
    }

    fn cap_required(&self) -> Result<&[Matrix<LaurentPoly>], QmodError> {
        self.c_cap.as_deref().ok_or_else(|| {
            QmodError::RewriteFailed("curvature entries do not rewrite over X".into())
        })
    }

    /// Coefficients of the characteristic polynomial of `sum_j t_j C_j`
    /// with formal t's must be fixed by every `T_i`, i.e. every
    /// x-exponent in them must be divisible by N.
    pub fn charpolys_t_invariant(&self) -> bool {
        let r = self.r;
        let t_vars = VarSet::numbered("t", r, false);
        let xt_vars = VarSet::concat(&self.x_vars, &t_vars);
        let x_map: Vec<usize> = (0..r).collect();
        let zero_xt = LaurentPoly::zero(&self.ring, &xt_vars);
        let mut total = Matrix::zero(self.n, &zero_xt);
        for j in 0..r {
            let tj = LaurentPoly::var(&self.ring, &xt_vars, r + j);
            let embedded = self.c_x[j]
                .try_map(|e| e.embed(&xt_vars, &x_map))
                .expect("x roster embeds in (x, t)");
            total = total.add(&embedded.scalar_mul(&tj));
        }
        let n_ord = self.n_ord as i32;
        total.charpoly().iter().all(|coeff| {
            coeff
                .terms()
                .all(|(m, _)| m.0[..r].iter().all(|&e| e % n_ord == 0))
        })
    }

    pub fn eigenvalue_forms(&self, mode: &EigenMode) -> Result<Vec<EigenForm>, QmodError> {
        Ok(eigen_forms_of(self.cap_required()?, self.n, mode)?)
    }
}

/// One failed closedness identity: the pair (1-based) and the two
/// logarithmic derivatives `(X_j/L_i) dL_i/dX_j` and `(X_i/L_j) dL_j/dX_i`
/// that should have agreed.
#[derive(Clone, Debug)]
pub struct QClosednessWitness {
    pub i: usize,
    pub j: usize,
    pub lhs: RatFunc,
    pub rhs: RatFunc,
}

#[derive(Clone, Debug)]
pub struct QLagrangianVerdict {
    pub lagrangian: bool,
    pub witness: Option<QClosednessWitness>,
}

/// Multiplicative closedness of eigenvalue tuples: for every pair i < j,
/// `X_j L_j dL_i/dX_j = X_i L_i dL_j/dX_i`, compared cross-multiplied so
/// no division happens. Zero components are an error rather than a pass,
/// since the identity is vacuous at them.
pub fn is_lagrangian_q(forms: &[EigenForm]) -> Result<QLagrangianVerdict, QmodError> {
    assert!(!forms.is_empty(), "need at least one eigenvalue form");
    for form in forms {
        let lam = form.lambda();
        for l in lam {
            if l.is_zero() {
                return Err(QmodError::ZeroEigenvalue);
            }
        }
        let r = lam.len();
        for i in 0..r {
            for j in i + 1..r {
                let ring = lam[i].num().ring();
                let vars = lam[i].num().vars();
                let xi = RatFunc::from_poly(&LaurentPoly::var(ring, vars, i));
                let xj = RatFunc::from_poly(&LaurentPoly::var(ring, vars, j));
                let di = lam[i].partial(j)?;
                let dj = lam[j].partial(i)?;
                let lhs = xj.mul(&lam[j]).mul(&di);
                let rhs = xi.mul(&lam[i]).mul(&dj);
                if !lhs.eq_cross(&rhs) {
                    let witness = QClosednessWitness {
                        i: i + 1,
                        j: j + 1,
                        lhs: xj.mul(&di).div(&lam[i])?,
                        rhs: xi.mul(&dj).div(&lam[j])?,
                    };
                    return Ok(QLagrangianVerdict { lagrangian: false, witness: Some(witness) });
                }
            }
        }
    }
    Ok(QLagrangianVerdict { lagrangian: true, witness: None })
}

/// Result of checking a would-be lift of a q-connection: flatness
/// upstairs, whether q^N - 1 survives upstairs, and agreement of the
/// reduction with the target.
#[derive(Clone, Debug)]
pub struct QLiftCheck {
    pub flat_over_s: Flatness,
    pub q_n_not_one: bool,
    pub reduction_matches: bool,
    /// First disagreeing entry as (j, row, col), 1-based.
    pub mismatch: Option<(usize, usize, usize)>,
}

pub fn check_lift_q(
    lift: &QConnection,
    map: &ResidueMap,
    target: &QConnection,
    n_ord: usize,
) -> Result<QLiftCheck, QmodError> {
    if lift.r != target.r || lift.n != target.n {
        return Err(QmodError::ShapeMismatch);
    }
    if lift.ring != *map.source() || target.ring != *map.target() {
        return Err(QmodError::Ring(RingError::RingMismatch));
    }
    if map.apply(&lift.q)? != target.q {
        return Err(QmodError::ShapeMismatch);
    }
    let flat_over_s = lift.check_qflat();
    let q_n_not_one = lift.q.pow(n_ord as u64) != lift.ring.one();
    let mut mismatch = None;
    'outer: for j in 0..lift.r {
        for row in 0..lift.n {
            for col in 0..lift.n {
                let reduced = reduce_poly(lift.a[j].at(row, col), map, &target.vars)?;
                if reduced != *target.a[j].at(row, col) {
                    mismatch = Some((j + 1, row + 1, col + 1));
                    break 'outer;
                }
            }
        }
    }
    Ok(QLiftCheck { flat_over_s, q_n_not_one, reduction_matches: mismatch.is_none(), mismatch })
}
