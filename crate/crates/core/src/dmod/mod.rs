//! Flat connections on affine space in characteristic p and everything
//! downstream of their p-curvature: the curvature family itself, the
//! support equations in the center variables (X, P), eigenvalue 1-forms,
//! the closedness test, and lift checking against a residue map.
//!
//! Conventions fixed here and relied on by the CLI and tests:
//! flatness residual for a pair i < j is `d_i(a_j) - d_j(a_i) + [a_i, a_j]`;
//! closedness residual for a pair i < j is `dL_j/dX_i - dL_i/dX_j`;
//! curvature is computed by p-fold application of `M -> d_j(M) + a_j M`
//! to the identity.

use std::sync::Arc;

use thiserror::Error;

use crate::multipoly::{
    rank_bareiss_rows, Entry, LaurentPoly, Matrix, Mono, PolyError, RatFunc, VarSet,
};
use crate::psupport::{PoissonTag, SupportIdeal};
use crate::rings::{IdealBasis, ResidueMap, Ring, RingError};

pub mod weyl;

pub use weyl::WeylElement;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DmodError {
    #[error("connection is not flat")]
    NotFlat,
    #[error("coefficient ring is not a field of prime characteristic")]
    CharZero,
    #[error("X-rewriting failed: {0}")]
    RewriteFailed(String),
    #[error("mode not applicable: {0}")]
    ModeInapplicable(String),
    #[error("candidate rejected: {}", match .j { Some(j) => format!("det(C_j - L_j) is nonzero at j = {}", j + 1), None => "joint kernel is trivial".to_string() })]
    CandidateRejected { j: Option<usize> },
    #[error("connections have different shapes")]
    ShapeMismatch,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A connection `d_j + a_j` on the trivial rank-n bundle over affine
/// r-space, with polynomial coefficient matrices.
#[derive(Clone)]
pub struct Connection {
    ring: Ring,
    vars: Arc<VarSet>,
    r: usize,
    n: usize,
    a: Vec<Matrix<LaurentPoly>>,
}

/// Outcome of a flatness check; `pair` and `witness` name the first
/// nonvanishing residual (1-based indices).
#[derive(Clone, Debug)]
pub struct Flatness {
    pub flat: bool,
    pub pair: Option<(usize, usize)>,
    pub witness: Option<Matrix<LaurentPoly>>,
}

impl Connection {
    pub fn new(ring: &Ring, a: Vec<Matrix<LaurentPoly>>) -> Result<Connection, DmodError> {
        if a.is_empty() {
            return Err(DmodError::ShapeMismatch);
        }
        let n = a[0].size();
        let vars = a[0].witness().vars().clone();
        let r = a.len();
        if vars.len() != r {
            return Err(DmodError::ShapeMismatch);
        }
        for m in &a {
            if m.size() != n {
                return Err(DmodError::ShapeMismatch);
            }
            for i in 0..n {
                for j in 0..n {
                    let e = m.at(i, j);
                    if e.ring() != ring || e.vars() != &vars {
                        return Err(DmodError::Poly(PolyError::RosterMismatch));
                    }
                }
            }
        }
        Ok(Connection { ring: ring.clone(), vars, r, n, a })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
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

    fn residual(&self, i: usize, j: usize) -> Matrix<LaurentPoly> {
        let di_aj = mat_partial(&self.a[j], i);
        let dj_ai = mat_partial(&self.a[i], j);
        let comm = self.a[i].mul(&self.a[j]).sub(&self.a[j].mul(&self.a[i]));
        di_aj.sub(&dj_ai).add(&comm)
    }

    /// All r(r-1)/2 flatness identities, reporting the first failure.
    pub fn check_flat(&self) -> Flatness {
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

    /// Flatness with residuals read modulo an ideal of the coefficient
    /// ring: every coefficient of every residual entry must lie in it.
    pub fn check_flat_mod(&self, ideal: &IdealBasis) -> Flatness {
        for i in 0..self.r {
            for j in i + 1..self.r {
                let res = self.residual(i, j);
                let mut ok = true;
                'scan: for row in 0..self.n {
                    for col in 0..self.n {
                        for (_, c) in res.at(row, col).terms() {
                            if !ideal.contains(c) {
                                ok = false;
                                break 'scan;
                            }
                        }
                    }
                }
                if !ok {
                    return Flatness { flat: false, pair: Some((i + 1, j + 1)), witness: Some(res) };
                }
            }
        }
        Flatness { flat: true, pair: None, witness: None }
    }

    /// Conjugate by g: `a_j -> g a_j g^(-1) - d_j(g) g^(-1)`. The caller
    /// supplies the inverse; it is checked.
    pub fn gauge(&self, g: &Matrix<LaurentPoly>, g_inv: &Matrix<LaurentPoly>) -> Result<Connection, DmodError> {
        let id = Matrix::identity(self.n, self.a[0].witness());
        if g.mul(g_inv) != id {
            return Err(DmodError::ShapeMismatch);
        }
        let a = (0..self.r)
            .map(|j| {
                g.mul(&self.a[j])
                    .mul(g_inv)
                    .sub(&mat_partial(g, j).mul(g_inv))
            })
            .collect();
        Connection::new(&self.ring, a)
    }

    /// The operators `C_j = (d_j + a_j)^p`, which are multiplication
    /// operators when the connection is flat over a field of
    /// characteristic p.
    pub fn p_curvature(&self) -> Result<CurvatureFamily, DmodError> {
        if !self.ring.is_field() {
            return Err(DmodError::CharZero);
        }
        let p = self.ring.characteristic();
        if !self.check_flat().flat {
            return Err(DmodError::NotFlat);
        }
        let id = Matrix::identity(self.n, self.a[0].witness());
        let mut c_x = Vec::with_capacity(self.r);
        for j in 0..self.r {
            let mut m = id.clone();
            for _ in 0..p {
                m = mat_partial(&m, j).add(&self.a[j].mul(&m));
            }
            if self.n == 1 {
                let closed = self.a[j]
                    .at(0, 0)
                    .partial_times(j, (p - 1) as u32)
                    .map_err(DmodError::Poly)?
                    .add(&self.a[j].at(0, 0).pow(p));
                assert_eq!(
                    *m.at(0, 0),
                    closed,
                    "iterated curvature disagrees with the rank-1 closed form"
                );
            }
            c_x.push(m);
        }
        for i in 0..self.r {
            for j in i + 1..self.r {
                assert!(
                    c_x[i].mul(&c_x[j]).sub(&c_x[j].mul(&c_x[i])).is_zero(),
                    "curvature operators of a flat connection must commute"
                );
            }
        }
        CurvatureFamily::from_x_matrices(p, &self.vars, c_x)
    }
}

fn mat_partial(m: &Matrix<LaurentPoly>, i: usize) -> Matrix<LaurentPoly> {
    m.map(|e| e.partial(i).expect("variable index in roster"))
}

/// The commuting family `C_1..C_r` of a flat connection, kept both in the
/// original coordinates and, when every entry rewrites, over the degree-p
/// power coordinates X.
#[derive(Clone)]
pub struct CurvatureFamily {
    p: u64,
    ring: Ring,
    x_vars: Arc<VarSet>,
    cap_vars: Arc<VarSet>,
    r: usize,
    n: usize,
    c_x: Vec<Matrix<LaurentPoly>>,
    c_cap: Option<Vec<Matrix<LaurentPoly>>>,
}

impl std::fmt::Debug for CurvatureFamily {
    fn fmt(&self, w: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(w, "CurvatureFamily(p={}, r={}, n={}, rewritten={})", self.p, self.r, self.n, self.c_cap.is_some())
    }
}

impl CurvatureFamily {
    pub fn from_x_matrices(
        p: u64,
        x_vars: &Arc<VarSet>,
        c_x: Vec<Matrix<LaurentPoly>>,
    ) -> Result<CurvatureFamily, DmodError> {
        let r = c_x.len();
        if r == 0 || x_vars.len() != r {
            return Err(DmodError::ShapeMismatch);
        }
        let n = c_x[0].size();
        if c_x.iter().any(|m| m.size() != n) {
            return Err(DmodError::ShapeMismatch);
        }
        let ring = c_x[0].witness().ring().clone();
        let cap_vars = VarSet::numbered("X", r, false);
        let rewritten: Result<Vec<Matrix<LaurentPoly>>, PolyError> = c_x
            .iter()
            .map(|m| m.try_map(|e| e.contract_exponents(p, &cap_vars)))
            .collect();
        Ok(CurvatureFamily {
            p,
            ring,
            x_vars: x_vars.clone(),
            cap_vars,
            r,
            n,
            c_x,
            c_cap: rewritten.ok(),
        })
    }

    /// Family given directly over X; the x-form is recovered by the
    /// substitution `X_i = x_i^p`.
    pub fn from_cap_matrices(
        p: u64,
        c_cap: Vec<Matrix<LaurentPoly>>,
    ) -> Result<CurvatureFamily, DmodError> {
        let r = c_cap.len();
        if r == 0 {
            return Err(DmodError::ShapeMismatch);
        }
        let x_vars = VarSet::numbered("x", r, false);
        let c_x: Vec<Matrix<LaurentPoly>> = c_cap
            .iter()
            .map(|m| {
                m.map(|e| {
                    let mut out = LaurentPoly::zero(e.ring(), &x_vars);
                    for (mono, c) in e.terms() {
                        let scaled = Mono(mono.0.iter().map(|&v| v * p as i32).collect());
                        out = out.add(&LaurentPoly::monomial(e.ring(), &x_vars, scaled, c));
                    }
                    out
                })
            })
            .collect();
        let fam = CurvatureFamily::from_x_matrices(p, &x_vars, c_x)?;
        for i in 0..fam.r {
            for j in i + 1..fam.r {
                assert!(
                    fam.c_x[i].mul(&fam.c_x[j]).sub(&fam.c_x[j].mul(&fam.c_x[i])).is_zero(),
                    "curvature family must commute pairwise"
                );
            }
        }
        Ok(fam)
    }

    pub fn p(&self) -> u64 {
        self.p
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

    fn cap_required(&self) -> Result<&[Matrix<LaurentPoly>], DmodError> {
        self.c_cap.as_deref().ok_or_else(|| {
            DmodError::RewriteFailed("curvature entries do not rewrite over X".into())
        })
    }

    /// Characteristic polynomial of `sum_j t_j C_j` with `lambda` replaced
    /// by `sum_j t_j P_j`, expanded and sorted by t-monomial: the defining
    /// equations of the support inside Spec k[X, P].
    pub fn support_equations(&self) -> Result<SupportIdeal, DmodError> {
        let r = self.r;
        let t_vars = VarSet::numbered("t", r, false);
        let xt_vars = VarSet::concat(&self.x_vars, &t_vars);
        let x_map: Vec<usize> = (0..r).collect();
        let zero_xt = LaurentPoly::zero(&self.ring, &xt_vars);
        let mut total = Matrix::zero(self.n, &zero_xt);
        for j in 0..r {
            let tj = LaurentPoly::var(&self.ring, &xt_vars, r + j);
            let embedded = self.c_x[j].try_map(|e| e.embed(&xt_vars, &x_map))?;
            total = total.add(&embedded.scalar_mul(&tj));
        }
        let chi = total.charpoly();

        // Ambient (X_1..X_r, t_1..t_r, P_1..P_r); the t block is split off
        // at the end.
        let p_vars = VarSet::numbered("P", r, false);
        let ambient = VarSet::concat(&VarSet::concat(&self.cap_vars, &t_vars), &p_vars);
        let mut lam = LaurentPoly::zero(&self.ring, &ambient);
        for j in 0..r {
            let tj = LaurentPoly::var(&self.ring, &ambient, r + j);
            let pj = LaurentPoly::var(&self.ring, &ambient, 2 * r + j);
            lam = lam.add(&tj.mul(&pj));
        }
        let mut full = LaurentPoly::zero(&self.ring, &ambient);
        for (k, ck) in chi.iter().enumerate() {
            let rewritten = self.rewrite_xt(ck, &ambient)?;
            full = full.add(&rewritten.mul(&lam.pow((self.n - k) as u64)));
        }

        let xp_vars = VarSet::concat(&self.cap_vars, &p_vars);
        let t_idx: Vec<usize> = (r..2 * r).collect();
        // t_1-dominant t-monomials first.
        let gens: Vec<LaurentPoly> = full
            .coefficients_on(&t_idx, &xp_vars)
            .into_iter()
            .rev()
            .map(|(_, g)| g)
            .collect();
        SupportIdeal::new(&xp_vars, gens, PoissonTag::Canonical, r).map_err(|e| {
            DmodError::RewriteFailed(format!("support ideal rejected: {e}"))
        })
    }

    /// Rewrite a charpoly coefficient from (x, t) to the support ambient:
    /// x-exponents contract by p into X, t-exponents pass through.
    fn rewrite_xt(
        &self,
        f: &LaurentPoly,
        ambient: &Arc<VarSet>,
    ) -> Result<LaurentPoly, DmodError> {
        let r = self.r;
        let p = self.p as i32;
        let mut out = LaurentPoly::zero(&self.ring, ambient);
        for (m, c) in f.terms() {
            let mut e = vec![0i32; ambient.len()];
            for i in 0..r {
                if m.0[i] % p != 0 {
                    return Err(DmodError::RewriteFailed(format!(
                        "invariant coefficient has {}-exponent {} not divisible by {}",
                        self.x_vars.name(i),
                        m.0[i],
                        p
                    )));
                }
                e[i] = m.0[i] / p;
            }
            for i in 0..r {
                e[r + i] = m.0[r + i];
            }
            out = out.add(&LaurentPoly::monomial(&self.ring, ambient, Mono(e), c));
        }
        Ok(out)
    }

    pub fn eigenvalue_forms(&self, mode: &EigenMode) -> Result<Vec<EigenForm>, DmodError> {
        eigen_forms_of(self.cap_required()?, self.n, mode)
    }

    /// The tuple of traces over X. This is n times the mean eigenvalue
    /// form, so it only probes closedness when n is a unit in k; it is
    /// exempt from the per-component characteristic-polynomial check.
    pub fn trace_form(&self) -> Result<EigenForm, DmodError> {
        let lambda: Vec<RatFunc> = self
            .c_x
            .iter()
            .map(|m| {
                m.trace()
                    .contract_exponents(self.p, &self.cap_vars)
                    .map(|f| RatFunc::from_poly(&f))
                    .map_err(|e| DmodError::RewriteFailed(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(EigenForm { lambda, multiplicity: self.n, provenance: Provenance::TraceMean })
    }
}

/// Eigenvalue extraction shared by the differential and q curvature
/// families: everything is read off the X-form matrices.
pub(crate) fn eigen_forms_of(
    cap: &[Matrix<LaurentPoly>],
    n: usize,
    mode: &EigenMode,
) -> Result<Vec<EigenForm>, DmodError> {
    let r = cap.len();
    match mode {
        EigenMode::Rank1 => {
            if n != 1 {
                return Err(DmodError::ModeInapplicable(format!(
                    "rank1 mode needs n = 1, got n = {n}"
                )));
            }
            let lambda: Vec<RatFunc> =
                cap.iter().map(|m| RatFunc::from_poly(m.at(0, 0))).collect();
            Ok(vec![EigenForm::verified(cap, lambda, 1, Provenance::Rank1)?])
        }
        EigenMode::Triangular => {
            for (j, m) in cap.iter().enumerate() {
                for row in 0..n {
                    for col in 0..row {
                        if !m.at(row, col).is_zero() {
                            return Err(DmodError::ModeInapplicable(format!(
                                "C_{} is not upper triangular as given",
                                j + 1
                            )));
                        }
                    }
                }
            }
            let mut tuples: Vec<(Vec<LaurentPoly>, usize)> = Vec::new();
            for i in 0..n {
                let tuple: Vec<LaurentPoly> = cap.iter().map(|m| m.at(i, i).clone()).collect();
                match tuples.iter_mut().find(|(t, _)| *t == tuple) {
                    Some((_, count)) => *count += 1,
                    None => tuples.push((tuple, 1)),
                }
            }
            tuples
                .into_iter()
                .map(|(t, m)| {
                    let lambda = t.iter().map(RatFunc::from_poly).collect();
                    EigenForm::verified(cap, lambda, m, Provenance::Triangular)
                })
                .collect()
        }
        EigenMode::Verify(candidates) => {
            let mut out = Vec::with_capacity(candidates.len());
            for cand in candidates {
                if cand.len() != r {
                    return Err(DmodError::ShapeMismatch);
                }
                let mut stacked: Vec<Vec<LaurentPoly>> = Vec::new();
                for (j, m) in cap.iter().enumerate() {
                    let shifted =
                        m.map(|e| RatFunc::from_poly(e)).sub(&Matrix::scalar(n, &cand[j]));
                    if !shifted.det().is_zero() {
                        return Err(DmodError::CandidateRejected { j: Some(j) });
                    }
                    stacked.extend(shifted.clear_denominators().rows());
                }
                let rank = rank_bareiss_rows(stacked)?;
                if rank >= n {
                    return Err(DmodError::CandidateRejected { j: None });
                }
                out.push(EigenForm::verified(
                    cap,
                    cand.clone(),
                    n - rank,
                    Provenance::UserVerified,
                )?);
            }
            Ok(out)
        }
    }
}

#[derive(Clone, Debug)]
pub enum EigenMode {
    Rank1,
    Triangular,
    Verify(Vec<Vec<RatFunc>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Rank1,
    Triangular,
    UserVerified,
    TraceMean,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Rank1 => "rank1",
            Provenance::Triangular => "triangular",
            Provenance::UserVerified => "user_verified",
            Provenance::TraceMean => "trace_mean",
        }
    }
}

/// A candidate eigenvalue tuple `(L_1..L_r)` over the X coordinates with
/// its eigenspace multiplicity.
#[derive(Clone)]
pub struct EigenForm {
    lambda: Vec<RatFunc>,
    multiplicity: usize,
    provenance: Provenance,
}

impl std::fmt::Debug for EigenForm {
    fn fmt(&self, w: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.lambda.iter().map(|l| l.to_string()).collect();
        write!(w, "EigenForm(({}), m={}, {})", parts.join(", "), self.multiplicity, self.provenance.as_str())
    }
}

impl EigenForm {
    /// All provenances except trace_mean must satisfy
    /// `charpoly_j(L_j) = 0` componentwise; enforced here.
    pub(crate) fn verified(
        cap: &[Matrix<LaurentPoly>],
        lambda: Vec<RatFunc>,
        multiplicity: usize,
        provenance: Provenance,
    ) -> Result<EigenForm, DmodError> {
        for (j, (m, lam)) in cap.iter().zip(&lambda).enumerate() {
            let chi = m.map(|e| RatFunc::from_poly(e)).charpoly();
            let mut value = chi[0].zero_of();
            for c in &chi {
                value = value.mul(lam).add(c);
            }
            if !value.is_zero() {
                return Err(DmodError::CandidateRejected { j: Some(j) });
            }
        }
        Ok(EigenForm { lambda, multiplicity, provenance })
    }

    pub fn lambda(&self) -> &[RatFunc] {
        &self.lambda
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Closedness of every 1-form `sum_j L_j dX_j`: mixed partials must
/// agree. The witness reports 1-based `(i, j)` and `dL_j/dX_i - dL_i/dX_j`.
#[derive(Clone, Debug)]
pub struct LagrangianVerdict {
    pub lagrangian: bool,
    pub witness: Option<(usize, usize, RatFunc)>,
}

pub fn is_lagrangian_differential(forms: &[EigenForm]) -> LagrangianVerdict {
    assert!(!forms.is_empty(), "need at least one eigenvalue form");
    for form in forms {
        let r = form.lambda.len();
        for i in 0..r {
            for j in i + 1..r {
                let lhs = form.lambda[i].partial(j).expect("X_j in roster");
                let rhs = form.lambda[j].partial(i).expect("X_i in roster");
                if !lhs.eq_cross(&rhs) {
                    return LagrangianVerdict {
                        lagrangian: false,
                        witness: Some((i + 1, j + 1, rhs.sub(&lhs))),
                    };
                }
            }
        }
    }
    LagrangianVerdict { lagrangian: true, witness: None }
}

/// Result of checking a would-be lift: flatness upstairs and agreement of
/// the reduction with the target connection.
#[derive(Clone, Debug)]
pub struct LiftCheck {
    pub flat_over_s: Flatness,
    pub reduction_matches: bool,
    /// First disagreeing entry as (j, row, col), 1-based.
    pub mismatch: Option<(usize, usize, usize)>,
}

pub fn check_lift(
    lift: &Connection,
    map: &ResidueMap,
    target: &Connection,
) -> Result<LiftCheck, DmodError> {
    if lift.r != target.r || lift.n != target.n {
        return Err(DmodError::ShapeMismatch);
    }
    if lift.ring != *map.source() || target.ring != *map.target() {
        return Err(DmodError::Ring(RingError::RingMismatch));
    }
    let flat_over_s = lift.check_flat();
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
    Ok(LiftCheck { flat_over_s, reduction_matches: mismatch.is_none(), mismatch })
}

/// Reduce every coefficient through the residue map.
pub fn reduce_poly(
    f: &LaurentPoly,
    map: &ResidueMap,
    target_vars: &Arc<VarSet>,
) -> Result<LaurentPoly, DmodError> {
    let mut out = LaurentPoly::zero(map.target(), target_vars);
    for (m, c) in f.terms() {
        let rc = map.apply(c)?;
        out = out.add(&LaurentPoly::monomial(map.target(), target_vars, m.clone(), &rc));
    }
    Ok(out)
}
