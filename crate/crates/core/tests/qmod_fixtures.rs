//! Rank-3 lift fixtures for q-connections built from a sixth root of
//! unity u: the x coefficient is diag(1, u^2, u^4), the y coefficient is
//! x1^2 times the cyclic shift. The pair is exactly flat wherever
//! u^6 = 1, the designated q = u only squares to 1 after reduction to
//! F_3, and the reduced curvature family fails the closedness test.

use std::sync::Arc;

use psl_core::dmod::EigenMode;
use psl_core::multipoly::{parse_poly, LaurentPoly, Matrix, RatFunc, VarSet};
use psl_core::qmod::{check_lift_q, is_lagrangian_q, QConnection};
use psl_core::rings::{ResidueMap, Ring};

fn grid(ring: &Ring, vars: &Arc<VarSet>, rows: &[&[&str]]) -> Matrix<LaurentPoly> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|t| parse_poly(t, ring, vars).unwrap()).collect())
        .collect();
    Matrix::from_rows(rows).unwrap()
}

/// (Z/9)[u]/(u^2 - u + 1), local with maximal ideal (u - 2, 3); u has
/// multiplicative order 6 and reduces to 2 in F_3.
fn nine_base() -> Ring {
    let z9 = Ring::integer_residue(9).unwrap();
    let s = Ring::monic_quotient(&z9, &[1, -1, 1]).unwrap();
    let u = s.element(&[0, 1]);
    let three = s.int(3);
    s.declare_maximal_ideal(&[u.sub(&s.int(2)), three]).unwrap()
}

/// F_3[u]/(u^2 - u + 1) = F_3[u]/((u - 2)^2), local with maximal ideal
/// (u - 2).
fn three_base() -> Ring {
    let f3 = Ring::prime_field(3).unwrap();
    let s = Ring::monic_quotient(&f3, &[1, -1, 1]).unwrap();
    let u = s.element(&[0, 1]);
    s.declare_maximal_ideal(&[u.sub(&s.int(2))]).unwrap()
}

fn shift_lift(s: &Ring, vars: &Arc<VarSet>) -> QConnection {
    let a_x = grid(s, vars, &[
        &["1", "0", "0"],
        &["0", "u^2", "0"],
        &["0", "0", "u^4"],
    ]);
    let a_y = grid(s, vars, &[
        &["0", "0", "x1^2"],
        &["x1^2", "0", "0"],
        &["0", "x1^2", "0"],
    ]);
    let u = s.gen_u().unwrap();
    QConnection::new(s, &u, vec![a_x, a_y]).unwrap()
}

fn reduced_target(vars: &Arc<VarSet>) -> (Ring, QConnection) {
    let f3 = Ring::prime_field(3).unwrap();
    let a_x = grid(&f3, vars, &[
        &["1", "0", "0"],
        &["0", "1", "0"],
        &["0", "0", "1"],
    ]);
    let a_y = grid(&f3, vars, &[
        &["0", "0", "x1^2"],
        &["x1^2", "0", "0"],
        &["0", "x1^2", "0"],
    ]);
    let conn = QConnection::new(&f3, &f3.int(2), vec![a_x, a_y]).unwrap();
    (f3, conn)
}

#[test]
fn lift_over_nine_is_flat_and_reduces() {
    let s = nine_base();
    let vars = VarSet::numbered("x", 2, true);
    let lift = shift_lift(&s, &vars);
    let (f3, target) = reduced_target(&vars);

    let u = s.gen_u().unwrap();
    assert_eq!(u.pow(6), s.one());
    assert_ne!(u.pow(3), s.one());

    let map = ResidueMap::new(&s, &f3, &f3.int(2)).unwrap();
    let check = check_lift_q(&lift, &map, &target, 2).unwrap();
    assert!(check.flat_over_s.flat, "exactly flat, not just modulo the ideal");
    assert!(check.q_n_not_one, "u^2 = u - 1 is not 1 upstairs");
    assert!(check.reduction_matches);
    assert_eq!(check.mismatch, None);
}

#[test]
fn lift_over_three_sees_a_nilpotent_obstruction() {
    let s = three_base();
    let vars = VarSet::numbered("x", 2, true);
    let lift = shift_lift(&s, &vars);
    let (f3, target) = reduced_target(&vars);

    // q^2 - 1 = u - 2 is nonzero but squares to zero.
    let u = s.gen_u().unwrap();
    let obstruction = u.mul(&u).sub(&s.one());
    assert_eq!(obstruction, u.sub(&s.int(2)));
    assert!(!obstruction.is_zero());
    assert!(obstruction.mul(&obstruction).is_zero());

    let map = ResidueMap::new(&s, &f3, &f3.int(2)).unwrap();
    let check = check_lift_q(&lift, &map, &target, 2).unwrap();
    assert!(check.flat_over_s.flat);
    assert!(check.q_n_not_one);
    assert!(check.reduction_matches);
}

#[test]
fn lift_has_its_own_curvature_at_order_six() {
    let s = nine_base();
    let vars = VarSet::numbered("x", 2, true);
    let lift = shift_lift(&s, &vars);

    // Neither coefficient depends on its own variable, so C_i is just the
    // sixth power: a_x^6 = 1 and (x1^2 sigma)^6 = x1^12.
    let fam = lift.n_curvature(6).unwrap();
    let cap = fam.cap_matrices().unwrap();
    let one = LaurentPoly::one(&s, fam.cap_vars());
    assert_eq!(cap[0], Matrix::identity(3, &one));
    let x1_sq = parse_poly("X1^2", &s, fam.cap_vars()).unwrap();
    assert_eq!(cap[1], Matrix::scalar(3, &x1_sq));
}

#[test]
fn reduced_curvature_fails_closedness() {
    let vars = VarSet::numbered("x", 2, true);
    let (f3, target) = reduced_target(&vars);

    let fam = target.n_curvature(2).unwrap();
    let cap = fam.cap_matrices().unwrap();
    let one = LaurentPoly::one(&f3, fam.cap_vars());
    assert_eq!(cap[0], Matrix::identity(3, &one));
    // C_y = x1^4 sigma^2 rewrites to X1^2 times the double shift.
    assert_eq!(
        cap[1],
        grid(&f3, fam.cap_vars(), &[
            &["0", "X1^2", "0"],
            &["0", "0", "X1^2"],
            &["X1^2", "0", "0"],
        ])
    );

    let candidate = vec![vec![
        RatFunc::from_poly(&LaurentPoly::one(&f3, fam.cap_vars())),
        RatFunc::from_poly(&parse_poly("X1^2", &f3, fam.cap_vars()).unwrap()),
    ]];
    let forms = fam.eigenvalue_forms(&EigenMode::Verify(candidate)).unwrap();
    assert_eq!(forms.len(), 1);
    assert_eq!(forms[0].multiplicity(), 1);

    let verdict = is_lagrangian_q(&forms).unwrap();
    assert!(!verdict.lagrangian);
    let w = verdict.witness.unwrap();
    assert_eq!((w.i, w.j), (1, 2));
    assert!(w.lhs.is_zero());
    let two = RatFunc::from_poly(&LaurentPoly::int(&f3, fam.cap_vars(), 2));
    assert!(w.rhs.eq_cross(&two));
}
