//! Lift-checking fixtures over the local ring (Z/9)[u]/(u^2 - 3): a naive
//! entrywise lift of the monomial connection fails flatness outright,
//! while the twisted rank-3 lift fails strict flatness by a residual in
//! (u^3) and reduces to three copies of the monomial connection.

use std::sync::Arc;

use psl_core::dmod::{check_lift, Connection};
use psl_core::multipoly::{parse_poly, LaurentPoly, Matrix, Mono, VarSet};
use psl_core::rings::{ResidueMap, Ring};

fn grid(ring: &Ring, vars: &Arc<VarSet>, rows: &[&[&str]]) -> Matrix<LaurentPoly> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|s| parse_poly(s, ring, vars).unwrap()).collect())
            .collect(),
    )
    .unwrap()
}

fn local_base() -> Ring {
    let z9 = Ring::integer_residue(9).unwrap();
    let s = Ring::monic_quotient(&z9, &[-3, 0, 1]).unwrap();
    let u = s.gen_u().unwrap();
    s.declare_maximal_ideal(&[u]).unwrap()
}

/// The twisted rank-3 lift: a_1 = -u x1^2 t^(-1) d, a_2 = x1^3 x2^2 (1 -
/// 3 E_33) + u x2^2 t, with t the cyclic shift and d = diag(0,1,2).
fn twisted_lift(s: &Ring, vars: &Arc<VarSet>) -> Connection {
    let a1 = grid(
        s,
        vars,
        &[
            &["0", "-u*x1^2", "0"],
            &["0", "0", "-2*u*x1^2"],
            &["0", "0", "0"],
        ],
    );
    let a2 = grid(
        s,
        vars,
        &[
            &["x1^3*x2^2", "0", "u*x2^2"],
            &["u*x2^2", "x1^3*x2^2", "0"],
            &["0", "u*x2^2", "-2*x1^3*x2^2"],
        ],
    );
    Connection::new(s, vec![a1, a2]).unwrap()
}

#[test]
fn twisted_lift_fails_strict_flatness_by_a_cube_residual() {
    let s = local_base();
    let vars = VarSet::numbered("x", 2, false);
    let lift = twisted_lift(&s, &vars);

    let fl = lift.check_flat();
    assert!(!fl.flat);
    assert_eq!(fl.pair, Some((1, 2)));
    let witness = fl.witness.unwrap();
    // Residual concentrates in one entry: 6u x1^5 x2^2 at row 2, col 3.
    let u = s.gen_u().unwrap();
    let six_u = u.mul_int(6);
    let expect = LaurentPoly::monomial(&s, &vars, Mono(vec![5, 2]), &six_u);
    for i in 0..3 {
        for j in 0..3 {
            if (i, j) == (1, 2) {
                assert_eq!(*witness.at(i, j), expect);
            } else {
                assert!(witness.at(i, j).is_zero());
            }
        }
    }

    // 6u lies in (u^3) = {0, 3u, 6u}, so the lift is flat modulo cubes
    // of the maximal ideal but not modulo (u^4) = (0).
    assert!(lift.check_flat_mod(&s.ideal(&[u.pow(3)])).flat);
    assert!(!lift.check_flat_mod(&s.ideal(&[u.pow(4)])).flat);
}

#[test]
fn twisted_lift_reduces_to_three_monomial_copies() {
    let s = local_base();
    let k = Ring::prime_field(3).unwrap();
    let vars = VarSet::numbered("x", 2, false);
    let lift = twisted_lift(&s, &vars);

    let tvars = VarSet::numbered("x", 2, false);
    let z = "0";
    let m = "x1^3*x2^2";
    let target = Connection::new(
        &k,
        vec![
            grid(&k, &tvars, &[&[z, z, z], &[z, z, z], &[z, z, z]]),
            grid(&k, &tvars, &[&[m, z, z], &[z, m, z], &[z, z, m]]),
        ],
    )
    .unwrap();
    assert!(target.check_flat().flat);

    let map = ResidueMap::new(&s, &k, &k.zero()).unwrap();
    let out = check_lift(&lift, &map, &target).unwrap();
    assert!(!out.flat_over_s.flat);
    assert!(out.reduction_matches);
    assert_eq!(out.mismatch, None);

    // Downstairs the diagonal blocks each carry the monomial curvature.
    let fam = target.p_curvature().unwrap();
    let cap = fam.cap_matrices().unwrap();
    assert!(cap[0].is_zero());
    for i in 0..3 {
        assert_eq!(cap[1].at(i, i).to_string(), "-X1 + X1^3*X2^2");
    }
}

#[test]
fn naive_entrywise_lift_is_not_flat_anywhere_useful() {
    // Reusing the F_3 formulas over Z/9 leaves the residual 3 x1^2 x2^2,
    // which survives even modulo (3)^2 = (9) = (0) but dies modulo (3).
    let z9 = Ring::integer_residue(9).unwrap();
    let z9 = z9.declare_maximal_ideal(&[z9.int(3)]).unwrap();
    let vars = VarSet::numbered("x", 2, false);
    let naive = Connection::new(
        &z9,
        vec![
            grid(&z9, &vars, &[&["0"]]),
            grid(&z9, &vars, &[&["x1^3*x2^2"]]),
        ],
    )
    .unwrap();
    let fl = naive.check_flat();
    assert!(!fl.flat);
    assert_eq!(fl.witness.unwrap().at(0, 0).to_string(), "3*x1^2*x2^2");
    let three = z9.ideal(&[z9.int(3)]);
    assert!(naive.check_flat_mod(&three).flat);
}
