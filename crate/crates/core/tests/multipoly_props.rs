//! Randomized algebraic laws for the polynomial layer. Seeds are fixed so
//! failures replay.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use psl_core::multipoly::{LaurentPoly, Matrix, VarSet};
use psl_core::rings::Ring;

fn random_poly(
    rng: &mut ChaCha8Rng,
    ring: &Ring,
    vars: &Arc<VarSet>,
    max_terms: usize,
    max_deg: i32,
    laurent: bool,
) -> LaurentPoly {
    let mut f = LaurentPoly::zero(ring, vars);
    let nterms = rng.gen_range(0..=max_terms);
    for _ in 0..nterms {
        let mono = psl_core::multipoly::Mono(
            (0..vars.len())
                .map(|_| {
                    if laurent {
                        rng.gen_range(-max_deg..=max_deg)
                    } else {
                        rng.gen_range(0..=max_deg)
                    }
                })
                .collect(),
        );
        let c = ring.int(rng.gen_range(0..ring.modulus()) as i64);
        f = f.add(&LaurentPoly::monomial(ring, vars, mono, &c));
    }
    f
}

#[test]
fn product_rule_holds() {
    for p in [3u64, 5, 7] {
        let ring = Ring::prime_field(p).unwrap();
        let vars = VarSet::numbered("x", 3, false);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001 + p);
        for _ in 0..500 {
            let f = random_poly(&mut rng, &ring, &vars, 5, 4, false);
            let g = random_poly(&mut rng, &ring, &vars, 5, 4, false);
            let i = rng.gen_range(0..3);
            let lhs = f.mul(&g).partial(i).unwrap();
            let rhs = f.partial(i).unwrap().mul(&g).add(&f.mul(&g.partial(i).unwrap()));
            assert_eq!(lhs, rhs, "d(fg) = f'g + fg' failed at p = {p}");
        }
    }
}

#[test]
fn q_shift_is_a_ring_homomorphism() {
    let ring = Ring::prime_field(7).unwrap();
    let vars = VarSet::numbered("x", 2, true);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for _ in 0..500 {
        let f = random_poly(&mut rng, &ring, &vars, 4, 3, true);
        let g = random_poly(&mut rng, &ring, &vars, 4, 3, true);
        let q = ring.int(rng.gen_range(1..7) as i64);
        let i = rng.gen_range(0..2);
        assert_eq!(
            f.mul(&g).q_shift(i, &q).unwrap(),
            f.q_shift(i, &q).unwrap().mul(&g.q_shift(i, &q).unwrap())
        );
        assert_eq!(
            f.add(&g).q_shift(i, &q).unwrap(),
            f.q_shift(i, &q).unwrap().add(&g.q_shift(i, &q).unwrap())
        );
    }
}

#[test]
fn q_shift_order_n_composes_to_identity() {
    // q = 2 has order 3 in F_7; q = 3 has order 6 in F_7; q = 2 has order 4
    // in F_5.
    for (p, q, n) in [(7u64, 2i64, 3u32), (7, 3, 6), (5, 2, 4)] {
        let ring = Ring::prime_field(p).unwrap();
        let vars = VarSet::numbered("x", 2, true);
        let q = ring.int(q);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003 + p);
        for _ in 0..100 {
            let f = random_poly(&mut rng, &ring, &vars, 5, 4, true);
            let mut g = f.clone();
            for _ in 0..n {
                g = g.q_shift(0, &q).unwrap();
            }
            assert_eq!(g, f, "T^{n} with ord(q) = {n} must be the identity");
        }
    }
}

#[test]
fn frobenius_twist_is_a_ring_homomorphism() {
    for p in [3u64, 5, 7] {
        let ring = Ring::prime_field(p).unwrap();
        let vars = VarSet::numbered("x", 2, false);
        let caps = VarSet::numbered("X", 2, false);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004 + p);
        for _ in 0..500 {
            let f = random_poly(&mut rng, &ring, &vars, 4, 3, false);
            let g = random_poly(&mut rng, &ring, &vars, 4, 3, false);
            assert_eq!(
                f.mul(&g).frobenius_twist(p, &caps).unwrap(),
                f.frobenius_twist(p, &caps)
                    .unwrap()
                    .mul(&g.frobenius_twist(p, &caps).unwrap())
            );
            assert_eq!(
                f.add(&g).frobenius_twist(p, &caps).unwrap(),
                f.frobenius_twist(p, &caps)
                    .unwrap()
                    .add(&g.frobenius_twist(p, &caps).unwrap())
            );
        }
    }
}

fn det_cofactor(m: &Matrix<LaurentPoly>) -> LaurentPoly {
    let n = m.size();
    if n == 1 {
        return m.at(0, 0).clone();
    }
    let mut acc = LaurentPoly::zero(m.at(0, 0).ring(), m.at(0, 0).vars());
    for j in 0..n {
        let mut rows = Vec::with_capacity(n - 1);
        for i in 1..n {
            let mut row = Vec::with_capacity(n - 1);
            for jj in 0..n {
                if jj != j {
                    row.push(m.at(i, jj).clone());
                }
            }
            rows.push(row);
        }
        let minor = det_cofactor(&Matrix::from_rows(rows).unwrap());
        let term = m.at(0, j).mul(&minor);
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

#[test]
fn berkowitz_det_matches_cofactor_expansion() {
    let ring = Ring::prime_field(5).unwrap();
    let vars = VarSet::numbered("x", 2, false);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    for case in 0..100 {
        let n = rng.gen_range(1..=4);
        let rows: Vec<Vec<LaurentPoly>> = (0..n)
            .map(|_| (0..n).map(|_| random_poly(&mut rng, &ring, &vars, 3, 2, false)).collect())
            .collect();
        let m = Matrix::from_rows(rows).unwrap();
        assert_eq!(m.det(), det_cofactor(&m), "case {case}, size {n}");
    }
}

#[test]
fn charpoly_satisfied_by_matrix() {
    // Cayley-Hamilton as a smoke test of the Berkowitz coefficients.
    let ring = Ring::prime_field(5).unwrap();
    let vars = VarSet::numbered("x", 2, false);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    for _ in 0..25 {
        let n = rng.gen_range(1..=3);
        let rows: Vec<Vec<LaurentPoly>> = (0..n)
            .map(|_| (0..n).map(|_| random_poly(&mut rng, &ring, &vars, 2, 2, false)).collect())
            .collect();
        let m = Matrix::from_rows(rows).unwrap();
        let chi = m.charpoly();
        let zero = LaurentPoly::zero(&ring, &vars);
        let mut acc = Matrix::zero(n, &zero);
        for c in &chi {
            acc = acc.mul(&m).add(&Matrix::scalar(n, c));
        }
        assert!(acc.is_zero(), "chi(M) must vanish");
    }
}
