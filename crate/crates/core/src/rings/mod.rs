//! Coefficient rings: prime fields `F_p`, residue rings `Z/m`, and monic
//! univariate quotients `(Z/m)[u]/(f)` used as local Artinian lift rings.
//!
//! Elements are canonical coefficient vectors in the power basis of `u`.
//! Inversion over a field base goes through the polynomial extended gcd;
//! over a composite base it goes through the characteristic polynomial of
//! the multiplication-by-element matrix, so no coefficient division is
//! ever attempted in a non-field base.

use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub mod ideal;

pub use ideal::IdealBasis;

/// Moduli are capped so that all intermediate lattice arithmetic fits i128.
pub const MAX_MODULUS: u64 = (1 << 31) - 1;

/// Locality declarations are verified by enumerating the quotient; refuse
/// quotients larger than this rather than silently trusting the caller.
const MAX_LOCALITY_ENUM: u128 = 1 << 20;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus must lie in 2..=2^31-1, got {0}")]
    BadModulus(u64),
    #[error("quotient polynomial must be monic of degree >= 1")]
    NotMonic,
    #[error("bad locality declaration: {0}")]
    BadLocality(String),
    #[error("element is not invertible")]
    NotInvertible,
    #[error("elements belong to different rings")]
    RingMismatch,
    #[error("ring has no quotient generator u")]
    NoGenerator,
    #[error("bad residue map: {0}")]
    BadResidueMap(String),
    #[error("source ring is not local: declare a maximal ideal first")]
    NotLocal,
}

#[derive(Debug)]
struct RingRepr {
    modulus: u64,
    /// The base ring was requested as a prime field (affects inversion path).
    base_prime: bool,
    degree: usize,
    /// Quotient polynomial, ascending coefficients, `f[degree] == 1`.
    /// Empty for base rings.
    f: Vec<u64>,
    /// Reduction rule `u^degree = sum reduction[i] u^i`.
    reduction: Vec<u64>,
    is_field: bool,
    /// Declared and verified maximal ideal generators (coefficient vectors).
    maximal_ideal: Vec<Vec<u64>>,
}

/// A coefficient ring. Cheap to clone; equality compares arithmetic
/// structure (modulus and quotient rule), not locality declarations.
#[derive(Clone)]
pub struct Ring {
    repr: Arc<RingRepr>,
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.repr.modulus == other.repr.modulus
            && self.repr.degree == other.repr.degree
            && self.repr.reduction == other.repr.reduction
    }
}
impl Eq for Ring {}

impl fmt::Debug for Ring {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.repr.degree == 1 {
            write!(w, "Z/{}", self.repr.modulus)
        } else {
            write!(w, "(Z/{})[u]/(f), deg f = {}", self.repr.modulus, self.repr.degree)
        }
    }
}

impl Ring {
    pub fn prime_field(p: u64) -> Result<Ring, RingError> {
        if !(2..=MAX_MODULUS).contains(&p) {
            return Err(RingError::BadModulus(p));
        }
        if !is_prime_u64(p) {
            return Err(RingError::NotPrime(p));
        }
        Ok(Ring {
            repr: Arc::new(RingRepr {
                modulus: p,
                base_prime: true,
                degree: 1,
                f: vec![],
                reduction: vec![],
                is_field: true,
                maximal_ideal: vec![],
            }),
        })
    }

    pub fn integer_residue(m: u64) -> Result<Ring, RingError> {
        if !(2..=MAX_MODULUS).contains(&m) {
            return Err(RingError::BadModulus(m));
        }
        Ok(Ring {
            repr: Arc::new(RingRepr {
                modulus: m,
                base_prime: false,
                degree: 1,
                f: vec![],
                reduction: vec![],
                is_field: is_prime_u64(m),
                maximal_ideal: vec![],
            }),
        })
    }

    /// Quotient `base[u]/(f)`, `f` given by ascending coefficients with the
    /// leading one included, e.g. `u^2 - 3` as `[-3, 0, 1]`.
    pub fn monic_quotient(base: &Ring, f: &[i64]) -> Result<Ring, RingError> {
        if base.repr.degree != 1 {
            return Err(RingError::NotMonic);
        }
        let m = base.repr.modulus;
        if f.len() < 2 {
            return Err(RingError::NotMonic);
        }
        let d = f.len() - 1;
        let fu: Vec<u64> = f.iter().map(|&c| c.rem_euclid(m as i64) as u64).collect();
        if fu[d] != 1 {
            return Err(RingError::NotMonic);
        }
        let reduction: Vec<u64> = fu[..d].iter().map(|&c| (m - c) % m).collect();
        let is_field = base.repr.base_prime && is_prime_u64(m) && irreducible_mod_p(&fu, m);
        Ok(Ring {
            repr: Arc::new(RingRepr {
                modulus: m,
                base_prime: base.repr.base_prime,
                degree: d,
                f: fu,
                reduction,
                is_field,
                maximal_ideal: vec![],
            }),
        })
    }

    /// Declare maximal ideal generators and verify the declaration: every
    /// generator must be a non-unit and the quotient by the generated ideal
    /// must be a field. Returns a ring carrying the verified declaration.
    pub fn declare_maximal_ideal(&self, gens: &[RingElement]) -> Result<Ring, RingError> {
        for g in gens {
            if g.ring != *self {
                return Err(RingError::RingMismatch);
            }
        }
        if self.is_field() {
            if gens.iter().any(|g| !g.is_zero()) {
                return Err(RingError::BadLocality(
                    "a field admits only the zero maximal ideal".into(),
                ));
            }
        } else {
            if gens.is_empty() {
                return Err(RingError::BadLocality("no generators declared".into()));
            }
            for g in gens {
                if g.is_unit() {
                    return Err(RingError::BadLocality(format!(
                        "declared generator {} is a unit",
                        g
                    )));
                }
            }
            let basis = self.ideal(gens);
            if basis.is_unit_ideal() {
                return Err(RingError::BadLocality("declared ideal is the unit ideal".into()));
            }
            let q = basis.quotient_size();
            if q > MAX_LOCALITY_ENUM {
                return Err(RingError::BadLocality(format!(
                    "quotient of size {} is too large to verify",
                    q
                )));
            }
            // The quotient is a field iff every nonzero residue class acts
            // invertibly; walk a transversal of the quotient.
            for rep in basis.transversal() {
                if rep.iter().all(|&c| c == 0) {
                    continue;
                }
                let elem = RingElement { ring: self.clone(), c: rep };
                if !basis.is_unit_mod(&elem) {
                    return Err(RingError::BadLocality(format!(
                        "residue class of {} is a nonzero zero-divisor in the quotient",
                        elem
                    )));
                }
            }
        }
        Ok(Ring {
            repr: Arc::new(RingRepr {
                modulus: self.repr.modulus,
                base_prime: self.repr.base_prime,
                degree: self.repr.degree,
                f: self.repr.f.clone(),
                reduction: self.repr.reduction.clone(),
                is_field: self.repr.is_field,
                maximal_ideal: gens.iter().map(|g| g.c.clone()).collect(),
            }),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.repr.modulus
    }

    pub fn degree(&self) -> usize {
        self.repr.degree
    }

    /// Additive order of 1, which for `(Z/m)[u]/(f)` is always `m`.
    pub fn characteristic(&self) -> u64 {
        self.repr.modulus
    }

    pub fn is_field(&self) -> bool {
        self.repr.is_field
    }

    pub fn is_local(&self) -> bool {
        self.repr.is_field || !self.repr.maximal_ideal.is_empty()
    }

    pub fn maximal_ideal(&self) -> Vec<RingElement> {
        self.repr
            .maximal_ideal
            .iter()
            .map(|c| RingElement { ring: self.clone(), c: c.clone() })
            .collect()
    }

    /// Quotient polynomial coefficients (ascending, monic), if any.
    pub fn quotient_poly(&self) -> Option<&[u64]> {
        if self.repr.degree == 1 {
            None
        } else {
            Some(&self.repr.f)
        }
    }

    pub fn zero(&self) -> RingElement {
        RingElement { ring: self.clone(), c: vec![0; self.repr.degree] }
    }

    pub fn one(&self) -> RingElement {
        self.int(1)
    }

    pub fn int(&self, n: i64) -> RingElement {
        let m = self.repr.modulus as i64;
        let mut c = vec![0; self.repr.degree];
        c[0] = n.rem_euclid(m) as u64;
        RingElement { ring: self.clone(), c }
    }

    /// The quotient generator `u`.
    pub fn gen_u(&self) -> Result<RingElement, RingError> {
        if self.repr.degree < 2 {
            return Err(RingError::NoGenerator);
        }
        let mut c = vec![0; self.repr.degree];
        c[1] = 1;
        Ok(RingElement { ring: self.clone(), c })
    }

    /// Element from coefficients in the power basis of `u`; longer vectors
    /// are reduced by the quotient rule.
    pub fn element(&self, coeffs: &[i64]) -> RingElement {
        let m = self.repr.modulus as i64;
        let raw: Vec<u64> = coeffs.iter().map(|&c| c.rem_euclid(m) as u64).collect();
        RingElement { ring: self.clone(), c: self.reduce_poly(&raw) }
    }

    fn reduce_poly(&self, raw: &[u64]) -> Vec<u64> {
        let d = self.repr.degree;
        let m = self.repr.modulus as u128;
        let mut work: Vec<u64> = raw.to_vec();
        if work.len() < d {
            work.resize(d, 0);
        }
        let mut k = work.len();
        while k > d {
            k -= 1;
            let top = work[k] as u128;
            if top != 0 {
                work[k] = 0;
                for i in 0..d {
                    let add = top * self.repr.reduction[i] as u128 % m;
                    work[k - d + i] = ((work[k - d + i] as u128 + add) % m) as u64;
                }
            }
        }
        work.truncate(d);
        work
    }

    /// Ideal basis of the ideal generated by `gens`, as a sublattice of the
    /// coefficient module together with `m Z^d`.
    pub fn ideal(&self, gens: &[RingElement]) -> IdealBasis {
        let d = self.repr.degree;
        let mut rows: Vec<Vec<i128>> = Vec::new();
        let u_mono = if d >= 2 { Some(self.gen_u().unwrap()) } else { None };
        for g in gens {
            debug_assert!(g.ring == *self);
            let mut cur = g.clone();
            for _ in 0..d {
                rows.push(cur.c.iter().map(|&x| x as i128).collect());
                match &u_mono {
                    Some(u) => cur = cur.mul(u),
                    None => break,
                }
            }
        }
        IdealBasis::new(self.repr.modulus, d, rows)
    }

    /// Iterate every element; intended for small fixture rings in tests.
    pub fn all_elements(&self) -> impl Iterator<Item = RingElement> + '_ {
        let d = self.repr.degree;
        let m = self.repr.modulus;
        let total = (m as u128).pow(d as u32);
        assert!(total <= MAX_LOCALITY_ENUM, "ring too large to enumerate");
        (0..total as u64).map(move |mut idx| {
            let mut c = vec![0u64; d];
            for slot in c.iter_mut() {
                *slot = idx % m;
                idx /= m;
            }
            RingElement { ring: self.clone(), c }
        })
    }
}

/// Ring element in canonical form: coefficients in `0..m`, length `degree`.
#[derive(Clone, PartialEq, Eq)]
pub struct RingElement {
    ring: Ring,
    c: Vec<u64>,
}

impl std::hash::Hash for RingElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(w, "{}", self)
    }
}

impl RingElement {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    /// Coefficients as balanced representatives in `(-m/2, m/2]`.
    pub fn balanced_coeffs(&self) -> Vec<i64> {
        let m = self.ring.repr.modulus;
        self.c
            .iter()
            .map(|&x| if 2 * x > m { x as i64 - m as i64 } else { x as i64 })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&x| x == 0)
    }

    fn same_ring(&self, other: &RingElement) {
        assert!(self.ring == other.ring, "ring mismatch: {:?} vs {:?}", self.ring, other.ring);
    }

    pub fn checked_same_ring(&self, other: &RingElement) -> Result<(), RingError> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(RingError::RingMismatch)
        }
    }

    pub fn add(&self, other: &RingElement) -> RingElement {
        self.same_ring(other);
        let m = self.ring.repr.modulus;
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(&a, &b)| {
                let s = a + b;
                if s >= m {
                    s - m
                } else {
                    s
                }
            })
            .collect();
        RingElement { ring: self.ring.clone(), c }
    }

    pub fn sub(&self, other: &RingElement) -> RingElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RingElement {
        let m = self.ring.repr.modulus;
        let c = self.c.iter().map(|&a| if a == 0 { 0 } else { m - a }).collect();
        RingElement { ring: self.ring.clone(), c }
    }

    pub fn mul(&self, other: &RingElement) -> RingElement {
        self.same_ring(other);
        let d = self.ring.repr.degree;
        let m = self.ring.repr.modulus as u128;
        if d == 1 {
            let v = (self.c[0] as u128 * other.c[0] as u128 % m) as u64;
            return RingElement { ring: self.ring.clone(), c: vec![v] };
        }
        let mut conv = vec![0u64; 2 * d - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let t = (conv[i + j] as u128 + a as u128 * b as u128) % m;
                conv[i + j] = t as u64;
            }
        }
        RingElement { ring: self.ring.clone(), c: self.ring.reduce_poly(&conv) }
    }

    pub fn mul_int(&self, n: i64) -> RingElement {
        self.mul(&self.ring.int(n))
    }

    pub fn pow(&self, mut e: u64) -> RingElement {
        let mut base = self.clone();
        let mut acc = self.ring.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Power with possibly negative exponent; requires a unit for `e < 0`.
    pub fn pow_i(&self, e: i64) -> Result<RingElement, RingError> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs()))
        }
    }

    pub fn is_unit(&self) -> bool {
        self.inv().is_ok()
    }

    pub fn inv(&self) -> Result<RingElement, RingError> {
        let m = self.ring.repr.modulus;
        let d = self.ring.repr.degree;
        if d == 1 {
            let v = inv_mod(self.c[0], m).ok_or(RingError::NotInvertible)?;
            return Ok(RingElement { ring: self.ring.clone(), c: vec![v] });
        }
        if self.ring.repr.base_prime {
            let v = poly_inv_mod(&self.c, &self.ring.repr.f, m).ok_or(RingError::NotInvertible)?;
            let mut c = v;
            c.resize(d, 0);
            return Ok(RingElement { ring: self.ring.clone(), c });
        }
        // Composite base: invert the multiplication matrix via its
        // characteristic polynomial (division-free).
        let mat = self.mult_matrix();
        let chi = charpoly_scalar(&mat, m);
        let c_last = chi[d];
        let c_last_inv = inv_mod(c_last, m).ok_or(RingError::NotInvertible)?;
        // M * (M^{d-1} + c_1 M^{d-2} + ... + c_{d-1} I) = -c_d I.
        let mut b = identity_scalar(d);
        for k in 1..d {
            b = mat_mul_scalar(&mat, &b, m);
            for i in 0..d {
                b[i][i] = (b[i][i] + chi[k] as u128) % m as u128;
            }
        }
        let neg = (m - c_last_inv % m) % m;
        let col: Vec<u64> = (0..d).map(|i| (b[i][0] * neg as u128 % m as u128) as u64).collect();
        Ok(RingElement { ring: self.ring.clone(), c: col })
    }

    /// Matrix of multiplication by `self` in the power basis of `u`.
    fn mult_matrix(&self) -> Vec<Vec<u64>> {
        let d = self.ring.repr.degree;
        let mut cols = Vec::with_capacity(d);
        let u = self.ring.gen_u().unwrap();
        let mut cur = self.clone();
        for _ in 0..d {
            cols.push(cur.c.clone());
            cur = cur.mul(&u);
        }
        let mut mat = vec![vec![0u64; d]; d];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..d {
                mat[i][j] = col[i];
            }
        }
        mat
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bal = self.balanced_coeffs();
        let mut first = true;
        for (i, &c) in bal.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (sign, mag) = if c < 0 { ("-", -c) } else { ("+", c) };
            if first {
                if c < 0 {
                    write!(w, "-")?;
                }
            } else {
                write!(w, "{}", sign)?;
            }
            first = false;
            match i {
                0 => write!(w, "{}", mag)?,
                _ => {
                    if mag != 1 {
                        write!(w, "{}*", mag)?;
                    }
                    if i == 1 {
                        write!(w, "u")?;
                    } else {
                        write!(w, "u^{}", i)?;
                    }
                }
            }
        }
        if first {
            write!(w, "0")?;
        }
        Ok(())
    }
}

/// Reduction onto a residue field: coefficientwise reduction `Z/m -> Z/m'`
/// followed by evaluation of the power basis at the image of `u`.
#[derive(Clone, Debug)]
pub struct ResidueMap {
    source: Ring,
    target: Ring,
    u_image: RingElement,
}

impl ResidueMap {
    pub fn new(source: &Ring, target: &Ring, u_image: &RingElement) -> Result<ResidueMap, RingError> {
        if u_image.ring() != target {
            return Err(RingError::RingMismatch);
        }
        if !target.is_field() {
            return Err(RingError::BadResidueMap("target must be a field".into()));
        }
        if !source.is_local() {
            return Err(RingError::NotLocal);
        }
        if source.repr.modulus % target.repr.modulus != 0 {
            return Err(RingError::BadResidueMap(format!(
                "target modulus {} does not divide source modulus {}",
                target.repr.modulus, source.repr.modulus
            )));
        }
        let map = ResidueMap {
            source: source.clone(),
            target: target.clone(),
            u_image: u_image.clone(),
        };
        // The quotient rule must die: f(u_image) = 0 in the target.
        if source.repr.degree >= 2 {
            let mut val = target.zero();
            let mut pw = target.one();
            for &fc in &source.repr.f {
                val = val.add(&pw.mul(&target.int(fc as i64)));
                pw = pw.mul(u_image);
            }
            if !val.is_zero() {
                return Err(RingError::BadResidueMap(
                    "quotient polynomial does not vanish at the image of u".into(),
                ));
            }
        }
        for g in source.maximal_ideal() {
            if !map.apply(&g)?.is_zero() {
                return Err(RingError::BadResidueMap(format!(
                    "maximal ideal generator {} has nonzero image",
                    g
                )));
            }
        }
        if !map.is_onto() {
            return Err(RingError::BadResidueMap(
                "image of u does not generate the target field".into(),
            ));
        }
        Ok(map)
    }

    fn is_onto(&self) -> bool {
        let dt = self.target.repr.degree;
        if dt == 1 {
            return true;
        }
        // Powers u_image^0..u_image^{dt-1} must be linearly independent
        // over the prime field.
        let p = self.target.repr.modulus;
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(dt);
        let mut pw = self.target.one();
        for _ in 0..dt {
            rows.push(pw.c.clone());
            pw = pw.mul(&self.u_image);
        }
        rank_mod_p(rows, p) == dt
    }

    pub fn source(&self) -> &Ring {
        &self.source
    }

    pub fn target(&self) -> &Ring {
        &self.target
    }

    pub fn u_image(&self) -> &RingElement {
        &self.u_image
    }

    pub fn apply(&self, x: &RingElement) -> Result<RingElement, RingError> {
        if x.ring() != &self.source {
            return Err(RingError::RingMismatch);
        }
        let mut val = self.target.zero();
        let mut pw = self.target.one();
        for &c in &x.c {
            val = val.add(&pw.mul(&self.target.int((c % self.target.repr.modulus) as i64)));
            pw = pw.mul(&self.u_image);
        }
        Ok(val)
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

// Dense univariate helpers over F_p, used for quotient-field detection and
// extended-gcd inversion. Vectors are ascending coefficient lists.

fn poly_trim(a: &mut Vec<u64>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

fn poly_deg(a: &[u64]) -> usize {
    let mut d = a.len();
    while d > 1 && a[d - 1] == 0 {
        d -= 1;
    }
    d - 1
}

fn poly_is_zero(a: &[u64]) -> bool {
    a.iter().all(|&x| x == 0)
}

fn poly_mul_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if poly_is_zero(a) || poly_is_zero(b) {
        return vec![0];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = ((out[i + j] as u128 + x as u128 * y as u128) % p as u128) as u64;
        }
    }
    poly_trim(&mut out);
    out
}

/// Remainder of `a` modulo monic-up-to-unit `b` over F_p.
fn poly_rem_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    poly_trim(&mut r);
    let db = poly_deg(b);
    let lead_inv = inv_mod(b[db], p).expect("leading coefficient invertible over F_p");
    while !poly_is_zero(&r) && poly_deg(&r) >= db {
        let dr = poly_deg(&r);
        let q = (r[dr] as u128 * lead_inv as u128 % p as u128) as u64;
        let shift = dr - db;
        for i in 0..=db {
            let sub = q as u128 * b[i] as u128 % p as u128;
            let idx = i + shift;
            r[idx] = ((r[idx] as u128 + p as u128 - sub) % p as u128) as u64;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_gcd_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x: Vec<u64> = a.to_vec();
    let mut y: Vec<u64> = b.to_vec();
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !poly_is_zero(&y) {
        let r = poly_rem_mod(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// Inverse of `a` modulo monic `f` over F_p, by extended Euclid.
fn poly_inv_mod(a: &[u64], f: &[u64], p: u64) -> Option<Vec<u64>> {
    let mut r0: Vec<u64> = f.to_vec();
    let mut r1: Vec<u64> = a.to_vec();
    poly_trim(&mut r0);
    poly_trim(&mut r1);
    let mut t0: Vec<u64> = vec![0];
    let mut t1: Vec<u64> = vec![1];
    while !poly_is_zero(&r1) {
        // Long division r0 = q r1 + r, updating the Bezout coefficient on
        // the fly.
        let mut r: Vec<u64> = r0.clone();
        let mut t: Vec<u64> = t0.clone();
        let d1 = poly_deg(&r1);
        let lead_inv = inv_mod(r1[d1], p)?;
        while !poly_is_zero(&r) && poly_deg(&r) >= d1 {
            let dr = poly_deg(&r);
            let q = (r[dr] as u128 * lead_inv as u128 % p as u128) as u64;
            let shift = dr - d1;
            for i in 0..=d1 {
                let sub = q as u128 * r1[i] as u128 % p as u128;
                let idx = i + shift;
                r[idx] = ((r[idx] as u128 + p as u128 - sub) % p as u128) as u64;
            }
            poly_trim(&mut r);
            // t -= q x^shift t1
            let need = t1.len() + shift;
            if t.len() < need {
                t.resize(need, 0);
            }
            for i in 0..t1.len() {
                let sub = q as u128 * t1[i] as u128 % p as u128;
                let idx = i + shift;
                t[idx] = ((t[idx] as u128 + p as u128 - sub) % p as u128) as u64;
            }
            poly_trim(&mut t);
        }
        r0 = std::mem::replace(&mut r1, r);
        t0 = std::mem::replace(&mut t1, t);
    }
    if poly_deg(&r0) != 0 || r0[0] == 0 {
        return None;
    }
    let scale = inv_mod(r0[0], p)?;
    Some(t0.iter().map(|&c| (c as u128 * scale as u128 % p as u128) as u64).collect())
}

fn irreducible_mod_p(f: &[u64], p: u64) -> bool {
    let d = poly_deg(f);
    if d == 0 {
        return false;
    }
    // Distinct-degree criterion: x^(p^d) = x mod f, and for each prime
    // divisor t of d, gcd(x^(p^(d/t)) - x, f) = 1.
    let xq = |k: usize| -> Vec<u64> {
        let mut g = vec![0, 1];
        for _ in 0..k {
            g = poly_pow_mod(&g, p, f, p);
        }
        g
    };
    let x = vec![0u64, 1];
    let top = xq(d);
    if poly_rem_mod(&poly_sub_mod(&top, &x, p), f, p) != vec![0] {
        return false;
    }
    let mut n = d;
    let mut t = 2;
    let mut prime_divs = Vec::new();
    while t * t <= n {
        if n % t == 0 {
            prime_divs.push(t);
            while n % t == 0 {
                n /= t;
            }
        }
        t += 1;
    }
    if n > 1 {
        prime_divs.push(n);
    }
    for t in prime_divs {
        let g = xq(d / t);
        let diff = poly_sub_mod(&g, &x, p);
        let gcd = poly_gcd_mod(&diff, f, p);
        if poly_deg(&gcd) != 0 {
            return false;
        }
    }
    true
}

fn poly_sub_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let x = *a.get(i).unwrap_or(&0);
        let y = *b.get(i).unwrap_or(&0);
        out[i] = ((x as u128 + p as u128 - y as u128 % p as u128) % p as u128) as u64;
    }
    poly_trim(&mut out);
    out
}

fn poly_pow_mod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut b = poly_rem_mod(base, f, p);
    let mut acc = vec![1u64];
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem_mod(&poly_mul_mod(&acc, &b, p), f, p);
        }
        b = poly_rem_mod(&poly_mul_mod(&b, &b, p), f, p);
        e >>= 1;
    }
    acc
}

fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][c] % p != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = inv_mod(rows[rank][c] % p, p).unwrap();
        for i in 0..rows.len() {
            if i != rank && rows[i][c] % p != 0 {
                let factor = rows[i][c] % p * inv % p;
                for j in 0..cols {
                    let sub = factor as u128 * rows[rank][j] as u128 % p as u128;
                    rows[i][j] = ((rows[i][j] as u128 + p as u128 * p as u128 - sub)
                        % p as u128) as u64;
                }
            }
        }
        rank += 1;
    }
    rank
}

// Scalar Berkowitz: characteristic polynomial of a small matrix over Z/m,
// ascending from the leading 1: chi[0] = 1, chi[k] = coefficient of
// lambda^{n-k} in det(lambda I - M).
fn charpoly_scalar(mat: &[Vec<u64>], m: u64) -> Vec<u64> {
    let n = mat.len();
    let mm = m as u128;
    let mval = |x: u64| x as u128 % mm;
    let mut coeffs: Vec<u128> = vec![1];
    for i in (0..n).rev() {
        let k = n - i;
        // Toeplitz column: t[0]=1, t[1]=-a_ii, t[j]=-(R M^{j-2} C).
        let mut t: Vec<u128> = vec![0; k + 1];
        t[0] = 1;
        t[1] = (mm - mval(mat[i][i])) % mm;
        if k >= 2 {
            let sub: Vec<&Vec<u64>> = mat[i + 1..].iter().collect();
            let r: Vec<u128> = (i + 1..n).map(|j| mval(mat[i][j])).collect();
            let mut v: Vec<u128> = (i + 1..n).map(|j| mval(mat[j][i])).collect();
            for tj in t.iter_mut().take(k + 1).skip(2) {
                let dot: u128 = r.iter().zip(&v).map(|(&a, &b)| a * b % mm).sum::<u128>() % mm;
                *tj = (mm - dot) % mm;
                // v = M v
                let mut nv = vec![0u128; v.len()];
                for (a, nva) in nv.iter_mut().enumerate() {
                    let mut acc = 0u128;
                    for (b, &vb) in v.iter().enumerate() {
                        acc = (acc + mval(sub[a][i + 1 + b]) * vb) % mm;
                    }
                    *nva = acc;
                }
                v = nv;
            }
        }
        let mut next = vec![0u128; coeffs.len() + 1];
        for (j, slot) in next.iter_mut().enumerate() {
            let mut acc = 0u128;
            for (l, &tl) in t.iter().enumerate() {
                if l <= j && j - l < coeffs.len() {
                    acc = (acc + tl * coeffs[j - l]) % mm;
                }
            }
            *slot = acc;
        }
        coeffs = next;
    }
    coeffs.iter().map(|&x| x as u64).collect()
}

fn identity_scalar(d: usize) -> Vec<Vec<u128>> {
    let mut b = vec![vec![0u128; d]; d];
    for (i, row) in b.iter_mut().enumerate() {
        row[i] = 1;
    }
    b
}

fn mat_mul_scalar(a: &[Vec<u64>], b: &[Vec<u128>], m: u64) -> Vec<Vec<u128>> {
    let d = a.len();
    let mm = m as u128;
    let mut out = vec![vec![0u128; d]; d];
    for i in 0..d {
        for k in 0..d {
            let av = a[i][k] as u128 % mm;
            if av == 0 {
                continue;
            }
            for j in 0..d {
                out[i][j] = (out[i][j] + av * b[k][j]) % mm;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z9_sqrt3() -> Ring {
        let z9 = Ring::integer_residue(9).unwrap();
        Ring::monic_quotient(&z9, &[-3, 0, 1]).unwrap()
    }

    fn f3_phi6() -> Ring {
        let f3 = Ring::prime_field(3).unwrap();
        Ring::monic_quotient(&f3, &[1, -1, 1]).unwrap()
    }

    #[test]
    fn prime_field_rejects_composite() {
        assert_eq!(Ring::prime_field(4), Err(RingError::NotPrime(4)));
        assert!(Ring::prime_field(7).is_ok());
    }

    #[test]
    fn f7_inverse() {
        let f7 = Ring::prime_field(7).unwrap();
        let three = f7.int(3);
        assert_eq!(three.inv().unwrap(), f7.int(5));
        assert!(three.mul(&f7.int(5)).is_one());
    }

    #[test]
    fn z9_sqrt3_relations() {
        let s = z9_sqrt3();
        let u = s.gen_u().unwrap();
        assert_eq!(u.mul(&u), s.int(3), "u^2 = 3");
        assert!(s.int(9).is_zero());
        assert!(u.pow(4).is_zero(), "u^4 = 9 = 0");
        assert!(!s.int(3).mul(&u).is_zero(), "3u survives in this quotient");
        assert!(!s.is_field());
        assert_eq!(s.characteristic(), 9);
    }

    #[test]
    fn z9_sqrt3_unit_inverse() {
        let s = z9_sqrt3();
        let u = s.gen_u().unwrap();
        let a = s.one().add(&u);
        let ainv = a.inv().unwrap();
        assert!(a.mul(&ainv).is_one());
        // 3 and u are not invertible.
        assert_eq!(s.int(3).inv(), Err(RingError::NotInvertible));
        assert_eq!(u.inv(), Err(RingError::NotInvertible));
    }

    #[test]
    fn phi6_relations() {
        let s = f3_phi6();
        let u = s.gen_u().unwrap();
        // u has order 6 and u^2 - 1 is a nonzero square-zero element.
        let mut pw = s.one();
        let mut order = 0;
        for k in 1..=6 {
            pw = pw.mul(&u);
            if pw.is_one() {
                order = k;
                break;
            }
        }
        assert_eq!(order, 6);
        let t = u.mul(&u).sub(&s.one());
        assert!(!t.is_zero());
        assert!(t.mul(&t).is_zero());
        assert!(!s.is_field(), "u^2-u+1 = (u-2)^2 mod 3");
    }

    #[test]
    fn phi6_inv_u() {
        let s = f3_phi6();
        let u = s.gen_u().unwrap();
        let expect = s.one().sub(&u);
        assert_eq!(u.inv().unwrap(), expect, "u(1-u) = 1 here");
    }

    #[test]
    fn quotient_field_detection() {
        let f3 = Ring::prime_field(3).unwrap();
        let f9 = Ring::monic_quotient(&f3, &[1, 0, 1]).unwrap(); // u^2+1 irreducible mod 3
        assert!(f9.is_field());
        let not = Ring::monic_quotient(&f3, &[1, -1, 1]).unwrap(); // (u-2)^2
        assert!(!not.is_field());
    }

    #[test]
    fn non_monic_rejected() {
        let z9 = Ring::integer_residue(9).unwrap();
        assert_eq!(Ring::monic_quotient(&z9, &[1, 0, 3]), Err(RingError::NotMonic));
        assert_eq!(Ring::monic_quotient(&z9, &[5]), Err(RingError::NotMonic));
    }

    #[test]
    fn locality_accepts_maximal_and_rejects_non_maximal() {
        let s = z9_sqrt3();
        let u = s.gen_u().unwrap();
        let three = s.int(3);
        // (3, u) is maximal with residue field F_3.
        assert!(s.declare_maximal_ideal(&[three.clone(), u.clone()]).is_ok());
        // (u) alone already contains 3 = u^2; also fine.
        assert!(s.declare_maximal_ideal(&[u]).is_ok());
        // (3) alone leaves u nilpotent in the quotient: not a field.
        let err = s.declare_maximal_ideal(&[three]).unwrap_err();
        assert!(matches!(err, RingError::BadLocality(_)));
        // Units are rejected outright.
        let err = s.declare_maximal_ideal(&[s.int(2)]).unwrap_err();
        assert!(matches!(err, RingError::BadLocality(_)));
    }

    #[test]
    fn residue_map_z9_to_f3() {
        let s = z9_sqrt3();
        let u = s.gen_u().unwrap();
        let s = s.declare_maximal_ideal(&[u]).unwrap();
        let f3 = Ring::prime_field(3).unwrap();
        let map = ResidueMap::new(&s, &f3, &f3.zero()).unwrap();
        assert_eq!(map.apply(&s.int(4)).unwrap(), f3.int(1));
        assert!(map.apply(&s.gen_u().unwrap()).unwrap().is_zero());
        let x = s.element(&[5, 7]);
        assert_eq!(map.apply(&x).unwrap(), f3.int(2));
    }

    #[test]
    fn residue_map_phi6_to_f3_at_2() {
        let s = f3_phi6();
        let u = s.gen_u().unwrap();
        let gen = u.sub(&s.int(2));
        let s = s.declare_maximal_ideal(&[gen]).unwrap();
        let f3 = Ring::prime_field(3).unwrap();
        let map = ResidueMap::new(&s, &f3, &f3.int(2)).unwrap();
        let u = s.gen_u().unwrap();
        assert_eq!(map.apply(&u).unwrap(), f3.int(2));
        assert_eq!(map.apply(&u.mul(&u)).unwrap(), f3.int(1), "u^2 = u - 1 -> 2 - 1");
    }

    #[test]
    fn residue_map_identity_on_field() {
        let f5 = Ring::prime_field(5).unwrap();
        let map = ResidueMap::new(&f5, &f5, &f5.zero()).unwrap();
        assert_eq!(map.apply(&f5.int(3)).unwrap(), f5.int(3));
    }

    #[test]
    fn residue_map_requires_locality() {
        let s = z9_sqrt3();
        let f3 = Ring::prime_field(3).unwrap();
        assert_eq!(
            ResidueMap::new(&s, &f3, &f3.zero()).unwrap_err(),
            RingError::NotLocal
        );
    }

    #[test]
    fn residue_map_rejects_bad_modulus() {
        let z8 = Ring::integer_residue(8).unwrap();
        let z8 = z8.declare_maximal_ideal(&[z8.int(2)]).unwrap();
        let f3 = Ring::prime_field(3).unwrap();
        assert!(ResidueMap::new(&z8, &f3, &f3.zero()).is_err());
    }

    #[test]
    fn z_p2_lift_ring_axioms() {
        for p in [3u64, 5, 7] {
            let s = Ring::integer_residue(p * p).unwrap();
            let s = s.declare_maximal_ideal(&[s.int(p as i64)]).unwrap();
            assert!(!s.int(p as i64).is_zero());
            assert!(s.int((p * p) as i64).is_zero());
            let fp = Ring::prime_field(p).unwrap();
            let map = ResidueMap::new(&s, &fp, &fp.zero()).unwrap();
            assert_eq!(map.apply(&s.int(p as i64 + 1)).unwrap(), fp.one());
        }
    }

    #[test]
    fn ideal_membership_u_cubed() {
        // In (Z/9)[u]/(u^2-3): the ideal (u^3) = (3u, 9) contains 3u but
        // neither 3 nor u.
        let s = z9_sqrt3();
        let u = s.gen_u().unwrap();
        let ideal = s.ideal(&[u.pow(3)]);
        assert!(ideal.contains(&u.pow(3)));
        assert!(ideal.contains(&s.int(3).mul(&u)));
        assert!(!ideal.contains(&s.int(3)));
        assert!(!ideal.contains(&u));
        assert!(ideal.contains(&s.zero()));
    }

    #[test]
    fn balanced_display() {
        let f3 = Ring::prime_field(3).unwrap();
        assert_eq!(f3.int(2).to_string(), "-1");
        let s = z9_sqrt3();
        assert_eq!(s.element(&[4, 5]).to_string(), "4-4*u");
        assert_eq!(s.element(&[0, 2]).to_string(), "2*u");
        assert_eq!(s.zero().to_string(), "0");
    }

    #[test]
    fn composite_base_inverse_via_mult_matrix() {
        let s = z9_sqrt3();
        // Exhaustive: every element is either a unit with a*inv(a) = 1 or
        // reports NotInvertible.
        let mut units = 0;
        for a in s.all_elements() {
            match a.inv() {
                Ok(b) => {
                    assert!(a.mul(&b).is_one());
                    units += 1;
                }
                Err(RingError::NotInvertible) => {}
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
        // Local ring with maximal ideal of index 3: 81 * 2/3 units.
        assert_eq!(units, 54);
    }
}
