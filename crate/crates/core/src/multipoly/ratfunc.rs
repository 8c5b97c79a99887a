//! Ratios of Laurent polynomials. Never reduced to lowest terms: equality
//! is decided by cross-multiplication, and normalization only strips shared
//! per-variable monomial content and folds unit-constant denominators.

use super::matrix::Entry;
use super::{LaurentPoly, Mono, PolyError};

#[derive(Clone)]
pub struct RatFunc {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl RatFunc {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Result<RatFunc, PolyError> {
        num.check_compatible(&den)?;
        if den.is_zero() {
            return Err(PolyError::DivisionByZeroPoly);
        }
        let mut r = RatFunc { num, den };
        r.normalize();
        Ok(r)
    }

    pub fn from_poly(p: &LaurentPoly) -> RatFunc {
        RatFunc { num: p.clone(), den: LaurentPoly::one(p.ring(), p.vars()) }
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_poly(&self) -> Option<&LaurentPoly> {
        self.den.is_one().then_some(&self.num)
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = LaurentPoly::one(self.num.ring(), self.num.vars());
            return;
        }
        // Shared monomial content moves into the numerator when the
        // variable is Laurent; otherwise only the common part is cancelled.
        let cn = self.num.monomial_content();
        let cd = self.den.monomial_content();
        let vars = self.num.vars().clone();
        let cancel = Mono(
            cn.0.iter()
                .zip(&cd.0)
                .enumerate()
                .map(|(i, (&a, &b))| if vars.is_laurent(i) { b } else { a.min(b) })
                .collect(),
        );
        if !cancel.is_constant() {
            let inv = Mono(cancel.0.iter().map(|&e| -e).collect());
            self.num = self.num.shift_exponents(&inv);
            self.den = self.den.shift_exponents(&inv);
        }
        if let Some(c) = self.den.as_constant() {
            if let Ok(cinv) = c.inv() {
                self.num = self.num.scalar_mul(&cinv);
                self.den = LaurentPoly::one(self.num.ring(), self.num.vars());
            }
        }
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFunc::new(num, den).expect("denominator product of nonzero denominators")
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("denominator product of nonzero denominators")
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc, PolyError> {
        if other.num.is_zero() {
            return Err(PolyError::DivisionByZeroPoly);
        }
        RatFunc::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    /// Quotient rule.
    pub fn partial(&self, i: usize) -> Result<RatFunc, PolyError> {
        let dn = self.num.partial(i)?;
        let dd = self.den.partial(i)?;
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        RatFunc::new(num, self.den.mul(&self.den))
    }

    pub fn eq_cross(&self, other: &RatFunc) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        self.eq_cross(other)
    }
}

impl Entry for RatFunc {
    fn zero_of(&self) -> Self {
        RatFunc::from_poly(&LaurentPoly::zero(self.num.ring(), self.num.vars()))
    }
    fn one_of(&self) -> Self {
        RatFunc::from_poly(&LaurentPoly::one(self.num.ring(), self.num.vars()))
    }
    fn add(&self, other: &Self) -> Self {
        RatFunc::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        RatFunc::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        RatFunc::mul(self, other)
    }
    fn neg(&self) -> Self {
        RatFunc::neg(self)
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
}

impl std::fmt::Display for RatFunc {
    fn fmt(&self, w: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den.is_one() {
            write!(w, "{}", self.num)
        } else {
            write!(w, "({}) / ({})", self.num, self.den)
        }
    }
}

impl std::fmt::Debug for RatFunc {
    fn fmt(&self, w: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(w, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipoly::VarSet;
    use crate::rings::Ring;

    #[test]
    fn cross_multiplication_equality() {
        let k = Ring::prime_field(7).unwrap();
        let v = VarSet::numbered("X", 1, false);
        let x = LaurentPoly::var(&k, &v, 0);
        let one = LaurentPoly::one(&k, &v);
        // (X^2 - 1)/(X - 1) = X + 1 without any gcd computation.
        let lhs = RatFunc::new(x.pow(2).sub(&one), x.sub(&one)).unwrap();
        let rhs = RatFunc::from_poly(&x.add(&one));
        assert_eq!(lhs, rhs);
        let other = RatFunc::from_poly(&x.sub(&one));
        assert_ne!(lhs, other);
    }

    #[test]
    fn denominator_zero_rejected() {
        let k = Ring::prime_field(7).unwrap();
        let v = VarSet::numbered("X", 1, false);
        let x = LaurentPoly::var(&k, &v, 0);
        let z = LaurentPoly::zero(&k, &v);
        assert_eq!(RatFunc::new(x, z).unwrap_err(), PolyError::DivisionByZeroPoly);
    }

    #[test]
    fn unit_constant_denominator_folds() {
        let k = Ring::prime_field(7).unwrap();
        let v = VarSet::numbered("X", 1, false);
        let x = LaurentPoly::var(&k, &v, 0);
        let two = LaurentPoly::int(&k, &v, 2);
        let r = RatFunc::new(x.clone(), two).unwrap();
        assert!(r.den().is_one());
        assert_eq!(*r.num(), x.scalar_mul(&k.int(2).inv().unwrap()));
    }

    #[test]
    fn monomial_content_cancels() {
        let k = Ring::prime_field(7).unwrap();
        let v = VarSet::numbered("x", 2, false);
        let x = LaurentPoly::var(&k, &v, 0);
        let y = LaurentPoly::var(&k, &v, 1);
        // x^2 y / x y^2 strips to x / y.
        let r = RatFunc::new(x.pow(2).mul(&y), x.mul(&y.pow(2))).unwrap();
        assert_eq!(*r.num(), x);
        assert_eq!(*r.den(), y);
    }

    #[test]
    fn quotient_rule() {
        let k = Ring::prime_field(7).unwrap();
        let v = VarSet::numbered("x", 1, false);
        let x = LaurentPoly::var(&k, &v, 0);
        let one = LaurentPoly::one(&k, &v);
        // d/dx (1/x... as polynomial ring: use 1/(x+1)) = -1/(x+1)^2.
        let r = RatFunc::new(one.clone(), x.add(&one)).unwrap();
        let d = r.partial(0).unwrap();
        let expect = RatFunc::new(one.neg(), x.add(&one).pow(2)).unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn arithmetic_combines() {
        let k = Ring::prime_field(5).unwrap();
        let v = VarSet::numbered("x", 1, false);
        let x = LaurentPoly::var(&k, &v, 0);
        let one = LaurentPoly::one(&k, &v);
        let a = RatFunc::new(one.clone(), x.clone()).unwrap();
        let b = RatFunc::new(one.clone(), x.add(&one)).unwrap();
        // 1/x + 1/(x+1) = (2x+1)/(x(x+1))
        let s = a.add(&b);
        let expect =
            RatFunc::new(x.mul_int(2).add(&one), x.mul(&x.add(&one))).unwrap();
        assert_eq!(s, expect);
        let p = a.mul(&b);
        let expect2 = RatFunc::new(one.clone(), x.mul(&x.add(&one))).unwrap();
        assert_eq!(p, expect2);
    }
}
