//! Exchange charts: cluster variables as rational functions over Q in the
//! initial variables X_1..X_m. Mutation divides a two-term binomial by the
//! replaced variable; whenever that division is exact in the Laurent ring
//! the chart keeps an honest Laurent normal form, so the Laurent check
//! reduces to looking at denominators.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Signed, Zero};

use super::{ClusterError, Seed};

/// Laurent polynomial over Q in a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QLaurent {
    vars: usize,
    terms: BTreeMap<Vec<i32>, BigRational>,
}

fn grlex(a: &[i32], b: &[i32]) -> Ordering {
    let ta: i64 = a.iter().map(|&e| e as i64).sum();
    let tb: i64 = b.iter().map(|&e| e as i64).sum();
    ta.cmp(&tb).then_with(|| a.cmp(b))
}

impl QLaurent {
    pub fn zero(vars: usize) -> QLaurent {
        QLaurent { vars, terms: BTreeMap::new() }
    }

    pub fn one(vars: usize) -> QLaurent {
        QLaurent::monomial(vars, &vec![0; vars], BigRational::one())
    }

    pub fn var(vars: usize, i: usize) -> QLaurent {
        assert!(i < vars, "variable index out of range");
        let mut exp = vec![0; vars];
        exp[i] = 1;
        QLaurent::monomial(vars, &exp, BigRational::one())
    }

    pub fn monomial(vars: usize, exp: &[i32], coeff: BigRational) -> QLaurent {
        assert_eq!(exp.len(), vars);
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp.to_vec(), coeff);
        }
        QLaurent { vars, terms }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&vec![0; self.vars])
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i32], &BigRational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn add(&self, other: &QLaurent) -> QLaurent {
        assert_eq!(self.vars, other.vars);
        let mut terms = self.terms.clone();
        for (exp, coeff) in &other.terms {
            let slot = terms.entry(exp.clone()).or_insert_with(BigRational::zero);
            *slot += coeff;
            if slot.is_zero() {
                terms.remove(exp);
            }
        }
        QLaurent { vars: self.vars, terms }
    }

    pub fn mul(&self, other: &QLaurent) -> QLaurent {
        assert_eq!(self.vars, other.vars);
        let mut terms: BTreeMap<Vec<i32>, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exp: Vec<i32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let slot = terms.entry(exp.clone()).or_insert_with(BigRational::zero);
                *slot += ca * cb;
                if slot.is_zero() {
                    terms.remove(&exp);
                }
            }
        }
        QLaurent { vars: self.vars, terms }
    }

    pub fn pow(&self, e: u32) -> QLaurent {
        let mut acc = QLaurent::one(self.vars);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale(&self, c: &BigRational) -> QLaurent {
        if c.is_zero() {
            return QLaurent::zero(self.vars);
        }
        QLaurent {
            vars: self.vars,
            terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
        }
    }

    fn leading(&self) -> (&Vec<i32>, &BigRational) {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| grlex(a, b))
            .expect("leading term of a nonzero polynomial")
    }

    /// Per-variable minimum exponent across all terms.
    fn floor_exponents(&self) -> Vec<i32> {
        let mut floor = vec![i32::MAX; self.vars];
        for exp in self.terms.keys() {
            for (slot, &e) in floor.iter_mut().zip(exp) {
                *slot = (*slot).min(e);
            }
        }
        floor
    }

    fn shifted(&self, delta: &[i32]) -> QLaurent {
        QLaurent {
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    (e.iter().zip(delta).map(|(a, b)| a + b).collect(), c.clone())
                })
                .collect(),
        }
    }

    /// Exact division in the Laurent ring; None when the quotient does not
    /// exist. Both operands are shifted to honest polynomials first: if an
    /// exact Laurent quotient exists its per-variable floors are forced,
    /// so ordinary single-divisor polynomial division finds it.
    pub fn try_div_exact(&self, divisor: &QLaurent) -> Option<QLaurent> {
        assert_eq!(self.vars, divisor.vars);
        assert!(!divisor.is_zero(), "division by zero");
        if self.is_zero() {
            return Some(QLaurent::zero(self.vars));
        }
        let floor_n = self.floor_exponents();
        let floor_d = divisor.floor_exponents();
        let up_n: Vec<i32> = floor_n.iter().map(|e| -e).collect();
        let up_d: Vec<i32> = floor_d.iter().map(|e| -e).collect();
        let back: Vec<i32> = floor_n.iter().zip(&floor_d).map(|(a, b)| a - b).collect();
        let num = self.shifted(&up_n);
        let den = divisor.shifted(&up_d);

        let (dlead, dcoeff) = den.leading();
        let dlead = dlead.clone();
        let dcoeff = dcoeff.clone();
        let mut rem = num;
        let mut quot = QLaurent::zero(self.vars);
        while !rem.is_zero() {
            let (rlead, rcoeff) = rem.leading();
            if rlead.iter().zip(&dlead).any(|(a, b)| a < b) {
                return None;
            }
            let exp: Vec<i32> = rlead.iter().zip(&dlead).map(|(a, b)| a - b).collect();
            let coeff = rcoeff / &dcoeff;
            let term = QLaurent::monomial(self.vars, &exp, coeff);
            quot = quot.add(&term);
            rem = rem.add(&term.mul(&den).scale(&-BigRational::one()));
        }
        Some(quot.shifted(&back))
    }
}

impl fmt::Display for QLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut entries: Vec<(&Vec<i32>, &BigRational)> = self.terms.iter().collect();
        entries.sort_by(|(a, _), (b, _)| grlex(b, a));
        for (idx, (exp, coeff)) in entries.into_iter().enumerate() {
            let negative = coeff.is_negative();
            let mag = coeff.abs();
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let constant = exp.iter().all(|&e| e == 0);
            if !mag.is_one() || constant {
                write!(f, "{mag}")?;
                if !constant {
                    write!(f, "*")?;
                }
            }
            let mut first = true;
            for (i, &e) in exp.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "X{}", i + 1)?;
                if e != 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Quotient of two Laurent polynomials. Construction divides out whenever
/// the quotient is exact, so the denominator is nontrivial only for
/// genuinely non-Laurent functions.
#[derive(Clone, Debug)]
pub struct QRat {
    num: QLaurent,
    den: QLaurent,
}

impl QRat {
    pub fn new(num: QLaurent, den: QLaurent) -> QRat {
        assert!(!den.is_zero(), "zero denominator");
        if let Some(q) = num.try_div_exact(&den) {
            return QRat { num: q, den: QLaurent::one(den.vars()) };
        }
        let lead = den.leading().1.clone();
        QRat { num: num.scale(&lead.recip()), den: den.scale(&lead.recip()) }
    }

    pub fn from_laurent(num: QLaurent) -> QRat {
        let vars = num.vars();
        QRat { num, den: QLaurent::one(vars) }
    }

    pub fn var(vars: usize, i: usize) -> QRat {
        QRat::from_laurent(QLaurent::var(vars, i))
    }

    pub fn num(&self) -> &QLaurent {
        &self.num
    }

    pub fn den(&self) -> &QLaurent {
        &self.den
    }

    pub fn is_laurent(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, other: &QRat) -> QRat {
        QRat::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn mul(&self, other: &QRat) -> QRat {
        QRat::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &QRat) -> QRat {
        assert!(!other.num.is_zero(), "division by the zero function");
        QRat::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn pow(&self, e: u32) -> QRat {
        QRat { num: self.num.pow(e), den: self.den.pow(e) }
    }
}

impl PartialEq for QRat {
    fn eq(&self, other: &QRat) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl fmt::Display for QRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_laurent() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

/// A cluster chart: the mutation word that produced it and one rational
/// function per direction. Frozen directions keep their initial variables.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterChart {
    label: Vec<usize>,
    vars: Vec<QRat>,
}

impl ClusterChart {
    pub fn initial(m: usize) -> ClusterChart {
        ClusterChart {
            label: Vec::new(),
            vars: (0..m).map(|i| QRat::var(m, i)).collect(),
        }
    }

    pub fn label(&self) -> &[usize] {
        &self.label
    }

    pub fn variables(&self) -> &[QRat] {
        &self.vars
    }
}

/// One exchange step at direction k: the k-th variable becomes
/// `(prod_{b_ik > 0} X_i^{b_ik} + prod_{b_ik < 0} X_i^{-b_ik}) / X_k`,
/// all products taken in the current chart; empty products are 1.
pub fn exchange_mutation(
    chart: &ClusterChart,
    seed: &Seed,
    k: usize,
) -> Result<ClusterChart, ClusterError> {
    if chart.vars.len() != seed.m() {
        return Err(ClusterError::ShapeMismatch);
    }
    if k == 0 || k > seed.n() {
        return Err(ClusterError::FrozenIndex(k));
    }
    let m = seed.m();
    let kk = k - 1;
    let one = QRat::from_laurent(QLaurent::one(m));
    let mut plus = one.clone();
    let mut minus = one;
    for i in 0..m {
        let b = seed.at(i, kk);
        match b.cmp(&0) {
            Ordering::Greater => plus = plus.mul(&chart.vars[i].pow(b as u32)),
            Ordering::Less => minus = minus.mul(&chart.vars[i].pow((-b) as u32)),
            Ordering::Equal => {}
        }
    }
    let mut vars = chart.vars.clone();
    vars[kk] = plus.add(&minus).div(&chart.vars[kk]);
    let mut label = chart.label.clone();
    label.push(k);
    Ok(ClusterChart { label, vars })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn a2_seed() -> Seed {
        Seed::new(vec![vec![0, 1], vec![-1, 0]], vec![1, 1]).unwrap()
    }

    fn parse_exp(vars: usize, exp: &[i32], num: i64) -> QLaurent {
        QLaurent::monomial(vars, exp, BigRational::from(BigInt::from(num)))
    }

    #[test]
    fn laurent_arithmetic_round_trips() {
        let x = QLaurent::var(2, 0);
        let y = QLaurent::var(2, 1);
        let p = x.add(&y).mul(&x.add(&y.scale(&-BigRational::one())));
        // (x + y)(x - y) = x^2 - y^2
        assert_eq!(p, parse_exp(2, &[2, 0], 1).add(&parse_exp(2, &[0, 2], -1)));
        assert_eq!(p.try_div_exact(&x.add(&y)).unwrap(), x.add(&y.scale(&-BigRational::one())));
        assert!(p.try_div_exact(&x.add(&QLaurent::one(2))).is_none());
        assert_eq!(format!("{p}"), "X1^2 - X2^2");
    }

    #[test]
    fn division_by_monomials_always_succeeds() {
        let x = QLaurent::var(2, 0);
        let y = QLaurent::var(2, 1);
        let q = QLaurent::one(2).add(&y).try_div_exact(&x).unwrap();
        assert_eq!(q, parse_exp(2, &[-1, 0], 1).add(&parse_exp(2, &[-1, 1], 1)));
        assert_eq!(format!("{q}"), "X1^-1*X2 + X1^-1");
    }

    #[test]
    fn first_exchange_matches_the_binomial_formula() {
        let chart = ClusterChart::initial(2);
        let next = exchange_mutation(&chart, &a2_seed(), 1).unwrap();
        let x = QRat::var(2, 0);
        let y = QRat::var(2, 1);
        let one = QRat::from_laurent(QLaurent::one(2));
        assert_eq!(next.variables()[0], one.add(&y).div(&x));
        assert_eq!(next.variables()[1], y);
        assert_eq!(next.label(), &[1]);
        assert!(next.variables()[0].is_laurent());
        assert_eq!(format!("{}", next.variables()[0]), "X1^-1*X2 + X1^-1");
    }

    #[test]
    fn frozen_directions_never_exchange() {
        let seed =
            Seed::new(vec![vec![0, 1], vec![-1, 0], vec![1, 1]], vec![1, 1]).unwrap();
        let chart = ClusterChart::initial(3);
        assert_eq!(
            exchange_mutation(&chart, &seed, 3).unwrap_err(),
            ClusterError::FrozenIndex(3)
        );
        let next = exchange_mutation(&chart, &seed, 1).unwrap();
        // Column 1 is (0, -1, 1): X1' = (X3 + X2) / X1.
        let x2 = QRat::var(3, 1);
        let x3 = QRat::var(3, 2);
        assert_eq!(next.variables()[0], x2.add(&x3).div(&QRat::var(3, 0)));
        assert_eq!(next.variables()[2], x3);
    }

    #[test]
    fn rank_two_walk_is_periodic_with_period_five() {
        let mut seed = a2_seed();
        let mut chart = ClusterChart::initial(2);
        let mut seen = vec![chart.variables().to_vec()];
        for step in 0..5 {
            let k = 1 + step % 2;
            chart = exchange_mutation(&chart, &seed, k).unwrap();
            seed = seed.mutate(k).unwrap();
            seen.push(chart.variables().to_vec());
        }
        // Five alternating exchanges return the initial cluster as a set.
        let last = &seen[5];
        assert_eq!(last[0], QRat::var(2, 1));
        assert_eq!(last[1], QRat::var(2, 0));
        // The intermediate clusters pick up exactly the three other
        // variables of the exchange pattern.
        let x = QLaurent::var(2, 0);
        let y = QLaurent::var(2, 1);
        let one = QLaurent::one(2);
        let expect = [
            one.add(&y).try_div_exact(&x).unwrap(),
            one.add(&x).add(&y).try_div_exact(&x.mul(&y)).unwrap(),
            one.add(&x).try_div_exact(&y).unwrap(),
        ];
        for want in &expect {
            let hits = seen
                .iter()
                .flatten()
                .filter(|v| v.is_laurent() && v.num() == want)
                .count();
            assert!(hits > 0, "missing cluster variable {want}");
        }
    }

    #[test]
    fn every_chart_to_depth_six_is_laurent() {
        let mut frontier = vec![(a2_seed(), ClusterChart::initial(2))];
        for _ in 0..6 {
            let mut next = Vec::new();
            for (seed, chart) in &frontier {
                for k in 1..=2usize {
                    if chart.label().last() == Some(&k) {
                        continue;
                    }
                    let moved = exchange_mutation(chart, seed, k).unwrap();
                    for v in moved.variables() {
                        assert!(
                            v.is_laurent(),
                            "non-Laurent variable {v} after word {:?}",
                            moved.label()
                        );
                    }
                    next.push((seed.mutate(k).unwrap(), moved));
                }
            }
            frontier = next;
        }
    }
}
