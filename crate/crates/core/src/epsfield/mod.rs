//! The ordered field Q(e) of rational functions in a positive infinitesimal
//! `e`, and its complexification Q(e) + iQ(e).
//!
//! An element `p(e)/q(e)` is ordered by the sign of its lowest-order
//! coefficients: `e` sits above zero and below every positive rational.
//! Elements are kept in a canonical form so that equality is structural and
//! the sign is a coefficient inspection:
//!
//! * `gcd(p, q) = 1`,
//! * all coefficients of `p` and `q` are integers with no common factor,
//! * the lowest-order nonzero coefficient of `q` is positive.
//!
//! So `1/8` is stored as `1` over `8`, and
//! `(1/8)(1 + e/(6(1-e)))` as `(6-5e)/(48-48e)`.

mod complex;
mod text;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub use crate::poly::Poly as EpsPolynomial;
pub use complex::EpsComplex;

use crate::error::{Error, Result};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of_rational(r: &Rational) -> Sign {
        if r.is_zero() {
            Sign::Zero
        } else if r.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EpsRational {
    num: EpsPolynomial,
    den: EpsPolynomial,
}

impl EpsRational {
    /// Builds `num/den` in canonical form.
    pub fn new(num: EpsPolynomial, den: EpsPolynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::canonical(num, den))
    }

    pub fn zero() -> Self {
        EpsRational {
            num: EpsPolynomial::zero(),
            den: EpsPolynomial::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// The infinitesimal `e`.
    pub fn eps() -> Self {
        EpsRational {
            num: EpsPolynomial::monomial(1),
            den: EpsPolynomial::one(),
        }
    }

    pub fn eps_pow(k: usize) -> Self {
        EpsRational {
            num: EpsPolynomial::monomial(k),
            den: EpsPolynomial::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(n.into()))
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Self::from_rational(&Rational::new(n.into(), d.into()))
    }

    pub fn from_rational(r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        EpsRational {
            num: EpsPolynomial::constant(Rational::from_integer(r.numer().clone())),
            den: EpsPolynomial::constant(Rational::from_integer(r.denom().clone())),
        }
    }

    pub fn from_poly(p: EpsPolynomial) -> Self {
        Self::canonical(p, EpsPolynomial::one())
    }

    pub fn num(&self) -> &EpsPolynomial {
        &self.num
    }

    pub fn den(&self) -> &EpsPolynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    /// True when the element lies in Q (no dependence on `e`).
    pub fn is_rational(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// The rational value, when the element does not depend on `e`.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.is_rational() {
            Some(self.num.coeff(0) / self.den.coeff(0))
        } else {
            None
        }
    }

    fn canonical(num: EpsPolynomial, den: EpsPolynomial) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let (mut num, mut den) = if num.is_constant() || den.is_constant() {
            (num, den)
        } else {
            let g = EpsPolynomial::gcd(&num, &den);
            if g.is_one() {
                (num, den)
            } else {
                (num.div_rem(&g).0, den.div_rem(&g).0)
            }
        };
        // integer-primitive coefficients
        let l = num.denominator_lcm() * den.denominator_lcm()
            / num_integer::gcd(num.denominator_lcm(), den.denominator_lcm());
        if !l.is_one() {
            let s = Rational::from_integer(l);
            num = num.scale(&s);
            den = den.scale(&s);
        }
        let g = num_integer::gcd(num.numerator_gcd(), den.numerator_gcd());
        let mut factor = if g.is_one() {
            None
        } else {
            Some(Rational::new(BigInt::one(), g))
        };
        if den.lowest().is_some_and(|c| c.is_negative()) {
            factor = Some(factor.map_or(-Rational::one(), |f| -f));
        }
        if let Some(f) = factor {
            num = num.scale(&f);
            den = den.scale(&f);
        }
        EpsRational { num, den }
    }

    fn both_rational(&self, other: &Self) -> Option<(Rational, Rational)> {
        Some((self.as_rational()?, other.as_rational()?))
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if let Some((a, b)) = self.both_rational(other) {
            return Self::from_rational(&(a + b));
        }
        if self.den == other.den {
            return Self::canonical(self.num.add(&other.num), self.den.clone());
        }
        Self::canonical(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn neg_ref(&self) -> Self {
        EpsRational {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if let Some((a, b)) = self.both_rational(other) {
            return Self::from_rational(&(a * b));
        }
        Self::canonical(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::canonical(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some((a, b)) = self.both_rational(other) {
            return Ok(Self::from_rational(&(a / b)));
        }
        Ok(self.mul_ref(&other.recip()?))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.mul_ref(&Self::from_rational(c))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul_ref(self);
        }
        acc
    }

    /// Sign in the field order: the sign of the lowest-order coefficient of
    /// the numerator (the denominator's is positive by construction).
    pub fn sign(&self) -> Sign {
        match self.num.lowest() {
            None => Sign::Zero,
            Some(c) => Sign::of_rational(c),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Sign::Positive
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Sign::Negative
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg_ref()
        } else {
            self.clone()
        }
    }

    pub fn compare(&self, other: &Self) -> Ordering {
        match self.sub_ref(other).sign() {
            Sign::Negative => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Positive => Ordering::Greater,
        }
    }

    /// Finite elements have `valuation(num) >= valuation(den)`.
    pub fn is_finite(&self) -> bool {
        match self.num.valuation() {
            None => true,
            Some(vn) => vn >= self.den.valuation().unwrap_or(0),
        }
    }

    /// Infinitesimal elements (including zero) have shadow zero.
    pub fn is_infinitesimal(&self) -> bool {
        match self.num.valuation() {
            None => true,
            Some(vn) => vn > self.den.valuation().unwrap_or(0),
        }
    }

    /// The standard part: the unique rational infinitely close to `self`.
    pub fn shadow(&self) -> Result<Rational> {
        let Some(vn) = self.num.valuation() else {
            return Ok(Rational::zero());
        };
        let vd = self.den.valuation().unwrap_or(0);
        match vn.cmp(&vd) {
            Ordering::Less => Err(Error::InfiniteElement),
            Ordering::Greater => Ok(Rational::zero()),
            Ordering::Equal => Ok(self.num.coeff(vn) / self.den.coeff(vd)),
        }
    }

    /// Exact evaluation at `e = t`.
    pub fn eval_at(&self, t: &Rational) -> Result<Rational> {
        let d = self.den.eval(t);
        if d.is_zero() {
            return Err(Error::PoleAtPoint);
        }
        Ok(self.num.eval(t) / d)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.num.eval_f64(t) / self.den.eval_f64(t)
    }

    /// Substitutes `e := inner`, computed in the field.
    pub fn compose(&self, inner: &EpsRational) -> Result<EpsRational> {
        let eval = |p: &EpsPolynomial| {
            let mut acc = EpsRational::zero();
            for c in p.coeffs().iter().rev() {
                acc = acc.mul_ref(inner).add_ref(&EpsRational::from_rational(c));
            }
            acc
        };
        eval(&self.num).checked_div(&eval(&self.den))
    }

    pub fn shadow_f64(&self) -> Result<f64> {
        self.shadow().map(|r| crate::rational_to_f64(&r))
    }

    /// Parses the `p(e)/q(e)` text form, e.g. `"(6-5e)/(48-48e)"`.
    pub fn parse(s: &str) -> Result<Self> {
        text::parse(s)
    }
}

impl Default for EpsRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl PartialOrd for EpsRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EpsRational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl fmt::Display for EpsRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let multi = |p: &EpsPolynomial| p.coeffs().iter().filter(|c| !c.is_zero()).count() > 1;
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if multi(&self.num) {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        let den_plain_int = self.den.is_constant();
        if den_plain_int {
            write!(f, "/{}", self.den)
        } else {
            write!(f, "/({})", self.den)
        }
    }
}

impl std::str::FromStr for EpsRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl $tr<&EpsRational> for &EpsRational {
            type Output = EpsRational;
            fn $method(self, rhs: &EpsRational) -> EpsRational {
                self.$inner(rhs)
            }
        }
        impl $tr<EpsRational> for EpsRational {
            type Output = EpsRational;
            fn $method(self, rhs: EpsRational) -> EpsRational {
                (&self).$inner(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);

impl Div<&EpsRational> for &EpsRational {
    type Output = EpsRational;
    /// Panics on division by zero; use [`EpsRational::checked_div`] otherwise.
    fn div(self, rhs: &EpsRational) -> EpsRational {
        self.checked_div(rhs).expect("division by zero in Q(e)")
    }
}

impl Neg for &EpsRational {
    type Output = EpsRational;
    fn neg(self) -> EpsRational {
        self.neg_ref()
    }
}

impl Neg for EpsRational {
    type Output = EpsRational;
    fn neg(self) -> EpsRational {
        self.neg_ref()
    }
}

impl From<i64> for EpsRational {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<&Rational> for EpsRational {
    fn from(r: &Rational) -> Self {
        Self::from_rational(r)
    }
}

// JSON: {"num": [[n, d], ...], "den": [...]}; the text form is also accepted
// on input.

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Small(i64),
    Big(String),
}

impl IntRepr {
    fn of(n: &BigInt) -> IntRepr {
        match i64::try_from(n) {
            Ok(v) => IntRepr::Small(v),
            Err(_) => IntRepr::Big(n.to_string()),
        }
    }

    fn to_bigint(&self) -> std::result::Result<BigInt, String> {
        match self {
            IntRepr::Small(v) => Ok(BigInt::from(*v)),
            IntRepr::Big(s) => s.parse().map_err(|_| format!("bad integer {s:?}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PartsRepr {
    num: Vec<[IntRepr; 2]>,
    den: Vec<[IntRepr; 2]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EpsRepr {
    Text(String),
    Parts(PartsRepr),
}

fn poly_to_repr(p: &EpsPolynomial) -> Vec<[IntRepr; 2]> {
    p.coeffs()
        .iter()
        .map(|c| [IntRepr::of(c.numer()), IntRepr::of(c.denom())])
        .collect()
}

fn repr_to_poly(v: &[[IntRepr; 2]]) -> std::result::Result<EpsPolynomial, String> {
    let mut coeffs = Vec::with_capacity(v.len());
    for [n, d] in v {
        let d = d.to_bigint()?;
        if d.is_zero() {
            return Err("zero coefficient denominator".into());
        }
        coeffs.push(Rational::new(n.to_bigint()?, d));
    }
    Ok(EpsPolynomial::new(coeffs))
}

impl Serialize for EpsRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PartsRepr {
            num: poly_to_repr(&self.num),
            den: poly_to_repr(&self.den),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EpsRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match EpsRepr::deserialize(d)? {
            EpsRepr::Text(s) => EpsRational::parse(&s).map_err(D::Error::custom),
            EpsRepr::Parts(p) => {
                let num = repr_to_poly(&p.num).map_err(D::Error::custom)?;
                let den = repr_to_poly(&p.den).map_err(D::Error::custom)?;
                EpsRational::new(num, den).map_err(D::Error::custom)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn e() -> EpsRational {
        EpsRational::eps()
    }

    fn c(n: i64, d: i64) -> EpsRational {
        EpsRational::from_frac(n, d)
    }

    /// alpha of the twirled state, built step by step from its defining formula.
    fn alpha() -> EpsRational {
        let one = c(1, 1);
        let inner = e().checked_div(&(c(6, 1) * (&one - &e()))).unwrap();
        c(1, 8) * (one + inner)
    }

    #[test]
    fn arith_examples() {
        assert_eq!(&e() + &e(), c(2, 1) * e());
        assert_eq!((c(1, 1) - e()) * (c(1, 1) + e()), c(1, 1) - e().pow(2));
        let a = alpha();
        assert_eq!(a.to_string(), "(6-5e)/(48-48e)");
        // independent evaluation at e = 1/10: (1/8)(1 + (1/10)/(6*9/10)) = (1/8)(55/54)
        assert_eq!(a.eval_at(&q(1, 10)).unwrap(), q(55, 432));
    }

    #[test]
    fn division_by_zero() {
        assert!(matches!(
            e().checked_div(&EpsRational::zero()),
            Err(Error::DivisionByZero)
        ));
        assert!(EpsRational::zero().recip().is_err());
    }

    #[test]
    fn sign_examples() {
        assert_eq!(e().sign(), Sign::Positive);
        assert_eq!((-e().pow(2) + e().pow(3)).sign(), Sign::Negative);
        let x = c(3, 2) - e();
        assert_eq!(x.sign(), Sign::Positive);
        assert!(x.eval_at(&q(1, 1_000_000)).unwrap() > q(0, 1));
        assert_eq!(EpsRational::zero().sign(), Sign::Zero);
    }

    #[test]
    fn compare_examples() {
        assert_eq!(e().compare(&c(1, 1_000_000_000)), Ordering::Less);
        let inv = e().recip().unwrap();
        assert_eq!(inv.compare(&c(1_000_000_000, 1)), Ordering::Greater);
        assert_eq!(e().compare(&e().pow(2)), Ordering::Greater);
    }

    #[test]
    fn shadow_examples() {
        assert_eq!(alpha().shadow().unwrap(), q(1, 8));
        assert_eq!(e().shadow().unwrap(), q(0, 1));
        assert!(matches!(
            e().recip().unwrap().shadow(),
            Err(Error::InfiniteElement)
        ));
    }

    #[test]
    fn eval_examples() {
        let one = c(1, 1);
        let beta = c(1, 8) * (c(1, 3) + e().checked_div(&(c(2, 1) * (&one - &e()))).unwrap());
        assert_eq!(beta.eval_at(&q(0, 1)).unwrap(), q(1, 24));
        assert_eq!(e().eval_at(&q(1, 3)).unwrap(), q(1, 3));
        let pole = one.checked_div(&(c(1, 1) - e())).unwrap();
        assert!(matches!(pole.eval_at(&q(1, 1)), Err(Error::PoleAtPoint)));
    }

    #[test]
    fn canonical_form_invariants() {
        let x = (c(2, 3) * e() + c(4, 5)).checked_div(&(c(-6, 7) - e())).unwrap();
        assert!(x.den().lowest().unwrap().is_positive());
        assert!(x.num().coeffs().iter().all(|c| c.is_integer()));
        assert_eq!(x.to_string().parse::<EpsRational>().unwrap(), x);
        assert_eq!(c(1, 8).to_string(), "1/8");
        assert_eq!(c(-3, 1).to_string(), "-3");
    }

    #[test]
    fn compose_substitutes() {
        // alpha(eta) at eta = 2e/(3-e)
        let inner = (c(2, 1) * e()).checked_div(&(c(3, 1) - e())).unwrap();
        let a = alpha().compose(&inner).unwrap();
        assert_eq!(a.shadow().unwrap(), q(1, 8));
        assert_eq!(a.eval_at(&q(1, 2)).unwrap(), alpha().eval_at(&q(2, 5)).unwrap());
    }

    #[test]
    fn json_forms() {
        let a = alpha();
        let js = serde_json::to_string(&a).unwrap();
        assert_eq!(js, r#"{"num":[[6,1],[-5,1]],"den":[[48,1],[-48,1]]}"#);
        let back: EpsRational = serde_json::from_str(&js).unwrap();
        assert_eq!(back, a);
        let from_text: EpsRational = serde_json::from_str(r#""(6-5e)/(48-48e)""#).unwrap();
        assert_eq!(from_text, a);
    }
}
