use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::EpsRational;
use crate::error::{Error, Result};
use crate::Rational;

/// `re + i·im` over Q(e).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct EpsComplex {
    pub re: EpsRational,
    pub im: EpsRational,
}

impl EpsComplex {
    pub fn new(re: EpsRational, im: EpsRational) -> Self {
        EpsComplex { re, im }
    }

    pub fn real(re: EpsRational) -> Self {
        EpsComplex {
            re,
            im: EpsRational::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::real(EpsRational::one())
    }

    pub fn i() -> Self {
        EpsComplex::new(EpsRational::zero(), EpsRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(EpsRational::from_int(n))
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Self::real(EpsRational::from_frac(n, d))
    }

    pub fn from_rational(r: &Rational) -> Self {
        Self::real(EpsRational::from_rational(r))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        EpsComplex {
            re: self.re.clone(),
            im: self.im.neg_ref(),
        }
    }

    /// `|z|^2 = re^2 + im^2`, an element of Q(e).
    pub fn norm_sqr(&self) -> EpsRational {
        if self.im.is_zero() {
            return self.re.mul_ref(&self.re);
        }
        self.re.mul_ref(&self.re).add_ref(&self.im.mul_ref(&self.im))
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        EpsComplex {
            re: self.re.add_ref(&o.re),
            im: self.im.add_ref(&o.im),
        }
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        EpsComplex {
            re: self.re.sub_ref(&o.re),
            im: self.im.sub_ref(&o.im),
        }
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Self::real(self.re.mul_ref(&o.re));
        }
        if self.im.is_zero() {
            return o.scale_eps(&self.re);
        }
        if o.im.is_zero() {
            return self.scale_eps(&o.re);
        }
        EpsComplex {
            re: self.re.mul_ref(&o.re).sub_ref(&self.im.mul_ref(&o.im)),
            im: self.re.mul_ref(&o.im).add_ref(&self.im.mul_ref(&o.re)),
        }
    }

    pub fn scale_eps(&self, s: &EpsRational) -> Self {
        EpsComplex {
            re: self.re.mul_ref(s),
            im: self.im.mul_ref(s),
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        self.scale_eps(&EpsRational::from_rational(s))
    }

    pub fn neg_ref(&self) -> Self {
        EpsComplex {
            re: self.re.neg_ref(),
            im: self.im.neg_ref(),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.im.is_zero() {
            return Ok(Self::real(self.re.recip()?));
        }
        let n = self.norm_sqr();
        Ok(EpsComplex {
            re: self.re.checked_div(&n)?,
            im: self.im.neg_ref().checked_div(&n)?,
        })
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self> {
        if o.im.is_zero() {
            if o.re.is_zero() {
                return Err(Error::DivisionByZero);
            }
            return Ok(EpsComplex {
                re: self.re.checked_div(&o.re)?,
                im: self.im.checked_div(&o.re)?,
            });
        }
        Ok(self.mul_ref(&o.recip()?))
    }

    pub fn shadow(&self) -> Result<(Rational, Rational)> {
        Ok((self.re.shadow()?, self.im.shadow()?))
    }

    pub fn eval_at(&self, t: &Rational) -> Result<(Rational, Rational)> {
        Ok((self.re.eval_at(t)?, self.im.eval_at(t)?))
    }
}

impl fmt::Display for EpsComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "i*({})", self.im)
        } else {
            write!(f, "{} + i*({})", self.re, self.im)
        }
    }
}

impl Add<&EpsComplex> for &EpsComplex {
    type Output = EpsComplex;
    fn add(self, rhs: &EpsComplex) -> EpsComplex {
        self.add_ref(rhs)
    }
}

impl Sub<&EpsComplex> for &EpsComplex {
    type Output = EpsComplex;
    fn sub(self, rhs: &EpsComplex) -> EpsComplex {
        self.sub_ref(rhs)
    }
}

impl Mul<&EpsComplex> for &EpsComplex {
    type Output = EpsComplex;
    fn mul(self, rhs: &EpsComplex) -> EpsComplex {
        self.mul_ref(rhs)
    }
}

impl Neg for &EpsComplex {
    type Output = EpsComplex;
    fn neg(self) -> EpsComplex {
        self.neg_ref()
    }
}

impl From<EpsRational> for EpsComplex {
    fn from(r: EpsRational) -> Self {
        Self::real(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_squared() {
        let i = EpsComplex::i();
        assert_eq!(&i * &i, EpsComplex::from_int(-1));
        let z = EpsComplex::new(EpsRational::eps(), EpsRational::from_int(2));
        assert_eq!(z.conj().conj(), z);
        assert!((&z * &z.conj()).is_real());
        assert_eq!(z.checked_div(&z).unwrap(), EpsComplex::one());
    }
}
