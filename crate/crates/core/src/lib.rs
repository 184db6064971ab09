//! Exact arithmetic over the infinitesimal field Q(e), Choi-matrix machinery
//! and checks for tensor-stable positivity of linear maps.

pub mod choi;
pub mod claims;
pub mod epsfield;
pub mod error;
pub mod hypermat;
pub mod layers;
pub mod mamu;
pub mod poly;
pub mod positivity;
pub mod random;
pub mod constructions;

pub use epsfield::{EpsComplex, EpsRational, Sign};
pub use error::{Error, Result};
pub use hypermat::{BipartiteDims, EpsMatrix, EpsVector, PsdStatus, PsdVerdict};

/// Arbitrary-precision rational numbers.
pub type Rational = num_rational::BigRational;

/// Nearest-ish float for a rational; exact for small values, graceful for huge ones.
pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Default cap on dense matrix dimensions.
pub const DEFAULT_MAX_DIM: usize = 2000;
