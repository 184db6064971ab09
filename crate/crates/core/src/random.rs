//! Seeded generators for exact test objects.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::epsfield::{EpsComplex, EpsPolynomial, EpsRational};
use crate::hypermat::EpsMatrix;
use crate::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p/q` with `|p| <= bound`, `1 <= q <= den_bound`.
pub fn small_rational<R: Rng>(rng: &mut R, bound: i64, den_bound: i64) -> Rational {
    let p = rng.gen_range(-bound..=bound);
    let q = rng.gen_range(1..=den_bound.max(1));
    Rational::new(p.into(), q.into())
}

pub fn small_poly<R: Rng>(rng: &mut R, max_deg: usize, bound: i64) -> EpsPolynomial {
    let deg = rng.gen_range(0..=max_deg);
    EpsPolynomial::new((0..=deg).map(|_| small_rational(rng, bound, 3)).collect())
}

/// A random element of Q(e) with low-degree numerator and denominator.
pub fn eps_rational<R: Rng>(rng: &mut R) -> EpsRational {
    let num = small_poly(rng, 2, 5);
    let den = loop {
        let d = small_poly(rng, 1, 5);
        if !d.is_zero() {
            break d;
        }
    };
    EpsRational::new(num, den).expect("nonzero denominator")
}

/// Like [`eps_rational`] but biased towards simple entries: about half are
/// plain rationals.
pub fn sparse_eps_rational<R: Rng>(rng: &mut R) -> EpsRational {
    match rng.gen_range(0..4) {
        0 => EpsRational::zero(),
        1 => EpsRational::from_rational(&small_rational(rng, 4, 2)),
        _ => eps_rational(rng),
    }
}

/// Hermitian matrix over Q(e) + iQ(e).
pub fn hermitian_eps<R: Rng>(rng: &mut R, d: usize, complex: bool) -> EpsMatrix {
    let mut m = EpsMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = EpsComplex::real(sparse_eps_rational(rng));
        for j in i + 1..d {
            let im = if complex {
                sparse_eps_rational(rng)
            } else {
                EpsRational::zero()
            };
            let z = EpsComplex::new(sparse_eps_rational(rng), im);
            m[(j, i)] = z.conj();
            m[(i, j)] = z;
        }
    }
    m
}

/// Matrix of small Gaussian integers.
pub fn gaussian_int_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, bound: i64, complex: bool) -> EpsMatrix {
    EpsMatrix::from_fn(rows, cols, |_, _| {
        let re = EpsRational::from_int(rng.gen_range(-bound..=bound));
        let im = if complex {
            EpsRational::from_int(rng.gen_range(-bound..=bound))
        } else {
            EpsRational::zero()
        };
        EpsComplex::new(re, im)
    })
}

/// Rational psd matrix `G G†` for a random Gaussian-integer `G`.
pub fn psd_rational<R: Rng>(rng: &mut R, d: usize, rank: usize) -> EpsMatrix {
    let g = gaussian_int_matrix(rng, d, rank.max(1), 3, true);
    g.matmul(&g.dagger()).expect("shapes agree")
}

pub fn rational_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, bound: i64, den_bound: i64) -> EpsMatrix {
    EpsMatrix::from_fn(rows, cols, |_, _| {
        EpsComplex::from_rational(&small_rational(rng, bound, den_bound))
    })
}
