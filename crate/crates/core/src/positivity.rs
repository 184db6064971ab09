//! Block positivity as a one-sided search.
//!
//! Deciding block positivity is hard in general, so the search only ever
//! refutes: `ViolationFound` comes with a product vector that is rounded to
//! rationals and re-checked exactly, `NoViolationFound` is evidence only.
//!
//! The minimiser alternates between the two factors. With `a` fixed,
//! `⟨a⊗b| C |a⊗b⟩ = ⟨b| M_a |b⟩` for the `dB × dB` matrix
//! `M_a[j,j'] = Σ conj(a_i) a_i' C[(i,j),(i',j')]`, whose lowest eigenvector
//! is the best `b`; then the roles swap.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choi::{choi_from_decomposition, choi_tensor_power, MapDecomposition};
use crate::epsfield::{EpsComplex, EpsRational};
use crate::error::{Error, Result};
use crate::hypermat::{kron_vec, BipartiteDims, EpsMatrix};
use crate::Rational;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            restarts: 200,
            iterations: 200,
            seed: 0,
            tolerance: 1e-10,
        }
    }
}

impl SearchBudget {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStatus {
    ViolationFound,
    NoViolationFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPositivityVerdict {
    pub status: SearchStatus,
    /// Best product vector found, unit norm, as `[re, im]` pairs.
    pub witness_a: Option<Vec<[f64; 2]>>,
    pub witness_b: Option<Vec<[f64; 2]>>,
    /// Smallest `⟨a⊗b| C |a⊗b⟩` seen.
    pub value: Option<f64>,
    /// Exact value of the rounded witness, when a violation was confirmed.
    pub exact_value: Option<String>,
    pub budget: SearchBudget,
}

impl BlockPositivityVerdict {
    pub fn violation_found(&self) -> bool {
        self.status == SearchStatus::ViolationFound
    }
}

#[derive(Clone, Debug)]
pub struct ProductMin {
    pub value: f64,
    pub a: DVector<Complex64>,
    pub b: DVector<Complex64>,
}

/// Float view of the shadow of an exact matrix.
pub fn to_cmatrix(m: &EpsMatrix) -> Result<CMatrix> {
    let vals = m.shadow_f64()?;
    Ok(CMatrix::from_row_iterator(
        m.rows(),
        m.cols(),
        vals.into_iter().map(|(re, im)| Complex64::new(re, im)),
    ))
}

fn check_dims(c: &CMatrix, dims: BipartiteDims) -> Result<()> {
    if c.nrows() != dims.total() || c.ncols() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix on {}x{}",
            c.nrows(),
            c.ncols(),
            dims.da,
            dims.db
        )));
    }
    Ok(())
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(d, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

fn lowest_eigen(m: CMatrix) -> (f64, DVector<Complex64>) {
    let eig = SymmetricEigen::new(m);
    let mut k = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[k] {
            k = i;
        }
    }
    (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
}

/// `M_a[j,j'] = Σ_{i,i'} conj(a_i) a_i' C[(i,j),(i',j')]`
fn condition_on_a(c: &CMatrix, dims: BipartiteDims, a: &DVector<Complex64>) -> CMatrix {
    let db = dims.db;
    let mut m = CMatrix::zeros(db, db);
    for i in 0..dims.da {
        for i2 in 0..dims.da {
            let w = a[i].conj() * a[i2];
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..db {
                for j2 in 0..db {
                    m[(j, j2)] += w * c[(i * db + j, i2 * db + j2)];
                }
            }
        }
    }
    hermitize(m)
}

/// `M_b[i,i'] = Σ_{j,j'} conj(b_j) b_j' C[(i,j),(i',j')]`
fn condition_on_b(c: &CMatrix, dims: BipartiteDims, b: &DVector<Complex64>) -> CMatrix {
    let db = dims.db;
    let mut m = CMatrix::zeros(dims.da, dims.da);
    for j in 0..db {
        for j2 in 0..db {
            let w = b[j].conj() * b[j2];
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..dims.da {
                for i2 in 0..dims.da {
                    m[(i, i2)] += w * c[(i * db + j, i2 * db + j2)];
                }
            }
        }
    }
    hermitize(m)
}

fn hermitize(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj) * Complex64::new(0.5, 0.0)
}

fn product_value(c: &CMatrix, a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    let v = a.kronecker(b);
    (v.adjoint() * c * &v)[(0, 0)].re
}

fn one_restart(c: &CMatrix, dims: BipartiteDims, budget: &SearchBudget, k: usize) -> ProductMin {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    rng.set_stream(k as u64);
    let mut a = random_unit(&mut rng, dims.da);
    let mut b = random_unit(&mut rng, dims.db);
    let mut value = product_value(c, &a, &b);
    for _ in 0..budget.iterations {
        let (_, nb) = lowest_eigen(condition_on_a(c, dims, &a));
        b = nb;
        let (v, na) = lowest_eigen(condition_on_b(c, dims, &b));
        a = na;
        let improved = value - v;
        value = v;
        if improved.abs() <= 1e-15 * (1.0 + v.abs()) {
            break;
        }
    }
    ProductMin {
        value: product_value(c, &a, &b),
        a,
        b,
    }
}

/// Smallest `⟨a⊗b| C |a⊗b⟩` over seeded restarts: an upper bound on the
/// product minimum. Restarts run in parallel; ties go to the lowest restart.
pub fn product_min(c: &CMatrix, dims: BipartiteDims, budget: &SearchBudget) -> Result<ProductMin> {
    check_dims(c, dims)?;
    if budget.restarts == 0 {
        return Err(Error::InvalidArgument("search needs at least one restart".into()));
    }
    let c = hermitize(c.clone());
    let results: Vec<ProductMin> = (0..budget.restarts)
        .into_par_iter()
        .map(|k| one_restart(&c, dims, budget, k))
        .collect();
    let mut best = 0;
    for (k, r) in results.iter().enumerate() {
        if r.value < results[best].value {
            best = k;
        }
    }
    Ok(results.into_iter().nth(best).expect("at least one restart"))
}

/// Largest singular value by power iteration on `C†C`.
pub fn operator_norm(c: &CMatrix) -> f64 {
    let n = c.ncols();
    if n == 0 {
        return 0.0;
    }
    let g = c.adjoint() * c;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v = random_unit(&mut rng, n);
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w = &g * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w / Complex64::new(norm, 0.0);
        if (next - lambda).abs() <= 1e-13 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// Upper end of the interval `[0, (‖C‖ⁿ + μⁿ)^{1/n} − ‖C‖]`, rounded down.
pub fn eps_bound(norm: f64, mu: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if mu < 0.0 {
        return Err(Error::NonPositiveMu(mu));
    }
    if mu == 0.0 || norm <= 0.0 {
        return Ok(0.0);
    }
    // a((1 + (μ/a)ⁿ)^{1/n} − 1) without cancellation
    let r = (mu / norm).powi(n as i32);
    let raw = norm * (r.ln_1p() / n as f64).exp_m1();
    let down = raw * (1.0 - 8.0 * f64::EPSILON);
    Ok(down.max(0.0))
}

/// Rational approximation with denominator `2^bits`.
fn to_dyadic(x: f64, bits: u32) -> Rational {
    let scale = (1u64 << bits) as f64;
    let n = (x * scale).round();
    Rational::new(
        num_bigint::BigInt::from(n as i64),
        num_bigint::BigInt::from(1u64 << bits),
    )
}

fn rational_vector(v: &DVector<Complex64>, bits: u32) -> Vec<EpsComplex> {
    v.iter()
        .map(|z| {
            EpsComplex::new(
                EpsRational::from_rational(&to_dyadic(z.re, bits)),
                EpsRational::from_rational(&to_dyadic(z.im, bits)),
            )
        })
        .collect()
}

/// Exact `⟨a⊗b| C |a⊗b⟩` for a rounded product vector, if it is negative.
fn confirm_exact(m: &EpsMatrix, a: &DVector<Complex64>, b: &DVector<Complex64>) -> Option<EpsRational> {
    for bits in [24, 40, 52] {
        let v = kron_vec(&rational_vector(a, bits), &rational_vector(b, bits));
        if v.iter().all(EpsComplex::is_zero) {
            continue;
        }
        let q = m.quad_form(&v).ok()?;
        if q.re.is_negative() {
            return Some(q.re);
        }
    }
    None
}

fn pack(v: &DVector<Complex64>) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// One-sided search for a product vector with negative expectation.
pub fn block_positive_search(
    m: &EpsMatrix,
    dims: BipartiteDims,
    budget: &SearchBudget,
) -> Result<BlockPositivityVerdict> {
    m.check_hermitian()?;
    let c = to_cmatrix(m)?;
    let best = product_min(&c, dims, budget)?;
    let mut verdict = BlockPositivityVerdict {
        status: SearchStatus::NoViolationFound,
        witness_a: Some(pack(&best.a)),
        witness_b: Some(pack(&best.b)),
        value: Some(best.value),
        exact_value: None,
        budget: *budget,
    };
    if best.value < -budget.tolerance {
        if let Some(q) = confirm_exact(m, &best.a, &best.b) {
            verdict.status = SearchStatus::ViolationFound;
            verdict.exact_value = Some(q.to_string());
        }
    }
    Ok(verdict)
}

/// Float-only variant: a violation is re-checked in floats within
/// `10 · tolerance`.
pub fn block_positive_search_f64(
    c: &CMatrix,
    dims: BipartiteDims,
    budget: &SearchBudget,
) -> Result<BlockPositivityVerdict> {
    let best = product_min(c, dims, budget)?;
    let recheck = product_value(c, &best.a, &best.b);
    let found = best.value < -budget.tolerance
        && recheck < 0.0
        && (recheck - best.value).abs() <= 10.0 * budget.tolerance;
    Ok(BlockPositivityVerdict {
        status: if found {
            SearchStatus::ViolationFound
        } else {
            SearchStatus::NoViolationFound
        },
        witness_a: Some(pack(&best.a)),
        witness_b: Some(pack(&best.b)),
        value: Some(best.value),
        exact_value: None,
        budget: *budget,
    })
}

/// Positivity of `P` is block positivity of `C_P` over (out | in).
pub fn positive_map_search(p: &MapDecomposition, budget: &SearchBudget) -> Result<BlockPositivityVerdict> {
    let c = choi_from_decomposition(p);
    block_positive_search(&c.matrix, c.dims, budget)
}

/// Positivity of `P^{⊗n}`, searched on the grouped Choi matrix over
/// (all outputs | all inputs).
pub fn n_tsp_search(
    p: &MapDecomposition,
    n: u32,
    budget: &SearchBudget,
    max_dim: usize,
) -> Result<BlockPositivityVerdict> {
    let c = choi_tensor_power(p, n, max_dim)?;
    block_positive_search(&c.matrix, c.dims, budget)
}

/// Product minimum, operator norm and the resulting bound for one matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsBoundReport {
    pub mu: f64,
    pub norm: f64,
    pub n: u32,
    pub eps: f64,
}

pub fn eps_bound_for(m: &EpsMatrix, dims: BipartiteDims, n: u32, budget: &SearchBudget) -> Result<EpsBoundReport> {
    let c = to_cmatrix(m)?;
    let mu = product_min(&c, dims, budget)?.value;
    let norm = operator_norm(&c);
    // a search upper bound that lands a hair below zero is still zero
    let mu_clamped = if mu.abs() <= budget.tolerance { 0.0 } else { mu };
    Ok(EpsBoundReport {
        mu,
        norm,
        n,
        eps: eps_bound(norm, mu_clamped, n)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypermat::{flip_operator, max_ent_projector};

    #[test]
    fn identity_and_flip_minimum() {
        let b = SearchBudget::default().with_restarts(20);
        let id = to_cmatrix(&EpsMatrix::identity(4)).unwrap();
        let r = product_min(&id, BipartiteDims::new(2, 2), &b).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let f = to_cmatrix(&flip_operator(2)).unwrap();
        let r = product_min(&f, BipartiteDims::new(2, 2), &b).unwrap();
        assert!(r.value.abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn norms() {
        let id = to_cmatrix(&EpsMatrix::identity(5)).unwrap();
        assert!((operator_norm(&id) - 1.0).abs() < 1e-10);
        let d = to_cmatrix(&EpsMatrix::diag_ints(&[-1, 0, 0, 2])).unwrap();
        assert!((operator_norm(&d) - 2.0).abs() < 1e-10);
        let d = to_cmatrix(&EpsMatrix::diag_ints(&[-3, 0, 2])).unwrap();
        assert!((operator_norm(&d) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn bound_formula() {
        assert!((eps_bound(2.0, 0.5, 1).unwrap() - 0.5).abs() < 1e-14);
        assert!(eps_bound(2.0, 0.5, 1).unwrap() <= 0.5);
        assert_eq!(eps_bound(2.0, 0.0, 3).unwrap(), 0.0);
        assert!(matches!(eps_bound(2.0, -0.1, 1), Err(Error::NonPositiveMu(_))));
        let mut prev = f64::INFINITY;
        for n in 1..=10 {
            let e = eps_bound(2.0, 0.5, n).unwrap();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn psd_has_no_violation() {
        let b = SearchBudget::default().with_restarts(20);
        let v = block_positive_search(&max_ent_projector(3), BipartiteDims::new(3, 3), &b).unwrap();
        assert_eq!(v.status, SearchStatus::NoViolationFound);
    }

    #[test]
    fn deterministic() {
        let b = SearchBudget::default().with_restarts(16).with_seed(9);
        let f = flip_operator(3).sub(&EpsMatrix::identity(9).scale_rational(&Rational::new(1.into(), 4.into()))).unwrap();
        let x = block_positive_search(&f, BipartiteDims::new(3, 3), &b).unwrap();
        let y = block_positive_search(&f, BipartiteDims::new(3, 3), &b).unwrap();
        assert_eq!(x, y);
        assert!(x.violation_found());
    }
}
