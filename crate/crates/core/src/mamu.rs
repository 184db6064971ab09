//! The matrix multiplication (MaMu) tensor, `τ_n` of a matrix product
//! operator, the reduction from MPO positivity to MaMu positivity, and
//! bounded loops for both problems.
//!
//! Index tuples `(i₁, …, i_n)` are packed lexicographically with `i₁`
//! slowest. A bond index of size `s = d²` is split as `(μ, ν) ↦ μ·d + ν`.

use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::choi::{apply_map, check_cap, MapDecomposition};
use crate::epsfield::{EpsComplex, EpsRational};
use crate::error::{Error, Result};
use crate::hypermat::{basis_vector, psd_check, EpsMatrix, EpsVector, PsdVerdict};
use crate::{random, Rational};

/// Square rational matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    n: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(n: usize) -> Self {
        RatMatrix {
            n,
            data: vec![Rational::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("MPO matrix is not square".into()));
        }
        Ok(RatMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn scalar(x: i64) -> Self {
        let mut m = Self::zeros(1);
        m.data[0] = Rational::from_integer(x.into());
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.n + c] = v;
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &o.data[k * n + j];
                    if !b.is_zero() {
                        out.data[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Rational {
        (0..self.n).map(|i| self.get(i, i).clone()).sum()
    }

    /// `tr(self · o)` without forming the product.
    pub fn trace_product(&self, o: &Self) -> Rational {
        let n = self.n;
        let mut acc = Rational::zero();
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                let b = &o.data[k * n + i];
                if !a.is_zero() && !b.is_zero() {
                    acc += a * b;
                }
            }
        }
        acc
    }

    pub fn to_eps(&self) -> EpsMatrix {
        EpsMatrix::from_fn(self.n, self.n, |r, c| {
            EpsComplex::from_rational(self.get(r, c))
        })
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.data.chunks(self.n.max(1)).map(|c| c.to_vec()).take(self.n).collect()
    }
}

fn rational_to_json(r: &Rational) -> serde_json::Value {
    if r.is_integer() {
        if let Ok(i) = i64::try_from(r.numer().clone()) {
            return serde_json::Value::from(i);
        }
    }
    serde_json::Value::String(format!("{}/{}", r.numer(), r.denom()))
}

fn rational_from_json(v: &serde_json::Value) -> std::result::Result<Rational, String> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(|i| Rational::from_integer(i.into()))
            .ok_or_else(|| format!("{n} is not an integer; write fractions as \"p/q\"")),
        serde_json::Value::String(s) => EpsRational::parse(s)
            .map_err(|e| e.to_string())?
            .as_rational()
            .ok_or_else(|| format!("{s} is not rational")),
        other => Err(format!("expected a rational, got {other}")),
    }
}

/// Tensor `C = (C_i^{αβ})`: `t` square matrices of size `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MpoTensor {
    s: usize,
    matrices: Vec<RatMatrix>,
}

impl MpoTensor {
    pub fn new(matrices: Vec<RatMatrix>) -> Result<Self> {
        let s = matrices
            .first()
            .ok_or_else(|| Error::InvalidArgument("MPO needs at least one matrix".into()))?
            .dim();
        if matrices.iter().any(|m| m.dim() != s) {
            return Err(Error::DimensionMismatch(
                "MPO matrices have different sizes".into(),
            ));
        }
        Ok(MpoTensor { s, matrices })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[RatMatrix] {
        &self.matrices
    }

    pub fn matrices_mut(&mut self) -> &mut [RatMatrix] {
        &mut self.matrices
    }
}

impl Serialize for MpoTensor {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mats: Vec<Vec<Vec<serde_json::Value>>> = self
            .matrices
            .iter()
            .map(|m| {
                m.rows()
                    .iter()
                    .map(|r| r.iter().map(rational_to_json).collect())
                    .collect()
            })
            .collect();
        serde_json::json!({"s": self.s, "t": self.t(), "matrices": mats}).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for MpoTensor {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            s: usize,
            t: usize,
            matrices: Vec<Vec<Vec<serde_json::Value>>>,
        }
        let raw = Raw::deserialize(de)?;
        if raw.matrices.len() != raw.t {
            return Err(D::Error::custom(format!(
                "t = {} but {} matrices given",
                raw.t,
                raw.matrices.len()
            )));
        }
        let mut mats = Vec::with_capacity(raw.t);
        for m in &raw.matrices {
            let rows = m
                .iter()
                .map(|r| r.iter().map(rational_from_json).collect::<std::result::Result<Vec<_>, _>>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(D::Error::custom)?;
            let rm = RatMatrix::from_rows(rows).map_err(D::Error::custom)?;
            if rm.dim() != raw.s {
                return Err(D::Error::custom(format!(
                    "matrix of size {} but s = {}",
                    rm.dim(),
                    raw.s
                )));
            }
            mats.push(rm);
        }
        MpoTensor::new(mats).map_err(D::Error::custom)
    }
}

/// Seeded random MPO with entries `p/q`, `|p| <= bound`, `q <= 3`.
pub fn random_mpo(seed: u64, s: usize, t: usize, bound: i64) -> MpoTensor {
    let mut rng = random::rng(seed);
    let mats = (0..t)
        .map(|_| {
            let mut m = RatMatrix::zeros(s);
            for r in 0..s {
                for c in 0..s {
                    // keep roughly half the entries zero so products stay small
                    if rng.gen_bool(0.5) {
                        m.set(r, c, random::small_rational(&mut rng, bound, 3));
                    }
                }
            }
            m
        })
        .collect();
    MpoTensor::new(mats).expect("uniform sizes")
}

/// Diagonal of a `dⁿ × dⁿ` matrix indexed by lexicographic tuples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MamuDiagonal {
    pub d: usize,
    pub n: u32,
    pub values: Vec<EpsRational>,
}

impl MamuDiagonal {
    /// Digits of `idx`, most significant first.
    pub fn tuple(&self, idx: usize) -> Vec<usize> {
        index_to_tuple(idx, self.d, self.n)
    }

    pub fn first_negative(&self) -> Option<usize> {
        self.values.iter().position(EpsRational::is_negative)
    }
}

pub fn index_to_tuple(mut idx: usize, d: usize, n: u32) -> Vec<usize> {
    let mut t = vec![0; n as usize];
    for k in (0..n as usize).rev() {
        t[k] = idx % d;
        idx /= d;
    }
    t
}

pub fn tuple_to_index(t: &[usize], d: usize) -> usize {
    t.iter().fold(0, |acc, &x| acc * d + x)
}

/// `|χ_n⟩ = Σ |i₁,i₂⟩ ⊗ |i₂,i₃⟩ ⊗ ⋯ ⊗ |i_n,i₁⟩`.
pub fn mamu_vector(d: usize, n: u32, max_dim: usize) -> Result<EpsVector> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("MaMu tensor needs d, n >= 1".into()));
    }
    let dim = (d as u128).pow(2 * n);
    check_cap("MaMu vector dimension", dim, max_dim)?;
    let mut v = vec![EpsComplex::zero(); dim as usize];
    let n = n as usize;
    for idx in 0..d.pow(n as u32) {
        let i = index_to_tuple(idx, d, n as u32);
        let mut pos = 0;
        for k in 0..n {
            pos = pos * d * d + i[k] * d + i[(k + 1) % n];
        }
        v[pos] = EpsComplex::one();
    }
    Ok(v)
}

/// Unnormalised projector `|χ_n⟩⟨χ_n|`.
pub fn mamu_projector(d: usize, n: u32, max_dim: usize) -> Result<EpsMatrix> {
    let v = mamu_vector(d, n, max_dim)?;
    Ok(EpsMatrix::outer(&v, &v))
}

fn check_tuples(t: usize, n: u32, max_tuples: usize) -> Result<()> {
    check_cap("index tuple count", (t as u128).saturating_pow(n), max_tuples)
}

/// Default cap on the number of index tuples in the diagonal paths.
pub const DEFAULT_MAX_TUPLES: usize = 1 << 22;

/// `τ_n(C)`: the traces `tr(C_{i₁} ⋯ C_{i_n})`, with prefix products shared
/// between tuples.
pub fn tau_n(c: &MpoTensor, n: u32, max_tuples: usize) -> Result<MamuDiagonal> {
    if n == 0 {
        return Err(Error::InvalidArgument("τ_n needs n >= 1".into()));
    }
    let t = c.t();
    check_tuples(t, n, max_tuples)?;
    let per_first: Vec<Vec<Rational>> = (0..t)
        .into_par_iter()
        .map(|i1| {
            let mut out = Vec::with_capacity(t.pow(n - 1));
            tau_rec(c, &c.matrices[i1], n - 1, &mut out);
            out
        })
        .collect();
    Ok(MamuDiagonal {
        d: t,
        n,
        values: per_first
            .into_iter()
            .flatten()
            .map(|r| EpsRational::from_rational(&r))
            .collect(),
    })
}

fn tau_rec(c: &MpoTensor, prefix: &RatMatrix, remaining: u32, out: &mut Vec<Rational>) {
    match remaining {
        0 => out.push(prefix.trace()),
        1 => out.extend(c.matrices.iter().map(|m| prefix.trace_product(m))),
        _ => {
            for m in &c.matrices {
                tau_rec(c, &prefix.matmul(m), remaining - 1, out);
            }
        }
    }
}

/// Map with `A_i = |i⟩⟨i|` and `B_i^{(μ,λ),(ν,ρ)} = C_i^{(μ,ν),(λ,ρ)}`.
pub fn reduce_mpo_to_map(c: &MpoTensor) -> Result<MapDecomposition> {
    let s = c.s();
    let d = perfect_sqrt(s).ok_or(Error::NotPerfectSquare(s))?;
    let t = c.t();
    let pairs = c
        .matrices
        .iter()
        .enumerate()
        .map(|(i, ci)| (EpsMatrix::unit(t, i, i), reshuffle(ci, d).to_eps()))
        .collect();
    MapDecomposition::from_pairs(s, t, pairs)
}

fn perfect_sqrt(s: usize) -> Option<usize> {
    let r = (s as f64).sqrt().round() as usize;
    (r * r == s).then_some(r)
}

/// Exchanges the second and third of the four split indices.
/// `reshuffle(reshuffle(C)) = C`.
pub fn reshuffle(c: &RatMatrix, d: usize) -> RatMatrix {
    let mut b = RatMatrix::zeros(d * d);
    for mu in 0..d {
        for nu in 0..d {
            for la in 0..d {
                for rho in 0..d {
                    b.set(mu * d + la, nu * d + rho, c.get(mu * d + nu, la * d + rho).clone());
                }
            }
        }
    }
    b
}

/// `P^{⊗n}(χ_n)` in the most compact exact form available.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum MamuImage {
    /// `value · 1` of the given dimension.
    Scalar { value: EpsRational, dim: usize },
    Diagonal(MamuDiagonal),
    Dense(EpsMatrix),
}

impl MamuImage {
    pub fn psd_verdict(&self) -> Result<PsdVerdict> {
        let basis_witness = |dim: usize, k: usize, value: &EpsRational| PsdVerdict {
            status: crate::PsdStatus::NotPsd,
            witness: Some(basis_vector(dim, k)),
            value: Some(value.clone()),
        };
        Ok(match self {
            MamuImage::Scalar { value, dim } => {
                if value.is_negative() {
                    basis_witness(*dim, 0, value)
                } else {
                    PsdVerdict::psd()
                }
            }
            MamuImage::Diagonal(dg) => match dg.first_negative() {
                Some(k) => basis_witness(dg.values.len(), k, &dg.values[k]),
                None => PsdVerdict::psd(),
            },
            MamuImage::Dense(m) => psd_check(m)?,
        })
    }

    /// Dense form, for comparison and small cases.
    pub fn to_dense(&self) -> EpsMatrix {
        match self {
            MamuImage::Scalar { value, dim } => EpsMatrix::identity(*dim).scale_eps(value),
            MamuImage::Diagonal(dg) => EpsMatrix::diag(
                &dg.values.iter().cloned().map(EpsComplex::real).collect::<Vec<_>>(),
            ),
            MamuImage::Dense(m) => m.clone(),
        }
    }

    pub fn diagonal_value(&self, idx: usize) -> EpsComplex {
        match self {
            MamuImage::Scalar { value, .. } => EpsComplex::real(value.clone()),
            MamuImage::Diagonal(dg) => EpsComplex::real(dg.values[idx].clone()),
            MamuImage::Dense(m) => m[(idx, idx)].clone(),
        }
    }
}

/// Ring transfer matrix of `M` on a pair space: `T[(a,b),(a',b')] = M[(a,a'),(b,b')]`.
/// Then `⟨χ_n| M₁ ⊗ ⋯ ⊗ M_n |χ_n⟩ = tr(T₁ ⋯ T_n)`.
fn transfer(m: &EpsMatrix, d: usize) -> EpsMatrix {
    EpsMatrix::from_fn(d * d, d * d, |r, c| {
        let (a, b) = (r / d, r % d);
        let (a2, b2) = (c / d, c % d);
        m[(a * d + a2, b * d + b2)].clone()
    })
}

enum AShape {
    Scalar(Vec<EpsComplex>),
    Diagonal(Vec<Vec<EpsComplex>>),
    General,
}

fn classify_a(p: &MapDecomposition) -> AShape {
    let t = p.d_out();
    let diag_of = |a: &EpsMatrix| -> Option<Vec<EpsComplex>> {
        for r in 0..t {
            for c in 0..t {
                if r != c && !a[(r, c)].is_zero() {
                    return None;
                }
            }
        }
        Some((0..t).map(|k| a[(k, k)].clone()).collect())
    };
    let diags: Option<Vec<Vec<EpsComplex>>> = p.terms().iter().map(|tm| diag_of(&tm.a)).collect();
    match diags {
        None => AShape::General,
        Some(ds) => {
            if ds.iter().all(|v| v.iter().all(|x| *x == v[0])) {
                AShape::Scalar(ds.into_iter().map(|v| v[0].clone()).collect())
            } else {
                AShape::Diagonal(ds)
            }
        }
    }
}

/// All `⟨χ_n| ⊗_k B_{i_k}ᵀ |χ_n⟩`, indexed by term tuples.
fn mamu_coefficients(p: &MapDecomposition, d: usize, n: u32) -> Vec<EpsComplex> {
    let ts: Vec<EpsMatrix> = p
        .terms()
        .iter()
        .map(|tm| transfer(&tm.b.transpose(), d))
        .collect();
    let mut out = Vec::new();
    coeff_rec(&ts, &EpsMatrix::identity(d * d), n, &mut out);
    out
}

fn coeff_rec(ts: &[EpsMatrix], prefix: &EpsMatrix, remaining: u32, out: &mut Vec<EpsComplex>) {
    if remaining == 0 {
        out.push(prefix.trace());
        return;
    }
    for t in ts {
        let next = prefix.matmul(t).expect("square transfer matrices");
        coeff_rec(ts, &next, remaining - 1, out);
    }
}

fn real_part(z: EpsComplex) -> Result<EpsRational> {
    if z.is_real() {
        Ok(z.re)
    } else {
        Err(Error::NotHermitian { row: 0, col: 0 })
    }
}

/// `P^{⊗n}(χ_n)` for a map `M_{d²} → M_t`.
///
/// Uses the ring contraction of the `B` factors; when every `A_i` is diagonal
/// (as in reduced maps) the result is kept diagonal, and when every `A_i` is
/// a multiple of the identity it is a scalar multiple of the identity.
pub fn apply_power_to_mamu(
    p: &MapDecomposition,
    n: u32,
    max_dim: usize,
    max_tuples: usize,
) -> Result<MamuImage> {
    if n == 0 {
        return Err(Error::InvalidArgument("power needs n >= 1".into()));
    }
    let d = perfect_sqrt(p.d_in()).ok_or(Error::NotPerfectSquare(p.d_in()))?;
    let r = p.terms().len();
    let t = p.d_out();
    check_tuples(r, n, max_tuples)?;
    let shape = classify_a(p);
    let coeffs = mamu_coefficients(p, d, n);
    let out_dim = (t as u128).pow(n);
    match shape {
        AShape::Scalar(cs) => {
            let mut acc = EpsComplex::zero();
            for (idx, coef) in coeffs.iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let mut f = coef.clone();
                for i in index_to_tuple(idx, r.max(1), n) {
                    f = f.mul_ref(&cs[i]);
                }
                acc = acc.add_ref(&f);
            }
            Ok(MamuImage::Scalar {
                value: real_part(acc)?,
                dim: usize::try_from(out_dim).unwrap_or(usize::MAX),
            })
        }
        AShape::Diagonal(ds) => {
            check_tuples(t, n, max_tuples)?;
            let sparse: Vec<Vec<(usize, EpsComplex)>> = ds
                .iter()
                .map(|v| v.iter().cloned().enumerate().filter(|(_, x)| !x.is_zero()).collect())
                .collect();
            let mut values = vec![EpsComplex::zero(); out_dim as usize];
            for (idx, coef) in coeffs.iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let mut terms: Vec<(usize, EpsComplex)> = vec![(0, coef.clone())];
                for i in index_to_tuple(idx, r, n) {
                    let mut next = Vec::with_capacity(terms.len() * sparse[i].len());
                    for (pos, v) in &terms {
                        for (k, a) in &sparse[i] {
                            next.push((pos * t + k, v.mul_ref(a)));
                        }
                    }
                    terms = next;
                }
                for (pos, v) in terms {
                    values[pos] = values[pos].add_ref(&v);
                }
            }
            let values = values.into_iter().map(real_part).collect::<Result<Vec<_>>>()?;
            Ok(MamuImage::Diagonal(MamuDiagonal { d: t, n, values }))
        }
        AShape::General => {
            check_cap("MaMu image dimension", out_dim, max_dim)?;
            let mut out = EpsMatrix::zeros(out_dim as usize, out_dim as usize);
            for (idx, coef) in coeffs.iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let mut a = EpsMatrix::identity(1);
                for i in index_to_tuple(idx, r, n) {
                    a = a.kron(&p.terms()[i].a);
                }
                out = out.add(&a.scale(coef))?;
            }
            Ok(MamuImage::Dense(out))
        }
    }
}

/// `P^{⊗n}(χ_n)` by brute force: the dense projector, the explicit Kronecker
/// factors of each term of the tensor power, and [`apply_map`].
pub fn apply_power_to_mamu_dense(p: &MapDecomposition, n: u32, max_dim: usize) -> Result<EpsMatrix> {
    let d = perfect_sqrt(p.d_in()).ok_or(Error::NotPerfectSquare(p.d_in()))?;
    check_cap("MaMu image dimension", (p.d_out() as u128).pow(n), max_dim)?;
    let chi = mamu_projector(d, n, max_dim)?;
    let r = p.terms().len();
    let out_dim = p.d_out().pow(n);
    let mut out = EpsMatrix::zeros(out_dim, out_dim);
    for idx in 0..r.pow(n) {
        let mut a = EpsMatrix::identity(1);
        let mut b = EpsMatrix::identity(1);
        for i in index_to_tuple(idx, r, n) {
            a = a.kron(&p.terms()[i].a);
            b = b.kron(&p.terms()[i].b);
        }
        let term = MapDecomposition::from_pairs(chi.rows(), out_dim, vec![(a, b)])?;
        out = out.add(&apply_map(&term, &chi)?)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub n: u32,
    /// 0-based index tuple.
    pub tuple: Vec<usize>,
    pub tau: String,
    pub mamu: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub holds: bool,
    pub n_max: u32,
    pub first_discrepancy: Option<Discrepancy>,
    /// Levels at which the brute-force dense path was also compared.
    pub dense_checked: Vec<u32>,
}

/// Default largest `n` for the dense cross-check.
pub const DENSE_CHECK_MAX_N: u32 = 2;

/// Compares `τ_n(C)` with `P^{⊗n}(χ_n)` for `n = 1..=n_max`, where `p` is
/// supposed to be the reduced map of `c`.
pub fn compare_reduction(
    c: &MpoTensor,
    p: &MapDecomposition,
    n_max: u32,
    max_dim: usize,
) -> Result<ReductionReport> {
    let mut dense_checked = Vec::new();
    for n in 1..=n_max {
        let tau = tau_n(c, n, DEFAULT_MAX_TUPLES)?;
        let img = apply_power_to_mamu(p, n, max_dim, DEFAULT_MAX_TUPLES)?;
        let dim = tau.values.len();
        let dense_ok = n <= DENSE_CHECK_MAX_N
            && (p.d_in() as u128).pow(n) <= max_dim as u128
            && (p.d_out() as u128).pow(n) <= max_dim as u128;
        let dense = if dense_ok {
            dense_checked.push(n);
            Some(apply_power_to_mamu_dense(p, n, max_dim)?)
        } else {
            None
        };
        let fast = match &img {
            MamuImage::Dense(m) => Some(m),
            _ => None,
        };
        for k in 0..dim {
            let want = EpsComplex::real(tau.values[k].clone());
            let got = img.diagonal_value(k);
            let dense_bad = dense.as_ref().is_some_and(|m| m[(k, k)] != want);
            if got != want || dense_bad {
                return Ok(ReductionReport {
                    holds: false,
                    n_max,
                    first_discrepancy: Some(Discrepancy {
                        n,
                        tuple: tau.tuple(k),
                        tau: want.to_string(),
                        mamu: got.to_string(),
                    }),
                    dense_checked,
                });
            }
        }
        // off-diagonal entries must vanish
        let off = |m: &EpsMatrix| -> Option<(usize, usize)> {
            (0..dim * dim)
                .map(|x| (x / dim, x % dim))
                .find(|&(r, col)| r != col && !m[(r, col)].is_zero())
        };
        for m in [fast, dense.as_ref()].into_iter().flatten() {
            if let Some((r, col)) = off(m) {
                return Ok(ReductionReport {
                    holds: false,
                    n_max,
                    first_discrepancy: Some(Discrepancy {
                        n,
                        tuple: tau.tuple(r),
                        tau: "0".into(),
                        mamu: format!("off-diagonal ({r}, {col}) = {}", m[(r, col)]),
                    }),
                    dense_checked,
                });
            }
        }
    }
    Ok(ReductionReport {
        holds: true,
        n_max,
        first_discrepancy: None,
        dense_checked,
    })
}

/// Reduces `c` and checks `τ_n(C) = P^{⊗n}(χ_n)` for `n ≤ n_max`.
pub fn verify_reduction(c: &MpoTensor, n_max: u32, max_dim: usize) -> Result<ReductionReport> {
    let p = reduce_mpo_to_map(c)?;
    compare_reduction(c, &p, n_max, max_dim)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict")]
pub enum LoopVerdict {
    NoViolationUpTo { n_max: u32 },
    Violation {
        n: u32,
        /// 1-based labels of the offending diagonal entry, when there is one.
        tuple: Option<Vec<usize>>,
        value: Option<EpsRational>,
        witness: Option<EpsVector>,
    },
}

impl LoopVerdict {
    pub fn is_violation(&self) -> bool {
        matches!(self, LoopVerdict::Violation { .. })
    }
}

/// For `n = 1..=n_max`, exact psd check of `P^{⊗n}(χ_n)`; stops at the
/// first failure.
pub fn bounded_tsp_mamu(
    p: &MapDecomposition,
    n_max: u32,
    max_dim: usize,
) -> Result<(LoopVerdict, Vec<MamuImage>)> {
    let mut images = Vec::new();
    for n in 1..=n_max {
        let img = apply_power_to_mamu(p, n, max_dim, DEFAULT_MAX_TUPLES)?;
        let v = img.psd_verdict()?;
        if !v.is_psd() {
            let tuple = match &img {
                MamuImage::Diagonal(dg) => dg
                    .first_negative()
                    .map(|k| dg.tuple(k).into_iter().map(|x| x + 1).collect()),
                MamuImage::Scalar { .. } => Some(vec![1; n as usize]),
                MamuImage::Dense(_) => None,
            };
            images.push(img);
            return Ok((
                LoopVerdict::Violation {
                    n,
                    tuple,
                    value: v.value,
                    witness: v.witness,
                },
                images,
            ));
        }
        images.push(img);
    }
    Ok((LoopVerdict::NoViolationUpTo { n_max }, images))
}

/// For `n = 1..=n_max`, checks every entry of `τ_n(C)` for a negative value.
pub fn bounded_positive_mpo(c: &MpoTensor, n_max: u32) -> Result<LoopVerdict> {
    for n in 1..=n_max {
        let tau = tau_n(c, n, DEFAULT_MAX_TUPLES)?;
        if let Some(k) = tau.first_negative() {
            return Ok(LoopVerdict::Violation {
                n,
                tuple: Some(tau.tuple(k).into_iter().map(|x| x + 1).collect()),
                value: Some(tau.values[k].clone()),
                witness: None,
            });
        }
    }
    Ok(LoopVerdict::NoViolationUpTo { n_max })
}
