//! Linear maps `P(X) = Σ A_i tr(B_iᵀ X)` and their Choi matrices
//! `C_P = (1/d_in) Σ A_i ⊗ B_i`, output factor first.
//!
//! All partial transposes in the CP / coCP checks act on the input (second)
//! factor.

use serde::{Deserialize, Serialize};

use crate::epsfield::{EpsComplex, EpsRational};
use crate::error::{Error, Result};
use crate::hypermat::{self, psd_check, BipartiteDims, EpsMatrix, PsdVerdict};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapTerm {
    #[serde(rename = "A")]
    pub a: EpsMatrix,
    #[serde(rename = "B")]
    pub b: EpsMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MapDecomposition {
    d_in: usize,
    d_out: usize,
    terms: Vec<MapTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiMatrix {
    pub matrix: EpsMatrix,
    pub dims: BipartiteDims,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EbStatus {
    #[serde(rename = "EB-witnessed")]
    Witnessed,
    NotWitnessed,
}

pub(crate) fn check_cap(what: &'static str, dim: u128, cap: usize) -> Result<()> {
    if dim > cap as u128 {
        return Err(Error::ResourceLimit {
            what,
            needed: dim,
            cap: cap as u128,
        });
    }
    Ok(())
}

/// `tr(Bᵀ X) = Σ_kl B_kl X_kl`
fn pairing(b: &EpsMatrix, x: &EpsMatrix) -> EpsComplex {
    let mut acc = EpsComplex::zero();
    for (p, q) in b.entries().iter().zip(x.entries()) {
        if !p.is_zero() && !q.is_zero() {
            acc = acc.add_ref(&p.mul_ref(q));
        }
    }
    acc
}

impl MapDecomposition {
    pub fn new(d_in: usize, d_out: usize, terms: Vec<MapTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("a map needs at least one term".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.a.rows() != d_out || t.a.cols() != d_out {
                return Err(Error::DimensionMismatch(format!(
                    "term {i}: A is {}x{}, expected {d_out}x{d_out}",
                    t.a.rows(),
                    t.a.cols()
                )));
            }
            if t.b.rows() != d_in || t.b.cols() != d_in {
                return Err(Error::DimensionMismatch(format!(
                    "term {i}: B is {}x{}, expected {d_in}x{d_in}",
                    t.b.rows(),
                    t.b.cols()
                )));
            }
        }
        Ok(MapDecomposition { d_in, d_out, terms })
    }

    pub fn from_pairs(d_in: usize, d_out: usize, pairs: Vec<(EpsMatrix, EpsMatrix)>) -> Result<Self> {
        Self::new(
            d_in,
            d_out,
            pairs.into_iter().map(|(a, b)| MapTerm { a, b }).collect(),
        )
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn terms(&self) -> &[MapTerm] {
        &self.terms
    }

    pub fn choi_dims(&self) -> BipartiteDims {
        BipartiteDims::new(self.d_out, self.d_in)
    }

    /// Terms `(E_kl, E_kl)`.
    pub fn identity(d: usize) -> Self {
        let mut pairs = Vec::with_capacity(d * d);
        for k in 0..d {
            for l in 0..d {
                pairs.push((EpsMatrix::unit(d, k, l), EpsMatrix::unit(d, k, l)));
            }
        }
        Self::from_pairs(d, d, pairs).expect("consistent dims")
    }

    /// Terms `(E_kl, E_lk)`.
    pub fn transposition(d: usize) -> Self {
        let mut pairs = Vec::with_capacity(d * d);
        for k in 0..d {
            for l in 0..d {
                pairs.push((EpsMatrix::unit(d, k, l), EpsMatrix::unit(d, l, k)));
            }
        }
        Self::from_pairs(d, d, pairs).expect("consistent dims")
    }

    /// `Q(X) = tr(X) 1`
    pub fn depolarizing(d: usize) -> Self {
        Self::from_pairs(d, d, vec![(EpsMatrix::identity(d), EpsMatrix::identity(d))])
            .expect("consistent dims")
    }

    pub fn scale(&self, s: &EpsRational) -> Self {
        MapDecomposition {
            d_in: self.d_in,
            d_out: self.d_out,
            terms: self
                .terms
                .iter()
                .map(|t| MapTerm {
                    a: t.a.scale_eps(s),
                    b: t.b.clone(),
                })
                .collect(),
        }
    }

    /// Term concatenation, realising `P + Q`.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.d_in != other.d_in || self.d_out != other.d_out {
            return Err(Error::DimensionMismatch(format!(
                "sum of maps {}->{} and {}->{}",
                self.d_in, self.d_out, other.d_in, other.d_out
            )));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(self.d_in, self.d_out, terms)
    }

    /// Every entry is in Q (no `e`).
    pub fn is_rational(&self) -> bool {
        self.terms.iter().all(|t| t.a.is_rational() && t.b.is_rational())
    }
}

impl<'de> Deserialize<'de> for MapDecomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            d_in: usize,
            d_out: usize,
            terms: Vec<MapTerm>,
        }
        let r = Repr::deserialize(d)?;
        MapDecomposition::new(r.d_in, r.d_out, r.terms).map_err(serde::de::Error::custom)
    }
}

impl ChoiMatrix {
    pub fn new(matrix: EpsMatrix, dims: BipartiteDims) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} Choi matrix on {}x{}",
                matrix.rows(),
                matrix.cols(),
                dims.da,
                dims.db
            )));
        }
        Ok(ChoiMatrix { matrix, dims })
    }

    pub fn d_out(&self) -> usize {
        self.dims.da
    }

    pub fn d_in(&self) -> usize {
        self.dims.db
    }

    pub fn partial_transpose(&self) -> EpsMatrix {
        self.matrix
            .partial_transpose(self.dims)
            .expect("Choi dims are consistent")
    }
}

pub fn choi_from_decomposition(p: &MapDecomposition) -> ChoiMatrix {
    let dim = p.d_out * p.d_in;
    let mut m = EpsMatrix::zeros(dim, dim);
    for t in &p.terms {
        m = m.add(&t.a.kron(&t.b)).expect("same dims");
    }
    let m = m.scale_rational(&Rational::new(1.into(), (p.d_in as i64).into()));
    ChoiMatrix {
        matrix: m,
        dims: p.choi_dims(),
    }
}

pub fn apply_map(p: &MapDecomposition, x: &EpsMatrix) -> Result<EpsMatrix> {
    if x.rows() != p.d_in || x.cols() != p.d_in {
        return Err(Error::DimensionMismatch(format!(
            "input is {}x{}, map takes {}x{}",
            x.rows(),
            x.cols(),
            p.d_in,
            p.d_in
        )));
    }
    let mut out = EpsMatrix::zeros(p.d_out, p.d_out);
    for t in &p.terms {
        let c = pairing(&t.b, x);
        if !c.is_zero() {
            out = out.add(&t.a.scale(&c))?;
        }
    }
    Ok(out)
}

/// `P(X) = d_in · tr_in(C_P (1 ⊗ Xᵀ))`, evaluated from the Choi matrix alone.
pub fn apply_choi(c: &ChoiMatrix, x: &EpsMatrix) -> Result<EpsMatrix> {
    let (d_out, d_in) = (c.d_out(), c.d_in());
    if x.rows() != d_in || x.cols() != d_in {
        return Err(Error::DimensionMismatch(format!(
            "input is {}x{}, Choi expects {d_in}x{d_in}",
            x.rows(),
            x.cols()
        )));
    }
    let lifted = EpsMatrix::identity(d_out).kron(&x.transpose());
    let prod = c.matrix.matmul(&lifted)?;
    Ok(prod
        .partial_trace_b(c.dims)?
        .scale(&EpsComplex::from_int(d_in as i64)))
}

/// Choi matrix of `P^{⊗n}` with all output factors grouped left of all input
/// factors, built entry by entry from `C_P`.
pub fn choi_power(c: &ChoiMatrix, n: u32, max_dim: usize) -> Result<ChoiMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
    }
    let (d_out, d_in) = (c.d_out(), c.d_in());
    let dim = (d_out as u128 * d_in as u128).pow(n);
    check_cap("Choi tensor power dimension", dim, max_dim)?;
    let dim = dim as usize;
    let n = n as usize;
    let in_dim = d_in.pow(n as u32);
    // digits of a grouped index, site 1 slowest
    let split = |idx: usize| -> Vec<usize> {
        let (mut o, mut i) = (idx / in_dim, idx % in_dim);
        let mut sites = vec![0; n];
        for k in (0..n).rev() {
            sites[k] = (o % d_out) * d_in + (i % d_in);
            o /= d_out;
            i /= d_in;
        }
        sites
    };
    let sites: Vec<Vec<usize>> = (0..dim).map(split).collect();
    let mut m = EpsMatrix::zeros(dim, dim);
    for r in 0..dim {
        for col in 0..dim {
            let mut acc = EpsComplex::one();
            for k in 0..n {
                let f = &c.matrix[(sites[r][k], sites[col][k])];
                if f.is_zero() {
                    acc = EpsComplex::zero();
                    break;
                }
                acc = acc.mul_ref(f);
            }
            if !acc.is_zero() {
                m[(r, col)] = acc;
            }
        }
    }
    ChoiMatrix::new(m, BipartiteDims::new(d_out.pow(n as u32), in_dim))
}

pub fn choi_tensor_power(p: &MapDecomposition, n: u32, max_dim: usize) -> Result<ChoiMatrix> {
    let dim = (p.d_out as u128 * p.d_in as u128).pow(n.max(1));
    check_cap("Choi tensor power dimension", dim, max_dim)?;
    choi_power(&choi_from_decomposition(p), n, max_dim)
}

/// The `n`-fold tensor power as an explicit decomposition with `rⁿ` terms.
pub fn tensor_power_decomposition(p: &MapDecomposition, n: u32, max_terms: usize) -> Result<MapDecomposition> {
    let r = p.terms.len() as u128;
    check_cap("tensor power term count", r.pow(n), max_terms)?;
    let mut acc = p.clone();
    for _ in 1..n {
        let mut terms = Vec::with_capacity(acc.terms.len() * p.terms.len());
        for s in &acc.terms {
            for t in &p.terms {
                terms.push(MapTerm {
                    a: s.a.kron(&t.a),
                    b: s.b.kron(&t.b),
                });
            }
        }
        acc = MapDecomposition::new(acc.d_in * p.d_in, acc.d_out * p.d_out, terms)?;
    }
    Ok(acc)
}

pub fn is_cp(p: &MapDecomposition) -> Result<PsdVerdict> {
    psd_check(&choi_from_decomposition(p).matrix)
}

pub fn is_cocp(p: &MapDecomposition) -> Result<PsdVerdict> {
    psd_check(&choi_from_decomposition(p).partial_transpose())
}

/// Sufficient check for entanglement breaking: every `A_i` and `B_i` of the
/// given decomposition is psd.
pub fn eb_witness_check(p: &MapDecomposition) -> Result<EbStatus> {
    for t in &p.terms {
        if !t.a.is_hermitian() || !t.b.is_hermitian() {
            return Ok(EbStatus::NotWitnessed);
        }
        if !psd_check(&t.a)?.is_psd() || !psd_check(&t.b)?.is_psd() {
            return Ok(EbStatus::NotWitnessed);
        }
    }
    Ok(EbStatus::Witnessed)
}

/// `θ ∘ P`: each `A_i` replaced by its transpose.
pub fn compose_with_transpose(p: &MapDecomposition) -> MapDecomposition {
    MapDecomposition {
        d_in: p.d_in,
        d_out: p.d_out,
        terms: p
            .terms
            .iter()
            .map(|t| MapTerm {
                a: t.a.transpose(),
                b: t.b.clone(),
            })
            .collect(),
    }
}

/// Operator-Schmidt splitting of a Choi matrix by exact reshuffle and rank
/// factorisation. Terms are linearly independent, not orthogonal.
pub fn decomposition_from_choi(c: &ChoiMatrix) -> Result<MapDecomposition> {
    let (d_out, d_in) = (c.d_out(), c.d_in());
    // R[(o,o'),(i,i')] = d_in · C[(o,i),(o',i')]
    let scale = EpsComplex::from_int(d_in as i64);
    let r = EpsMatrix::from_fn(d_out * d_out, d_in * d_in, |row, col| {
        let (o, o2) = (row / d_out, row % d_out);
        let (i, i2) = (col / d_in, col % d_in);
        c.matrix[(o * d_in + i, o2 * d_in + i2)].mul_ref(&scale)
    });
    let (us, vs) = hypermat::elim::rank_factorization(&r);
    if us.is_empty() {
        return MapDecomposition::from_pairs(
            d_in,
            d_out,
            vec![(EpsMatrix::zeros(d_out, d_out), EpsMatrix::zeros(d_in, d_in))],
        );
    }
    let pairs = us
        .into_iter()
        .zip(vs)
        .map(|(u, v)| {
            Ok((
                EpsMatrix::from_entries(d_out, d_out, u)?,
                EpsMatrix::from_entries(d_in, d_in, v)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    MapDecomposition::from_pairs(d_in, d_out, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypermat::{flip_operator, max_ent_projector};

    #[test]
    fn identity_choi_is_max_ent() {
        for d in 2..=3 {
            let c = choi_from_decomposition(&MapDecomposition::identity(d));
            assert_eq!(c.matrix, max_ent_projector(d));
        }
    }

    #[test]
    fn transposition_choi_is_flip() {
        for d in 2..=3 {
            let c = choi_from_decomposition(&MapDecomposition::transposition(d));
            let f = flip_operator(d).scale_rational(&Rational::new(1.into(), (d as i64).into()));
            assert_eq!(c.matrix, f);
            assert!(!is_cp(&MapDecomposition::transposition(d)).unwrap().is_psd());
            assert!(is_cocp(&MapDecomposition::transposition(d)).unwrap().is_psd());
        }
    }

    #[test]
    fn depolarizing_apply() {
        let q = MapDecomposition::depolarizing(3);
        let x = EpsMatrix::from_int_rows(&[&[1, 2, 0], &[5, -3, 1], &[0, 0, 7]]);
        let y = apply_map(&q, &x).unwrap();
        assert_eq!(y, EpsMatrix::identity(3).scale(&EpsComplex::from_int(5)));
        assert!(is_cp(&q).unwrap().is_psd());
        assert!(is_cocp(&q).unwrap().is_psd());
        assert_eq!(eb_witness_check(&q).unwrap(), EbStatus::Witnessed);
        assert_eq!(
            eb_witness_check(&MapDecomposition::identity(2)).unwrap(),
            EbStatus::NotWitnessed
        );
    }

    #[test]
    fn identity_power_two() {
        let c = choi_tensor_power(&MapDecomposition::identity(2), 2, 2000).unwrap();
        assert_eq!(c.matrix, max_ent_projector(4));
        assert!(matches!(
            choi_tensor_power(&MapDecomposition::identity(3), 4, 2000),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn decomposition_round_trip() {
        let p = MapDecomposition::transposition(3);
        let c = choi_from_decomposition(&p);
        let q = decomposition_from_choi(&c).unwrap();
        assert_eq!(choi_from_decomposition(&q), c);
    }

    #[test]
    fn json_round_trip() {
        let p = MapDecomposition::transposition(2);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"A\"") && s.contains("\"d_in\":2"));
        let back: MapDecomposition = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<MapDecomposition>(r#"{"d_in":2,"d_out":2,"terms":[]}"#).is_err());
    }
}
