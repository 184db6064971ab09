//! Dense matrices over Q(e) + iQ(e).
//!
//! Storage is row-major. Tensor products put the left factor slowest, so in
//! `A ⊗ B` with `B` of size `dB` the basis state `|i j⟩` sits at `i·dB + j`.

pub(crate) mod elim;
mod json;
mod psd;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::epsfield::{EpsComplex, EpsRational};
use crate::error::{Error, Result};
use crate::Rational;

pub use psd::{psd_check, PsdStatus, PsdVerdict};

pub type EpsVector = Vec<EpsComplex>;

/// Split of a square matrix space into `M_dA ⊗ M_dB`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    pub da: usize,
    pub db: usize,
}

impl BipartiteDims {
    pub fn new(da: usize, db: usize) -> Self {
        BipartiteDims { da, db }
    }

    pub fn total(&self) -> usize {
        self.da * self.db
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EpsMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<EpsComplex>,
}

impl fmt::Debug for EpsMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "EpsMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for EpsMatrix {
    type Output = EpsComplex;
    fn index(&self, (r, c): (usize, usize)) -> &EpsComplex {
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for EpsMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut EpsComplex {
        &mut self.entries[r * self.cols + c]
    }
}

fn mismatch<T>(msg: String) -> Result<T> {
    Err(Error::DimensionMismatch(msg))
}

impl EpsMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        EpsMatrix {
            rows,
            cols,
            entries: vec![EpsComplex::zero(); rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = EpsComplex::one();
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<EpsComplex>) -> Result<Self> {
        if entries.len() != rows * cols {
            return mismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            ));
        }
        Ok(EpsMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> EpsComplex) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        EpsMatrix {
            rows,
            cols,
            entries,
        }
    }

    /// Real integer matrix from nested rows (test and construction helper).
    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(r, c, |i, j| EpsComplex::from_int(rows[i][j]))
    }

    pub fn from_rational_rows(rows: &[Vec<Rational>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(r, c, |i, j| EpsComplex::from_rational(&rows[i][j]))
    }

    pub fn diag(d: &[EpsComplex]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn diag_ints(d: &[i64]) -> Self {
        Self::diag(&d.iter().map(|&x| EpsComplex::from_int(x)).collect::<Vec<_>>())
    }

    /// Matrix unit `E_ij` of size `d`.
    pub fn unit(d: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(d, d);
        m[(i, j)] = EpsComplex::one();
        m
    }

    /// `|v⟩⟨w|`
    pub fn outer(v: &[EpsComplex], w: &[EpsComplex]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i].mul_ref(&w[j].conj()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[EpsComplex] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[EpsComplex] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map(&self, f: impl Fn(&EpsComplex) -> EpsComplex) -> Self {
        EpsMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&EpsComplex) -> Result<EpsComplex>) -> Result<Self> {
        Ok(EpsMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect::<Result<_>>()?,
        })
    }

    fn same_shape(&self, o: &Self, what: &str) -> Result<()> {
        if self.rows != o.rows || self.cols != o.cols {
            return mismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, o.rows, o.cols
            ));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o, "add")?;
        Ok(EpsMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| a.add_ref(b))
                .collect(),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same_shape(o, "sub")?;
        Ok(EpsMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| a.sub_ref(b))
                .collect(),
        })
    }

    pub fn neg(&self) -> Self {
        self.map(EpsComplex::neg_ref)
    }

    pub fn scale(&self, s: &EpsComplex) -> Self {
        if s.is_zero() {
            return Self::zeros(self.rows, self.cols);
        }
        self.map(|x| x.mul_ref(s))
    }

    pub fn scale_eps(&self, s: &EpsRational) -> Self {
        self.map(|x| x.scale_eps(s))
    }

    pub fn scale_rational(&self, s: &Rational) -> Self {
        self.scale_eps(&EpsRational::from_rational(s))
    }

    pub fn matmul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return mismatch(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            ));
        }
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(i, j)] = out[(i, j)].add_ref(&a.mul_ref(b));
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[EpsComplex]) -> Result<EpsVector> {
        if v.len() != self.cols {
            return mismatch(format!("mat_vec: {} columns, vector of {}", self.cols, v.len()));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = EpsComplex::zero();
                for (a, x) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc.add_ref(&a.mul_ref(x));
                    }
                }
                acc
            })
            .collect())
    }

    /// `⟨v, M v⟩`
    pub fn quad_form(&self, v: &[EpsComplex]) -> Result<EpsComplex> {
        let mv = self.mat_vec(v)?;
        Ok(inner(v, &mv))
    }

    /// Kronecker product, left factor slowest.
    pub fn kron(&self, o: &Self) -> Self {
        let rows = self.rows * o.rows;
        let cols = self.cols * o.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        let b = &o[(k, l)];
                        if !b.is_zero() {
                            out[(i * o.rows + k, j * o.cols + l)] = a.mul_ref(b);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj(&self) -> Self {
        self.map(EpsComplex::conj)
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> EpsComplex {
        let mut acc = EpsComplex::zero();
        for i in 0..self.rows.min(self.cols) {
            acc = acc.add_ref(&self[(i, i)]);
        }
        acc
    }

    fn check_bipartite(&self, dims: BipartiteDims) -> Result<()> {
        if !self.is_square() || self.rows != dims.total() {
            return mismatch(format!(
                "{}x{} matrix is not on {}x{}",
                self.rows, self.cols, dims.da, dims.db
            ));
        }
        Ok(())
    }

    /// `⟨ij|A^{T_B}|kl⟩ = ⟨il|A|kj⟩`
    pub fn partial_transpose(&self, dims: BipartiteDims) -> Result<Self> {
        self.check_bipartite(dims)?;
        let db = dims.db;
        Ok(Self::from_fn(self.rows, self.cols, |r, c| {
            let (i, j) = (r / db, r % db);
            let (k, l) = (c / db, c % db);
            self[(i * db + l, k * db + j)].clone()
        }))
    }

    /// Transpose of the first factor.
    pub fn partial_transpose_a(&self, dims: BipartiteDims) -> Result<Self> {
        self.check_bipartite(dims)?;
        let db = dims.db;
        Ok(Self::from_fn(self.rows, self.cols, |r, c| {
            let (i, j) = (r / db, r % db);
            let (k, l) = (c / db, c % db);
            self[(k * db + j, i * db + l)].clone()
        }))
    }

    /// Trace over the second factor, leaving a `dA × dA` matrix.
    pub fn partial_trace_b(&self, dims: BipartiteDims) -> Result<Self> {
        self.check_bipartite(dims)?;
        let db = dims.db;
        Ok(Self::from_fn(dims.da, dims.da, |i, k| {
            let mut acc = EpsComplex::zero();
            for j in 0..db {
                acc = acc.add_ref(&self[(i * db + j, k * db + j)]);
            }
            acc
        }))
    }

    /// Trace over the first factor, leaving a `dB × dB` matrix.
    pub fn partial_trace_a(&self, dims: BipartiteDims) -> Result<Self> {
        self.check_bipartite(dims)?;
        let db = dims.db;
        Ok(Self::from_fn(db, db, |j, l| {
            let mut acc = EpsComplex::zero();
            for i in 0..dims.da {
                acc = acc.add_ref(&self[(i * db + j, i * db + l)]);
            }
            acc
        }))
    }

    /// Row-major reshape.
    pub fn reshape(&self, rows: usize, cols: usize) -> Result<Self> {
        if rows * cols != self.entries.len() {
            return mismatch(format!(
                "reshape {}x{} to {rows}x{cols}",
                self.rows, self.cols
            ));
        }
        Ok(EpsMatrix {
            rows,
            cols,
            entries: self.entries.clone(),
        })
    }

    /// First entry `(r, c)` with `M[r][c] != conj(M[c][r])`, if any.
    pub fn hermitian_defect(&self) -> Option<(usize, usize)> {
        if !self.is_square() {
            return Some((0, 0));
        }
        for r in 0..self.rows {
            for c in r..self.cols {
                if self[(r, c)] != self[(c, r)].conj() {
                    return Some((r, c));
                }
            }
        }
        None
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect().is_none()
    }

    pub fn check_hermitian(&self) -> Result<()> {
        match self.hermitian_defect() {
            Some((row, col)) => Err(Error::NotHermitian { row, col }),
            None => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(EpsComplex::is_zero)
    }

    /// True when no entry depends on `e`.
    pub fn is_rational(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_rational() && z.im.is_rational())
    }

    /// Entrywise standard part.
    pub fn shadow(&self) -> Result<Self> {
        self.try_map(|z| {
            let (re, im) = z.shadow()?;
            Ok(EpsComplex::new(
                EpsRational::from_rational(&re),
                EpsRational::from_rational(&im),
            ))
        })
    }

    /// Entrywise evaluation at `e = t`.
    pub fn eval_at(&self, t: &Rational) -> Result<Self> {
        self.try_map(|z| {
            let (re, im) = z.eval_at(t)?;
            Ok(EpsComplex::new(
                EpsRational::from_rational(&re),
                EpsRational::from_rational(&im),
            ))
        })
    }

    /// Entrywise substitution `e := inner`.
    pub fn compose(&self, inner: &EpsRational) -> Result<Self> {
        self.try_map(|z| Ok(EpsComplex::new(z.re.compose(inner)?, z.im.compose(inner)?)))
    }

    /// Float view of the shadow, `(re, im)` per entry, row-major.
    pub fn shadow_f64(&self) -> Result<Vec<(f64, f64)>> {
        self.entries
            .iter()
            .map(|z| Ok((z.re.shadow_f64()?, z.im.shadow_f64()?)))
            .collect()
    }

    pub fn rank(&self) -> usize {
        elim::rank(self)
    }

    /// Basis of the right kernel, each vector checked against `M v = 0`.
    pub fn kernel_basis(&self) -> Vec<EpsVector> {
        elim::kernel_basis(self)
    }

    pub fn determinant(&self) -> Result<EpsComplex> {
        elim::determinant(self)
    }

    pub fn psd_check(&self) -> Result<PsdVerdict> {
        psd_check(self)
    }

    /// Principal submatrix on the given sorted index set.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])].clone())
    }
}

/// `⟨v, w⟩`, conjugate-linear in the first argument.
pub fn inner(v: &[EpsComplex], w: &[EpsComplex]) -> EpsComplex {
    let mut acc = EpsComplex::zero();
    for (a, b) in v.iter().zip(w) {
        if !a.is_zero() && !b.is_zero() {
            acc = acc.add_ref(&a.conj().mul_ref(b));
        }
    }
    acc
}

pub fn basis_vector(d: usize, k: usize) -> EpsVector {
    let mut v = vec![EpsComplex::zero(); d];
    v[k] = EpsComplex::one();
    v
}

pub fn kron_vec(a: &[EpsComplex], b: &[EpsComplex]) -> EpsVector {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.mul_ref(y));
        }
    }
    out
}

/// True iff the `dA × dB` reshape of `v` has rank at most one.
pub fn is_product_vector(v: &[EpsComplex], dims: BipartiteDims) -> Result<bool> {
    if v.len() != dims.total() {
        return mismatch(format!(
            "vector of length {} is not on {}x{}",
            v.len(),
            dims.da,
            dims.db
        ));
    }
    let m = EpsMatrix::from_entries(dims.da, dims.db, v.to_vec())?;
    Ok(m.rank() <= 1)
}

/// `F_d |ij⟩ = |ji⟩`
pub fn flip_operator(d: usize) -> EpsMatrix {
    let mut m = EpsMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = EpsComplex::one();
        }
    }
    m
}

/// `|Ω⟩⟨Ω| = (1/d) Σ_ij |ii⟩⟨jj|`
pub fn max_ent_projector(d: usize) -> EpsMatrix {
    let w = EpsComplex::from_frac(1, d as i64);
    let mut m = EpsMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = w.clone();
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e() -> EpsComplex {
        EpsComplex::real(EpsRational::eps())
    }

    #[test]
    fn kron_examples() {
        assert_eq!(
            EpsMatrix::identity(2).kron(&EpsMatrix::identity(3)),
            EpsMatrix::identity(6)
        );
        let d = EpsMatrix::diag_ints(&[-1, 2]);
        assert_eq!(d.kron(&d), EpsMatrix::diag_ints(&[1, -2, -2, 4]));
        // E_11 ⊗ E_22 in 1-based labels: the single 1 sits at (0·2+1, 0·2+1)
        let k = EpsMatrix::unit(2, 0, 0).kron(&EpsMatrix::unit(2, 1, 1));
        assert_eq!(k, EpsMatrix::unit(4, 1, 1));
    }

    #[test]
    fn flip_examples() {
        let f2 = EpsMatrix::from_int_rows(&[
            &[1, 0, 0, 0],
            &[0, 0, 1, 0],
            &[0, 1, 0, 0],
            &[0, 0, 0, 1],
        ]);
        assert_eq!(flip_operator(2), f2);
        for d in 1..=4 {
            let f = flip_operator(d);
            assert_eq!(f.matmul(&f).unwrap(), EpsMatrix::identity(d * d));
            assert_eq!(max_ent_projector(d).trace(), EpsComplex::one());
        }
    }

    #[test]
    fn flip_partial_transpose() {
        for d in 2..=3 {
            let dims = BipartiteDims::new(d, d);
            let lhs = flip_operator(d).partial_transpose(dims).unwrap();
            // d·|Ω⟩⟨Ω| has a 1 at every (ii, jj)
            let mut rhs = EpsMatrix::zeros(d * d, d * d);
            for i in 0..d {
                for j in 0..d {
                    rhs[(i * d + i, j * d + j)] = EpsComplex::one();
                }
            }
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn partial_trace_and_transpose() {
        let a = EpsMatrix::from_int_rows(&[&[1, 2], &[3, 4]]);
        let b = EpsMatrix::from_fn(3, 3, |i, j| {
            EpsComplex::new(EpsRational::from_int((i * 3 + j) as i64), e().re)
        });
        let dims = BipartiteDims::new(2, 3);
        let ab = a.kron(&b);
        assert_eq!(ab.partial_transpose(dims).unwrap(), a.kron(&b.transpose()));
        assert_eq!(ab.partial_transpose_a(dims).unwrap(), a.transpose().kron(&b));
        assert_eq!(ab.partial_trace_b(dims).unwrap(), a.scale(&b.trace()));
        assert_eq!(ab.partial_trace_a(dims).unwrap(), b.scale(&a.trace()));
        assert!(ab.partial_transpose(BipartiteDims::new(3, 3)).is_err());
    }

    #[test]
    fn product_vectors() {
        let dims = BipartiteDims::new(3, 3);
        let mut v = vec![EpsComplex::zero(); 9];
        v[4] = EpsComplex::one();
        v[8] = EpsComplex::from_int(-1);
        assert!(!is_product_vector(&v, dims).unwrap());
        let p = kron_vec(&basis_vector(3, 1), &basis_vector(3, 2));
        assert!(is_product_vector(&p, dims).unwrap());
        assert!(is_product_vector(&vec![EpsComplex::zero(); 9], dims).unwrap());
        assert!(is_product_vector(&p[..8], dims).is_err());
    }

    #[test]
    fn hermitian_detection() {
        let mut m = EpsMatrix::identity(3);
        m[(0, 2)] = EpsComplex::i();
        assert!(matches!(
            m.check_hermitian(),
            Err(Error::NotHermitian { row: 0, col: 2 })
        ));
        m[(2, 0)] = EpsComplex::i().conj();
        assert!(m.is_hermitian());
    }
}
