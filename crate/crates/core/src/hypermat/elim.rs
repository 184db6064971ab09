//! Gaussian elimination over Q(e) + iQ(e).

use super::{EpsMatrix, EpsVector};
use crate::epsfield::EpsComplex;
use crate::error::{Error, Result};

// cheaper pivots keep intermediate degrees down
fn pivot_cost(z: &EpsComplex) -> usize {
    let deg = |r: &crate::EpsRational| {
        r.num().degree().unwrap_or(0) + r.den().degree().unwrap_or(0)
    };
    deg(&z.re) + deg(&z.im) + usize::from(!z.im.is_zero())
}

/// Reduced row echelon form; returns the pivot columns.
fn rref(m: &mut EpsMatrix) -> Vec<usize> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows)
            .filter(|&i| !m[(i, c)].is_zero())
            .min_by_key(|&i| pivot_cost(&m[(i, c)]))
        else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = m[(p, j)].clone();
                m[(p, j)] = m[(r, j)].clone();
                m[(r, j)] = tmp;
            }
        }
        let inv = m[(r, c)].recip().expect("nonzero pivot");
        for j in c..cols {
            m[(r, j)] = m[(r, j)].mul_ref(&inv);
        }
        for i in 0..rows {
            if i == r || m[(i, c)].is_zero() {
                continue;
            }
            let f = m[(i, c)].clone();
            for j in c..cols {
                if !m[(r, j)].is_zero() {
                    m[(i, j)] = m[(i, j)].sub_ref(&f.mul_ref(&m[(r, j)]));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub(super) fn rank(m: &EpsMatrix) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

/// `M = U V` with `U` the pivot columns of `M` and `V` the nonzero rows of
/// its reduced echelon form. Returned as column vectors of `U` and row
/// vectors of `V`.
pub(crate) fn rank_factorization(m: &EpsMatrix) -> (Vec<EpsVector>, Vec<EpsVector>) {
    let mut w = m.clone();
    let pivots = rref(&mut w);
    let us = pivots
        .iter()
        .map(|&c| (0..m.rows()).map(|r| m[(r, c)].clone()).collect())
        .collect();
    let vs = (0..pivots.len()).map(|r| w.row(r).to_vec()).collect();
    (us, vs)
}

pub(super) fn kernel_basis(m: &EpsMatrix) -> Vec<EpsVector> {
    let mut w = m.clone();
    let pivots = rref(&mut w);
    let cols = m.cols();
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![EpsComplex::zero(); cols];
        v[free] = EpsComplex::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = w[(row, free)].neg_ref();
        }
        let mv = m.mat_vec(&v).expect("matching dims");
        assert!(mv.iter().all(EpsComplex::is_zero), "kernel vector failed M v = 0");
        basis.push(v);
    }
    basis
}

pub(super) fn determinant(m: &EpsMatrix) -> Result<EpsComplex> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "determinant of {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut w = m.clone();
    let mut det = EpsComplex::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !w[(i, c)].is_zero()) else {
            return Ok(EpsComplex::zero());
        };
        if p != c {
            for j in 0..n {
                let tmp = w[(p, j)].clone();
                w[(p, j)] = w[(c, j)].clone();
                w[(c, j)] = tmp;
            }
            det = det.neg_ref();
        }
        let piv = w[(c, c)].clone();
        det = det.mul_ref(&piv);
        let inv = piv.recip()?;
        for i in c + 1..n {
            if w[(i, c)].is_zero() {
                continue;
            }
            let f = w[(i, c)].mul_ref(&inv);
            for j in c..n {
                w[(i, j)] = w[(i, j)].sub_ref(&f.mul_ref(&w[(c, j)]));
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::EpsRational;

    #[test]
    fn rank_and_kernel() {
        assert_eq!(EpsMatrix::identity(5).rank(), 5);
        assert!(EpsMatrix::identity(5).kernel_basis().is_empty());
        let m = EpsMatrix::from_int_rows(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.kernel_basis().len(), 1);
        let e = EpsComplex::real(EpsRational::eps());
        let one = EpsComplex::one();
        let m = EpsMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (1, 1) => one.sub_ref(&e),
            _ => one.clone(),
        });
        assert_eq!(m.rank(), 2);
        assert_eq!(m.determinant().unwrap(), e.neg_ref());
    }
}
