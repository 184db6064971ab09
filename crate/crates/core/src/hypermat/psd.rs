//! Exact positive-semidefiniteness over Q(e) by Hermitian diagonal pivoting.
//!
//! Eigenvalues of a matrix over Q(e) usually leave the field, pivots do not.
//! Each step either finds a certificate of failure on the current Schur
//! complement or eliminates a positive pivot. Certificates are pulled back
//! through the recorded eliminations to a vector on the original space and
//! re-verified before they are returned.

use serde::{Deserialize, Serialize};

use super::{EpsMatrix, EpsVector};
use crate::epsfield::{EpsComplex, EpsRational};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsdStatus {
    #[serde(rename = "PSD")]
    Psd,
    #[serde(rename = "NotPSD")]
    NotPsd,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsdVerdict {
    pub status: PsdStatus,
    /// For `NotPsd`: a vector `v` with `⟨v, M v⟩ < 0`.
    pub witness: Option<EpsVector>,
    /// `⟨v, M v⟩` for the witness.
    pub value: Option<EpsRational>,
}

impl PsdVerdict {
    pub fn psd() -> Self {
        PsdVerdict {
            status: PsdStatus::Psd,
            witness: None,
            value: None,
        }
    }

    pub fn is_psd(&self) -> bool {
        self.status == PsdStatus::Psd
    }

    /// Recomputes `⟨v, M v⟩` and confirms it is negative.
    pub fn recheck(&self, m: &EpsMatrix) -> bool {
        match (&self.status, &self.witness) {
            (PsdStatus::NotPsd, Some(v)) => m
                .quad_form(v)
                .map(|q| q.im.is_zero() && q.re.is_negative())
                .unwrap_or(false),
            _ => false,
        }
    }
}

struct Step {
    pivot: usize,
    a: EpsRational,
    row: Vec<(usize, EpsComplex)>,
}

fn cost(x: &EpsRational) -> usize {
    x.num().degree().unwrap_or(0) + x.den().degree().unwrap_or(0)
}

pub fn psd_check(m: &EpsMatrix) -> Result<PsdVerdict> {
    m.check_hermitian()?;
    let n = m.rows();
    let mut s = m.clone();
    let mut active: Vec<usize> = (0..n).collect();
    let mut steps: Vec<Step> = Vec::new();

    let partial = loop {
        if active.is_empty() {
            return Ok(PsdVerdict::psd());
        }
        if let Some(&k) = active.iter().find(|&&k| s[(k, k)].re.is_negative()) {
            let mut w = vec![EpsComplex::zero(); n];
            w[k] = EpsComplex::one();
            break w;
        }
        let mut found = None;
        for &k in active.iter().filter(|&&k| s[(k, k)].is_zero()) {
            if let Some(&j) = active.iter().find(|&&j| j != k && !s[(k, j)].is_zero()) {
                found = Some((k, j));
                break;
            }
        }
        if let Some((k, j)) = found {
            // v = x e_k + e_j with x = -c S_kj gives S_jj - 2c|S_kj|^2 < 0
            let skj = s[(k, j)].clone();
            let c = s[(j, j)]
                .re
                .abs()
                .add_ref(&EpsRational::one())
                .checked_div(&skj.norm_sqr())?;
            let mut w = vec![EpsComplex::zero(); n];
            w[k] = skj.scale_eps(&c).neg_ref();
            w[j] = EpsComplex::one();
            break w;
        }
        // zero diagonals now have zero rows and drop out
        active.retain(|&k| !s[(k, k)].is_zero());
        let Some(&k) = active.iter().min_by_key(|&&k| cost(&s[(k, k)].re)) else {
            return Ok(PsdVerdict::psd());
        };
        active.retain(|&i| i != k);
        let a = s[(k, k)].re.clone();
        let row: Vec<(usize, EpsComplex)> = active
            .iter()
            .filter(|&&j| !s[(k, j)].is_zero())
            .map(|&j| (j, s[(k, j)].clone()))
            .collect();
        let a_inv = a.recip()?;
        for &(i, ref ski) in &row {
            // S_ik = conj(S_ki)
            let sik_over_a = ski.conj().scale_eps(&a_inv);
            for &(j, ref skj) in &row {
                s[(i, j)] = s[(i, j)].sub_ref(&sik_over_a.mul_ref(skj));
            }
        }
        steps.push(Step { pivot: k, a, row });
    };

    let mut v = partial;
    for step in steps.iter().rev() {
        let mut acc = EpsComplex::zero();
        for (j, mkj) in &step.row {
            if !v[*j].is_zero() {
                acc = acc.add_ref(&mkj.mul_ref(&v[*j]));
            }
        }
        v[step.pivot] = acc.neg_ref().scale_eps(&step.a.recip()?);
    }
    let q = m.quad_form(&v)?;
    assert!(
        q.im.is_zero() && q.re.is_negative(),
        "psd witness failed re-verification"
    );
    Ok(PsdVerdict {
        status: PsdStatus::NotPsd,
        witness: Some(v),
        value: Some(q.re),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        for d in 1..5 {
            assert!(psd_check(&EpsMatrix::identity(d)).unwrap().is_psd());
        }
        let e = EpsComplex::real(EpsRational::eps());
        let one = EpsComplex::one();
        let m = EpsMatrix::from_fn(2, 2, |i, j| {
            if (i, j) == (1, 1) {
                one.sub_ref(&e)
            } else {
                one.clone()
            }
        });
        let v = psd_check(&m).unwrap();
        assert_eq!(v.status, PsdStatus::NotPsd);
        assert!(v.recheck(&m));
    }

    #[test]
    fn zero_diagonal_rule() {
        let mut m = EpsMatrix::zeros(3, 3);
        m[(0, 2)] = EpsComplex::i();
        m[(2, 0)] = EpsComplex::i().conj();
        m[(1, 1)] = EpsComplex::from_int(5);
        let v = psd_check(&m).unwrap();
        assert!(v.recheck(&m));
        assert!(psd_check(&EpsMatrix::zeros(3, 3)).unwrap().is_psd());
    }

    #[test]
    fn lifted_witness() {
        // positive pivots first, failure only in the Schur complement
        let m = EpsMatrix::from_int_rows(&[&[2, 1, 1], &[1, 2, 1], &[1, 1, 0]]);
        let v = psd_check(&m).unwrap();
        assert!(v.recheck(&m));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = EpsMatrix::from_int_rows(&[&[1, 2], &[0, 1]]);
        assert!(psd_check(&m).is_err());
    }
}
