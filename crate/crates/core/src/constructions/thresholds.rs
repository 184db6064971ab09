//! Exact sign analysis of one-parameter families on the positive reals.
//!
//! Candidate breakpoints are the rational roots of the numerators and
//! denominators of a few scalar functions; between and at breakpoints the
//! predicate is evaluated exactly at a sample point. All breakpoints must be
//! rational, otherwise the analysis refuses rather than guessing.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::epsfield::{EpsPolynomial, EpsRational};
use crate::error::{Error, Result};
use crate::Rational;

/// Union of intervals inside `(0, ∞)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealSet {
    pub pieces: Vec<Piece>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub lo: Rational,
    pub lo_closed: bool,
    /// `None` is `+∞`.
    pub hi: Option<Rational>,
    pub hi_closed: bool,
}

fn fmt_q(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for RealSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self
            .pieces
            .iter()
            .map(|p| {
                if p.lo_closed && p.hi_closed && Some(&p.lo) == p.hi.as_ref() {
                    return format!("{{{}}}", fmt_q(&p.lo));
                }
                format!(
                    "{}{}, {}{}",
                    if p.lo_closed { "[" } else { "(" },
                    fmt_q(&p.lo),
                    p.hi.as_ref().map_or("inf".to_string(), fmt_q),
                    if p.hi_closed { "]" } else { ")" }
                )
            })
            .collect();
        write!(f, "{}", parts.join(" u "))
    }
}

impl Serialize for RealSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl RealSet {
    pub fn contains(&self, t: &Rational) -> bool {
        self.pieces.iter().any(|p| {
            let above = if p.lo_closed { *t >= p.lo } else { *t > p.lo };
            let below = match &p.hi {
                None => true,
                Some(h) => {
                    if p.hi_closed {
                        t <= h
                    } else {
                        t < h
                    }
                }
            };
            above && below
        })
    }

    /// Largest `t` with `(0, t] ⊆ self`, if the set starts at zero.
    pub fn initial_segment_end(&self) -> Option<(Rational, bool)> {
        let first = self.pieces.first()?;
        if !first.lo.is_zero() {
            return None;
        }
        first.hi.clone().map(|h| (h, first.hi_closed))
    }
}

/// Checks that a polynomial splits over Q, dividing out each rational root.
fn split_roots(p: &EpsPolynomial) -> Result<Vec<Rational>> {
    let roots = p.rational_roots();
    let mut rest = p.clone();
    for r in &roots {
        let lin = EpsPolynomial::new(vec![-r.clone(), Rational::one()]);
        loop {
            let (q, rem) = rest.div_rem(&lin);
            if !rem.is_zero() {
                break;
            }
            rest = q;
        }
    }
    if !rest.is_constant() {
        return Err(Error::NotRational(format!(
            "polynomial {p} has irrational roots; thresholds cannot be located exactly"
        )));
    }
    Ok(roots)
}

/// Positive breakpoints of a family of rational functions.
pub fn breakpoints(fs: &[EpsRational]) -> Result<Vec<Rational>> {
    let mut pts = Vec::new();
    for f in fs {
        for p in [f.num(), f.den()] {
            if p.is_zero() {
                continue;
            }
            for r in split_roots(p)? {
                if r > Rational::zero() && !pts.contains(&r) {
                    pts.push(r);
                }
            }
        }
    }
    pts.sort();
    Ok(pts)
}

/// The set `{t > 0 : pred(t)}` given that `pred` can only change value at
/// the supplied breakpoints.
pub fn solve_on_positive_reals(
    points: &[Rational],
    mut pred: impl FnMut(&Rational) -> bool,
) -> RealSet {
    // regions: (0,p1), {p1}, (p1,p2), ..., {pk}, (pk, inf)
    let two = Rational::from_integer(2.into());
    let mut regions: Vec<(Rational, bool, Option<Rational>, bool, Rational)> = Vec::new();
    let mut lo = Rational::zero();
    for p in points {
        regions.push((lo.clone(), false, Some(p.clone()), false, (&lo + p) / &two));
        regions.push((p.clone(), true, Some(p.clone()), true, p.clone()));
        lo = p.clone();
    }
    regions.push((lo.clone(), false, None, false, &lo + Rational::one()));

    let mut pieces: Vec<Piece> = Vec::new();
    for (lo, lo_closed, hi, hi_closed, sample) in regions {
        if !pred(&sample) {
            continue;
        }
        if let Some(last) = pieces.last_mut() {
            let touches = last.hi.as_ref() == Some(&lo) && (last.hi_closed || lo_closed);
            if touches {
                last.hi = hi;
                last.hi_closed = hi_closed;
                continue;
            }
        }
        pieces.push(Piece {
            lo,
            lo_closed,
            hi,
            hi_closed,
        });
    }
    RealSet { pieces }
}
