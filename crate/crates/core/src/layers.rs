//! Sequence-indexed scalars, vectors, matrices and maps, ordered through the
//! cofinite filter.
//!
//! A layered object is an explicit prefix followed by a tail rule. Tails that
//! are rational functions of `n` are stored as elements of Q(e) with
//! `e = 1/n`. The order sign of such an element is the eventual sign of the
//! sequence, so the field order certifies cofinite membership. Tails with no
//! eventual sign (periodic sign changes, uncertified custom tails) give
//! [`FilterStatus::Undetermined`].

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::choi::{
    choi_from_decomposition, decomposition_from_choi, is_cocp, is_cp, ChoiMatrix, MapDecomposition,
};
use crate::constructions::mu16_choi;
use crate::epsfield::{EpsPolynomial, EpsRational, Sign};
use crate::error::{Error, Result};
use crate::hypermat::{psd_check, EpsMatrix};
use crate::positivity::{
    eps_bound_for, n_tsp_search, operator_norm, positive_map_search, to_cmatrix, SearchBudget,
    SearchStatus,
};
use crate::{random, rational_to_f64, Rational};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn at_layer(n: u64) -> Rational {
    Rational::new(1.into(), n.into())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tail {
    /// `x_n = f(1/n)`.
    Field(EpsRational),
    /// `x_n = values[(n - 1) mod len]`.
    Periodic(Vec<Rational>),
    /// Explicit values `x_n = table[n - 1]` with a user-supplied eventual
    /// sign holding from layer `from` on.
    Custom {
        table: Vec<Rational>,
        sign: Option<Sign>,
        from: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredScalar {
    pub prefix: Vec<Rational>,
    pub tail: Tail,
    pub window: (u64, u64),
}

pub const DEFAULT_WINDOW: (u64, u64) = (1, 20);

/// `1 + ⌊1/r⌋` where `r` is a lower bound on the nonzero roots of `p`: past
/// this layer, `p(1/n)` has no roots.
fn root_free_from(p: &EpsPolynomial) -> u64 {
    let Some(v) = p.valuation() else { return 1 };
    let low = p.coeff(v).abs();
    let rest = p.coeffs()[v + 1..]
        .iter()
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    if rest.is_zero() {
        return 1;
    }
    // |root| >= low / (low + rest)
    let inv = (&low + &rest) / &low;
    let fl = inv.floor().to_integer();
    u64::try_from(fl).unwrap_or(u64::MAX - 1) + 1
}

impl LayeredScalar {
    pub fn field(f: EpsRational) -> Self {
        LayeredScalar {
            prefix: Vec::new(),
            tail: Tail::Field(f),
            window: DEFAULT_WINDOW,
        }
    }

    pub fn constant(c: Rational) -> Self {
        Self::field(EpsRational::from_rational(&c))
    }

    /// `x_n = 1/n`
    pub fn reciprocal() -> Self {
        Self::field(EpsRational::eps())
    }

    /// `x_n = n`
    pub fn linear() -> Self {
        Self::field(EpsRational::eps().recip().expect("nonzero"))
    }

    pub fn periodic(values: Vec<Rational>) -> Self {
        LayeredScalar {
            prefix: Vec::new(),
            tail: Tail::Periodic(values),
            window: DEFAULT_WINDOW,
        }
    }

    pub fn with_prefix(mut self, prefix: Vec<Rational>) -> Self {
        self.prefix = prefix;
        self
    }

    pub fn with_window(mut self, lo: u64, hi: u64) -> Self {
        self.window = (lo.max(1), hi.max(lo.max(1)));
        self
    }

    /// The `n`-th entry, `n >= 1`.
    pub fn value(&self, n: u64) -> Result<Rational> {
        if n == 0 {
            return Err(Error::InvalidArgument("layers are numbered from 1".into()));
        }
        if let Some(v) = self.prefix.get(n as usize - 1) {
            return Ok(v.clone());
        }
        match &self.tail {
            Tail::Field(f) => f.eval_at(&at_layer(n)),
            Tail::Periodic(vs) => Ok(vs[(n as usize - 1) % vs.len()].clone()),
            Tail::Custom { table, .. } => table.get(n as usize - 1).cloned().ok_or_else(|| {
                Error::InvalidArgument(format!("custom tail has no value at layer {n}"))
            }),
        }
    }

    /// The sign the sequence takes on a cofinite set, when known.
    pub fn eventual_sign(&self) -> Option<Sign> {
        match &self.tail {
            Tail::Field(f) => Some(f.sign()),
            Tail::Periodic(vs) => {
                let s = Sign::of_rational(&vs[0]);
                vs.iter().all(|v| Sign::of_rational(v) == s).then_some(s)
            }
            Tail::Custom { sign, .. } => *sign,
        }
    }

    /// A layer from which the tail has its eventual sign.
    pub fn stable_from(&self) -> u64 {
        let after_prefix = self.prefix.len() as u64 + 1;
        let tail_from = match &self.tail {
            Tail::Field(f) => root_free_from(f.num()).max(root_free_from(f.den())),
            Tail::Periodic(_) => 1,
            Tail::Custom { from, .. } => *from,
        };
        after_prefix.max(tail_from)
    }

    fn kind(&self) -> &'static str {
        match &self.tail {
            Tail::Field(_) => "rational",
            Tail::Periodic(_) => "periodic",
            Tail::Custom { .. } => "custom",
        }
    }

    fn combine(
        &self,
        o: &Self,
        fv: impl Fn(&Rational, &Rational) -> Rational,
        ff: impl Fn(&EpsRational, &EpsRational) -> EpsRational,
    ) -> Result<Self> {
        let len = self.prefix.len().max(o.prefix.len());
        let prefix = (1..=len as u64)
            .map(|n| Ok(fv(&self.value(n)?, &o.value(n)?)))
            .collect::<Result<Vec<_>>>()?;
        let as_periodic = |t: &Tail| -> Option<Vec<Rational>> {
            match t {
                Tail::Periodic(v) => Some(v.clone()),
                Tail::Field(f) => f.as_rational().map(|c| vec![c]),
                Tail::Custom { .. } => None,
            }
        };
        let tail = match (&self.tail, &o.tail) {
            (Tail::Field(a), Tail::Field(b)) => Tail::Field(ff(a, b)),
            (x, y) => match (as_periodic(x), as_periodic(y)) {
                (Some(a), Some(b)) => {
                    let l = a.len().lcm(&b.len());
                    Tail::Periodic((0..l).map(|k| fv(&a[k % a.len()], &b[k % b.len()])).collect())
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "cannot combine {} and {} tails",
                        self.kind(),
                        o.kind()
                    )))
                }
            },
        };
        Ok(LayeredScalar {
            prefix,
            tail,
            window: self.window,
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a + b, EpsRational::add_ref)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a - b, EpsRational::sub_ref)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a * b, EpsRational::mul_ref)
    }

    pub fn neg(&self) -> Result<Self> {
        self.mul(&Self::constant(-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Result<Self> {
        self.mul(&Self::constant(c.clone()))
    }
}

fn rational_json(r: &Rational) -> Value {
    if r.is_integer() {
        if let Ok(i) = i64::try_from(r.numer().clone()) {
            return Value::from(i);
        }
    }
    Value::String(format!("{}/{}", r.numer(), r.denom()))
}

fn parse_rational(v: &Value) -> std::result::Result<Rational, String> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|i| Rational::from_integer(i.into()))
            .ok_or_else(|| format!("{n} is not an integer; write fractions as \"p/q\"")),
        Value::String(s) => EpsRational::parse(s)
            .map_err(|e| e.to_string())?
            .as_rational()
            .ok_or_else(|| format!("{s} is not rational")),
        other => Err(format!("expected a rational, got {other}")),
    }
}

fn parse_rationals(v: &Value) -> std::result::Result<Vec<Rational>, String> {
    v.as_array()
        .ok_or_else(|| format!("expected a list, got {v}"))?
        .iter()
        .map(parse_rational)
        .collect()
}

fn param<'a>(p: &'a Value, key: &str) -> std::result::Result<&'a Value, String> {
    p.get(key).ok_or_else(|| format!("tail params need \"{key}\""))
}

/// Builds a tail from `{"kind": …, "params": …}`.
///
/// Kinds: `constant {c}`, `reciprocal {c, power}` (`c/n^power`),
/// `linear {a, b}` (`a·n + b`), `polynomial {coeffs}` (`Σ c_k n^k`),
/// `rational {expr}` (text in `e = 1/n`), `periodic {values}`,
/// `custom {table, sign, from}`.
pub fn tail_from_json(kind: &str, p: &Value) -> std::result::Result<Tail, String> {
    let inv_e = EpsRational::eps().recip().expect("nonzero");
    Ok(match kind {
        "constant" => Tail::Field(EpsRational::from_rational(&parse_rational(param(p, "c")?)?)),
        "reciprocal" => {
            let c = p.get("c").map(parse_rational).transpose()?.unwrap_or_else(Rational::one);
            let k = p.get("power").and_then(Value::as_u64).unwrap_or(1) as usize;
            Tail::Field(EpsRational::eps_pow(k).scale(&c))
        }
        "linear" => {
            let a = parse_rational(param(p, "a")?)?;
            let b = p.get("b").map(parse_rational).transpose()?.unwrap_or_else(Rational::zero);
            Tail::Field(inv_e.scale(&a).add_ref(&EpsRational::from_rational(&b)))
        }
        "polynomial" => {
            let cs = parse_rationals(param(p, "coeffs")?)?;
            let mut acc = EpsRational::zero();
            for (k, c) in cs.iter().enumerate() {
                acc = acc.add_ref(&inv_e.pow(k as u32).scale(c));
            }
            Tail::Field(acc)
        }
        "rational" => {
            let s = param(p, "expr")?
                .as_str()
                .ok_or("\"expr\" must be a string")?;
            Tail::Field(EpsRational::parse(s).map_err(|e| e.to_string())?)
        }
        "periodic" => {
            let vs = parse_rationals(param(p, "values")?)?;
            if vs.is_empty() {
                return Err("periodic tail needs at least one value".into());
            }
            Tail::Periodic(vs)
        }
        "custom" => {
            let table = parse_rationals(param(p, "table")?)?;
            let sign = match p.get("sign") {
                None | Some(Value::Null) => None,
                Some(s) => Some(serde_json::from_value(s.clone()).map_err(|e| e.to_string())?),
            };
            let from = p.get("from").and_then(Value::as_u64).unwrap_or(1);
            Tail::Custom { table, sign, from }
        }
        other => return Err(format!("unknown tail kind {other:?}")),
    })
}

impl Serialize for LayeredScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tail = match &self.tail {
            Tail::Field(f) => json!({"kind": "rational", "params": {"expr": f.to_string()}}),
            Tail::Periodic(vs) => json!({
                "kind": "periodic",
                "params": {"values": vs.iter().map(rational_json).collect::<Vec<_>>()}
            }),
            Tail::Custom { table, sign, from } => json!({
                "kind": "custom",
                "params": {
                    "table": table.iter().map(rational_json).collect::<Vec<_>>(),
                    "sign": sign,
                    "from": from,
                }
            }),
        };
        json!({
            "prefix": self.prefix.iter().map(rational_json).collect::<Vec<_>>(),
            "tail": tail,
            "window": [self.window.0, self.window.1],
        })
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LayeredScalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct RawTail {
            kind: String,
            #[serde(default)]
            params: Value,
        }
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default)]
            prefix: Vec<Value>,
            tail: RawTail,
            window: Option<(u64, u64)>,
        }
        let raw = Raw::deserialize(de)?;
        let prefix = raw
            .prefix
            .iter()
            .map(parse_rational)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        let tail = tail_from_json(&raw.tail.kind, &raw.tail.params).map_err(D::Error::custom)?;
        let (lo, hi) = raw.window.unwrap_or(DEFAULT_WINDOW);
        if lo == 0 || hi < lo {
            return Err(D::Error::custom("window must satisfy 1 <= lo <= hi"));
        }
        Ok(LayeredScalar {
            prefix,
            tail,
            window: (lo, hi),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FilterStatus {
    HoldsOnCofinite,
    FailsOnCofinite,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowPoint {
    pub n: u64,
    /// `None` when the layer could not be evaluated.
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FilterVerdict {
    pub status: FilterStatus,
    pub predicate: String,
    pub tail: String,
    /// Layer from which the tail certificate applies.
    pub from: Option<u64>,
    pub window: Vec<WindowPoint>,
    pub note: Option<String>,
}

impl FilterVerdict {
    pub fn holds(&self) -> bool {
        self.status == FilterStatus::HoldsOnCofinite
    }

    pub fn fails(&self) -> bool {
        self.status == FilterStatus::FailsOnCofinite
    }
}

fn sign_verdict(x: &LayeredScalar, predicate: &str, accept: impl Fn(Sign) -> bool) -> FilterVerdict {
    let (lo, hi) = x.window;
    let window: Vec<WindowPoint> = (lo..=hi)
        .map(|n| WindowPoint {
            n,
            holds: x.value(n).ok().map(|v| accept(Sign::of_rational(&v))),
        })
        .collect();
    let Some(s) = x.eventual_sign() else {
        return FilterVerdict {
            status: FilterStatus::Undetermined,
            predicate: predicate.into(),
            tail: x.kind().into(),
            from: None,
            window,
            note: Some("tail has no eventual sign; the cofinite filter cannot decide".into()),
        };
    };
    let from = x.stable_from();
    let expected = accept(s);
    let contradicted = window
        .iter()
        .find(|w| w.n >= from && w.holds.is_some_and(|h| h != expected));
    if let Some(w) = contradicted {
        // only a wrong custom certificate can get here
        return FilterVerdict {
            status: FilterStatus::Undetermined,
            predicate: predicate.into(),
            tail: x.kind().into(),
            from: None,
            note: Some(format!("tail certificate contradicted at layer {}", w.n)),
            window,
        };
    }
    FilterVerdict {
        status: if expected {
            FilterStatus::HoldsOnCofinite
        } else {
            FilterStatus::FailsOnCofinite
        },
        predicate: predicate.into(),
        tail: x.kind().into(),
        from: Some(from),
        window,
        note: None,
    }
}

/// Whether `x_n >= 0` on a cofinite set.
pub fn seq_sign(x: &LayeredScalar) -> FilterVerdict {
    sign_verdict(x, "x_n >= 0", |s| s != Sign::Negative)
}

/// Whether `x_n > 0` on a cofinite set.
pub fn seq_positive(x: &LayeredScalar) -> FilterVerdict {
    sign_verdict(x, "x_n > 0", |s| s == Sign::Positive)
}

/// Whether `x_n < y_n` on a cofinite set.
pub fn seq_less(x: &LayeredScalar, y: &LayeredScalar) -> Result<FilterVerdict> {
    let d = y.sub(x)?;
    let mut v = sign_verdict(&d, "x_n < y_n", |s| s == Sign::Positive);
    v.predicate = "x_n < y_n".into();
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Magnitude {
    Zero,
    PositiveInfinitesimal,
    NegativeInfinitesimal,
    Finite,
    PositiveInfinite,
    NegativeInfinite,
    Undetermined,
}

/// Size of `x` relative to the rationals, decided on the tail.
pub fn magnitude(x: &LayeredScalar) -> Magnitude {
    match &x.tail {
        Tail::Field(f) => match (f.sign(), f.is_infinitesimal(), f.is_finite()) {
            (Sign::Zero, _, _) => Magnitude::Zero,
            (Sign::Positive, true, _) => Magnitude::PositiveInfinitesimal,
            (Sign::Negative, true, _) => Magnitude::NegativeInfinitesimal,
            (_, false, true) => Magnitude::Finite,
            (Sign::Positive, _, false) => Magnitude::PositiveInfinite,
            (Sign::Negative, _, false) => Magnitude::NegativeInfinite,
        },
        Tail::Periodic(vs) if vs.iter().all(Zero::is_zero) => Magnitude::Zero,
        Tail::Periodic(_) => Magnitude::Finite,
        Tail::Custom { .. } => Magnitude::Undetermined,
    }
}

/// Real vector with layered entries.
#[derive(Clone, Debug)]
pub struct LayeredVector {
    pub components: Vec<LayeredScalar>,
}

/// `(⟨a_n, b_n⟩)_n`
pub fn quasi_inner(a: &LayeredVector, b: &LayeredVector) -> Result<LayeredScalar> {
    if a.components.len() != b.components.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            a.components.len(),
            b.components.len()
        )));
    }
    let mut acc = LayeredScalar::constant(Rational::zero());
    for (x, y) in a.components.iter().zip(&b.components) {
        acc = acc.add(&x.mul(y)?)?;
    }
    if let Some(first) = a.components.first() {
        acc.window = first.window;
    }
    Ok(acc)
}

/// Layer `n` is `prefix[n-1]`, then the tail at `e = 1/n`.
#[derive(Clone, Debug)]
pub struct LayeredMatrix {
    pub prefix: Vec<EpsMatrix>,
    pub tail: EpsMatrix,
    pub window: (u64, u64),
}

impl LayeredMatrix {
    pub fn layer(&self, n: u64) -> Result<EpsMatrix> {
        match self.prefix.get(n as usize - 1) {
            Some(m) => Ok(m.clone()),
            None => self.tail.eval_at(&at_layer(n)),
        }
    }
}

/// Cofinite psd: exact checks on the window, and an exact psd check of the
/// tail over Q(e) as the certificate (psd over Q(e) is psd at `e = 1/n` for
/// all large `n`).
pub fn layered_psd(a: &LayeredMatrix) -> Result<FilterVerdict> {
    a.tail.check_hermitian()?;
    let (lo, hi) = a.window;
    let mut window = Vec::new();
    for n in lo..=hi {
        let m = a.layer(n)?;
        m.check_hermitian()?;
        window.push(WindowPoint {
            n,
            holds: Some(psd_check(&m)?.is_psd()),
        });
    }
    let tail_psd = psd_check(&a.tail)?.is_psd();
    Ok(FilterVerdict {
        status: if tail_psd {
            FilterStatus::HoldsOnCofinite
        } else {
            FilterStatus::FailsOnCofinite
        },
        predicate: "A_n >= 0".into(),
        tail: "rational".into(),
        from: None,
        window,
        note: None,
    })
}

fn eval_map(p: &MapDecomposition, t: &Rational) -> Result<MapDecomposition> {
    let pairs = p
        .terms()
        .iter()
        .map(|tm| Ok((tm.a.eval_at(t)?, tm.b.eval_at(t)?)))
        .collect::<Result<Vec<_>>>()?;
    MapDecomposition::from_pairs(p.d_in(), p.d_out(), pairs)
}

#[derive(Clone, Debug)]
pub struct LayeredMap {
    pub prefix: Vec<MapDecomposition>,
    pub tail: MapDecomposition,
    pub window: (u64, u64),
    /// Declared uniform bound on `‖Σ A_i ⊗ B_i‖` across layers.
    pub norm_bound: f64,
}

impl LayeredMap {
    pub fn constant(p: MapDecomposition, window: (u64, u64), norm_bound: f64) -> Self {
        LayeredMap {
            prefix: Vec::new(),
            tail: p,
            window,
            norm_bound,
        }
    }

    pub fn layer(&self, n: u64) -> Result<MapDecomposition> {
        match self.prefix.get(n as usize - 1) {
            Some(p) => Ok(p.clone()),
            None => eval_map(&self.tail, &at_layer(n)),
        }
    }

    fn check_bounded(&self) -> Result<()> {
        for n in self.window.0..=self.window.1 {
            let p = self.layer(n)?;
            let c = choi_from_decomposition(&p);
            let norm = operator_norm(&to_cmatrix(&c.matrix)?) * p.d_in() as f64;
            if norm > self.norm_bound * (1.0 + 1e-9) {
                return Err(Error::UnboundedWindow {
                    layer: n,
                    norm,
                    bound: self.norm_bound,
                });
            }
        }
        Ok(())
    }
}

fn layered_exact(
    p: &LayeredMap,
    predicate: &str,
    check: impl Fn(&MapDecomposition) -> Result<bool>,
) -> Result<FilterVerdict> {
    p.check_bounded()?;
    let mut window = Vec::new();
    for n in p.window.0..=p.window.1 {
        window.push(WindowPoint {
            n,
            holds: Some(check(&p.layer(n)?)?),
        });
    }
    let tail = check(&p.tail)?;
    Ok(FilterVerdict {
        status: if tail {
            FilterStatus::HoldsOnCofinite
        } else {
            FilterStatus::FailsOnCofinite
        },
        predicate: predicate.into(),
        tail: "rational".into(),
        from: None,
        window,
        note: None,
    })
}

pub fn layered_cp(p: &LayeredMap) -> Result<FilterVerdict> {
    layered_exact(p, "P_n completely positive", |m| Ok(is_cp(m)?.is_psd()))
}

pub fn layered_cocp(p: &LayeredMap) -> Result<FilterVerdict> {
    layered_exact(p, "P_n completely copositive", |m| Ok(is_cocp(m)?.is_psd()))
}

/// Positivity under layers. A CP or coCP tail certifies it; otherwise the
/// per-layer searches are one-sided evidence and the verdict stays
/// `Undetermined`.
pub fn layered_map_positive(p: &LayeredMap, budget: &SearchBudget) -> Result<FilterVerdict> {
    p.check_bounded()?;
    let mut window = Vec::new();
    for n in p.window.0..=p.window.1 {
        let v = positive_map_search(&p.layer(n)?, budget)?;
        window.push(WindowPoint {
            n,
            holds: Some(!v.violation_found()),
        });
    }
    let tail_cp = is_cp(&p.tail)?.is_psd() || is_cocp(&p.tail)?.is_psd();
    let status = if tail_cp {
        FilterStatus::HoldsOnCofinite
    } else {
        FilterStatus::Undetermined
    };
    Ok(FilterVerdict {
        status,
        predicate: "P_n positive".into(),
        tail: "rational".into(),
        from: None,
        window,
        note: Some("window entries come from a one-sided search".into()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct L2Layer {
    pub n: u64,
    pub eps_prime: f64,
    pub mu: f64,
    /// Rescaling factor applied to the Choi matrix.
    pub scale: String,
    pub not_cp: bool,
    pub not_cocp: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct L2Check {
    pub m: u32,
    pub n: u64,
    pub status: SearchStatus,
    pub best_value: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct L2WitnessReport {
    pub m_max: u32,
    pub window: (u64, u64),
    pub layers: Vec<L2Layer>,
    pub checks: Vec<L2Check>,
    /// Every layer fails CP and coCP exactly.
    pub essential: bool,
    /// No search found a violation of `P_n^{⊗m} ≥ 0` for `n >= m`.
    pub m_tsp_evidence: bool,
    pub one_sided: bool,
}

impl L2WitnessReport {
    pub fn passes(&self) -> bool {
        self.essential && self.m_tsp_evidence
    }
}

/// Layer `n` of the l²-tsp witness: Choi matrix `(C − ε_n'·1)/‖C − ε_n'·1‖`
/// for the rank-deficient separable `C`, with `ε_n'` the level-`n` bound.
pub fn l2_layer(n: u64, budget: &SearchBudget) -> Result<(MapDecomposition, L2Layer)> {
    let c = mu16_choi(3, 3)?;
    let rep = eps_bound_for(&c.matrix, c.dims, n as u32, budget)?;
    let eps = Rational::from_float(rep.eps)
        .ok_or_else(|| Error::InvalidArgument(format!("bound {} is not finite", rep.eps)))?;
    let shifted = c
        .matrix
        .sub(&EpsMatrix::identity(9).scale_rational(&eps))?;
    let norm = operator_norm(&to_cmatrix(&shifted)?);
    // any positive rescaling will do; the float reciprocal is exact as a rational
    let scale = Rational::from_float(1.0 / norm).unwrap_or_else(Rational::one);
    let choi = ChoiMatrix::new(shifted.scale_rational(&scale), c.dims)?;
    let p = decomposition_from_choi(&choi)?;
    let not_cp = !psd_check(&choi.matrix)?.is_psd();
    let not_cocp = !psd_check(&choi.partial_transpose())?.is_psd();
    Ok((
        p,
        L2Layer {
            n,
            eps_prime: rep.eps,
            mu: rep.mu,
            scale: scale.to_string(),
            not_cp,
            not_cocp,
        },
    ))
}

pub fn l2_tsp_witness(
    m_max: u32,
    window: (u64, u64),
    budget: &SearchBudget,
    max_dim: usize,
) -> Result<L2WitnessReport> {
    if window.0 == 0 || window.1 < window.0 {
        return Err(Error::InvalidArgument("window must satisfy 1 <= lo <= hi".into()));
    }
    let mut layers = Vec::new();
    let mut checks = Vec::new();
    for n in window.0..=window.1 {
        let (p, info) = l2_layer(n, budget)?;
        for m in 1..=m_max {
            if n < m as u64 {
                continue;
            }
            let v = n_tsp_search(&p, m, budget, max_dim)?;
            checks.push(L2Check {
                m,
                n,
                status: v.status,
                best_value: v.value,
            });
        }
        layers.push(info);
    }
    Ok(L2WitnessReport {
        m_max,
        window,
        essential: layers.iter().all(|l| l.not_cp && l.not_cocp),
        m_tsp_evidence: checks.iter().all(|c| c.status == SearchStatus::NoViolationFound),
        layers,
        checks,
        one_sided: true,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InnerProductReport {
    pub eps: String,
    pub cutoff: u64,
    /// `1 − ε² Σ y_n²` over the truncated sequence.
    pub standard_value: f64,
    pub standard_lower: String,
    pub standard_upper: String,
    pub standard_sign: Option<Sign>,
    pub sequence: LayeredScalar,
    pub sequence_verdict: FilterVerdict,
    pub disagreement: bool,
}

/// Compares the standard inner product of `x + εy` and `x − εy` with the
/// layerwise one, for `x = (1, 0, 0, …)`, `y = (0, 1, 1/2, 1/3, …)`.
pub fn inner_product_counterexample(eps: &Rational, cutoff: u64) -> Result<InnerProductReport> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument("cutoff must be at least 2".into()));
    }
    // Σ_{k=1}^{cutoff-1} 1/k², bracketed exactly
    let terms = cutoff - 1;
    let k_exact = terms.min(64);
    let mut s_lo = Rational::zero();
    for k in 1..=k_exact {
        s_lo += q(1, (k * k) as i64);
    }
    let mut s_hi = s_lo.clone();
    if terms > k_exact {
        // Σ_{k>K} 1/k² < 1/K
        s_hi += q(1, k_exact as i64);
    }
    let basel_upper = q(16_449_341, 10_000_000);
    if s_hi > basel_upper {
        s_hi = basel_upper;
    }
    let e2 = eps * eps;
    let lower = Rational::one() - &e2 * &s_hi;
    let upper = Rational::one() - &e2 * &s_lo;
    let standard_sign = if lower.is_positive() {
        Some(Sign::Positive)
    } else if upper.is_negative() {
        Some(Sign::Negative)
    } else if lower == upper {
        Some(Sign::of_rational(&lower))
    } else {
        None
    };
    let mut sum = 0.0f64;
    for k in (1..=terms).rev() {
        let kf = k as f64;
        sum += 1.0 / (kf * kf);
    }
    let standard_value = 1.0 - rational_to_f64(&e2) * sum;

    let x = LayeredScalar::constant(Rational::zero()).with_prefix(vec![Rational::one()]);
    // y_n = 1/(n-1) = e/(1-e) for n >= 2
    let y_tail = EpsRational::eps().checked_div(&EpsRational::one().sub_ref(&EpsRational::eps()))?;
    let y = LayeredScalar::field(y_tail).with_prefix(vec![Rational::zero()]);
    let ey = y.scale(eps)?;
    let a = LayeredVector {
        components: vec![x.add(&ey)?.with_window(1, 20)],
    };
    let b = LayeredVector {
        components: vec![x.sub(&ey)?.with_window(1, 20)],
    };
    let sequence = quasi_inner(&a, &b)?;
    let sequence_verdict = seq_sign(&sequence);
    let disagreement = standard_sign == Some(Sign::Positive) && sequence_verdict.fails();
    Ok(InnerProductReport {
        eps: eps.to_string(),
        cutoff,
        standard_value,
        standard_lower: lower.to_string(),
        standard_upper: upper.to_string(),
        standard_sign,
        sequence,
        sequence_verdict,
        disagreement,
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RingOrderReport {
    pub samples: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl RingOrderReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// An eventually sign-definite sample: short prefix, rational tail with no
/// positive rational poles.
pub fn random_layered<R: Rng>(rng: &mut R) -> LayeredScalar {
    let plen = rng.gen_range(0..3);
    let prefix = (0..plen).map(|_| random::small_rational(rng, 4, 3)).collect();
    let tail = if rng.gen_range(0..8) == 0 {
        EpsRational::zero()
    } else {
        loop {
            let f = random::eps_rational(rng);
            let poles = f.den().rational_roots();
            if poles.iter().all(|r| !r.is_positive()) {
                // also allow growth: divide by e sometimes
                break if rng.gen_bool(0.25) {
                    f.checked_div(&EpsRational::eps()).expect("nonzero")
                } else {
                    f
                };
            }
        }
    };
    LayeredScalar::field(tail).with_prefix(prefix).with_window(1, 8)
}

/// Property checks of the cofinite order on the decidable fragment, with an
/// independent sign oracle: exact evaluation past the root bound.
pub fn ring_order_axioms(samples: usize, seed: u64) -> RingOrderReport {
    let mut rng = random::rng(seed);
    let xs: Vec<LayeredScalar> = (0..samples).map(|_| random_layered(&mut rng)).collect();
    let mut rep = RingOrderReport {
        samples,
        ..Default::default()
    };
    let in_t = |x: &LayeredScalar| seq_sign(x).holds();
    let in_support = |x: &LayeredScalar| x.eventual_sign() == Some(Sign::Zero);
    let check = |rep: &mut RingOrderReport, ok: bool, what: String| {
        rep.checks += 1;
        if !ok {
            rep.failures.push(what);
        }
    };
    for (i, a) in xs.iter().enumerate() {
        let b = &xs[(i + 1) % samples];
        let c = &xs[(i + 2) % samples];
        // sign oracle
        let s = a.eventual_sign();
        let from = a.stable_from();
        let oracle = [from, from + 7]
            .iter()
            .map(|&n| a.value(n).map(|v| Sign::of_rational(&v)).ok())
            .collect::<Vec<_>>();
        check(
            &mut rep,
            oracle.iter().all(|o| *o == s),
            format!("sample {i}: eventual sign {s:?} vs evaluation {oracle:?}"),
        );
        // totality on the decidable fragment
        let na = a.neg().expect("field tails");
        check(&mut rep, in_t(a) || in_t(&na), format!("sample {i}: neither x nor -x in T"));
        // squares
        let sq = a.mul(a).expect("field tails");
        check(&mut rep, in_t(&sq), format!("sample {i}: square not in T"));
        // closure
        if in_t(a) && in_t(b) {
            check(&mut rep, in_t(&a.add(b).expect("field")), format!("sample {i}: T + T"));
            check(&mut rep, in_t(&a.mul(b).expect("field")), format!("sample {i}: T · T"));
        }
        // support is an ideal
        if in_support(a) {
            let p = a.mul(b).expect("field");
            check(&mut rep, in_support(&p), format!("sample {i}: support ideal"));
        }
        // a <= b implies a + c <= b + c
        let le = |x: &LayeredScalar, y: &LayeredScalar| in_t(&y.sub(x).expect("field"));
        if le(a, b) {
            let ok = le(&a.add(c).expect("field"), &b.add(c).expect("field"));
            check(&mut rep, ok, format!("sample {i}: translation invariance"));
        }
    }
    rep
}
