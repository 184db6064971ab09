//! Three operations for the static page in `www/`. Every export takes and
//! returns strings so the same functions run natively in tests; failures come
//! back as `{"error": …}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use tsp_core::constructions::rho_pipeline_at;
use tsp_core::{EpsComplex, EpsMatrix, EpsRational, Rational};

fn error(msg: impl ToString) -> String {
    json!({"error": msg.to_string()}).to_string()
}

fn describe(x: &EpsRational, at: Option<&Rational>) -> Value {
    json!({
        "canonical": x.to_string(),
        "sign": format!("{:?}", x.sign()),
        "infinitesimal": x.is_infinitesimal(),
        "finite": x.is_finite(),
        "shadow": x.shadow().ok().map(|s| s.to_string()),
        "value": at.and_then(|t| x.eval_at(t).ok()).map(|v| v.to_string()),
    })
}

/// Parses an expression in `e` and reports its canonical form, sign, shadow
/// and, when `at` is a rational, its value at `e = at`.
#[wasm_bindgen]
pub fn inspect_element(expr: &str, at: &str) -> String {
    let x = match EpsRational::parse(expr) {
        Ok(x) => x,
        Err(e) => return error(e),
    };
    let t = if at.trim().is_empty() {
        None
    } else {
        match EpsRational::parse(at).ok().and_then(|v| v.as_rational()) {
            Some(t) => Some(t),
            None => return error(format!("{at:?} is not a rational number")),
        }
    };
    describe(&x, t.as_ref()).to_string()
}

/// Exact psd check of a Hermitian matrix given as rows of entries. An
/// entry is text in `e` or a pair `[re, im]`, e.g. `[["1", "e"], ["e", ["0", "1"]]]`.
#[wasm_bindgen]
pub fn check_psd(rows_json: &str) -> String {
    let rows: Vec<Vec<Value>> = match serde_json::from_str(rows_json) {
        Ok(r) => r,
        Err(e) => return error(format!("line {} column {}: {e}", e.line(), e.column())),
    };
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return error("expected a non-empty square matrix");
    }
    let mut entries = Vec::with_capacity(n * n);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            match entry(v) {
                Ok(z) => entries.push(z),
                Err(e) => return error(format!("entry ({}, {}): {e}", i + 1, j + 1)),
            }
        }
    }
    let m = match EpsMatrix::from_entries(n, n, entries) {
        Ok(m) => m,
        Err(e) => return error(e),
    };
    match m.psd_check() {
        Ok(v) => json!({
            "status": v.status,
            "witness": v.witness.map(|w| w.iter().map(|z| z.to_string()).collect::<Vec<_>>()),
            "value": v.value.map(|x| x.to_string()),
        })
        .to_string(),
        Err(e) => error(e),
    }
}

fn scalar(v: &Value) -> Result<EpsRational, String> {
    match v {
        Value::String(s) => EpsRational::parse(s).map_err(|e| e.to_string()),
        Value::Number(n) => n
            .as_i64()
            .map(EpsRational::from_int)
            .ok_or_else(|| format!("{n} is not an integer; quote fractions")),
        other => Err(format!("unexpected {other}")),
    }
}

fn entry(v: &Value) -> Result<EpsComplex, String> {
    match v {
        Value::Array(p) if p.len() == 2 => Ok(EpsComplex::new(scalar(&p[0])?, scalar(&p[1])?)),
        other => scalar(other).map(EpsComplex::real),
    }
}

/// Runs the filter-twirl-normalise pipeline at `eta` and reports the
/// resulting α, β and the positivity checks.
#[wasm_bindgen]
pub fn rho_pipeline(eta: &str) -> String {
    let eta = match EpsRational::parse(eta) {
        Ok(x) => x,
        Err(e) => return error(e),
    };
    match rho_pipeline_at(&eta) {
        Ok(r) => json!({
            "alpha": r.alpha.to_string(),
            "beta": r.beta.to_string(),
            "closed_form_alpha": r.closed_form_alpha.to_string(),
            "closed_form_beta": r.closed_form_beta.to_string(),
            "matches_closed_form": r.matches_closed_form,
            "equivalent_eta": r.equivalent_eta.map(|e| e.to_string()),
            "trace_one": r.trace_one,
            "psd": r.psd.is_psd(),
            "npt": !r.npt.is_psd(),
            "shadow_ppt": r.shadow_ppt.is_psd(),
        })
        .to_string(),
        Err(e) => error(e),
    }
}
