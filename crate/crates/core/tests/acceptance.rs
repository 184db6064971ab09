//! Acceptance suite: every criterion at its fixed tolerance and time limit.
//! Prints one PASS/FAIL line per criterion, then fails if any criterion did.

use std::time::Duration;

use tsp_core::claims::{run_claim, ClaimConfig, ClaimVerdict, CLAIMS};
use tsp_core::constructions::rho_eta_pipeline;
use tsp_core::hypermat::flip_operator;
use tsp_core::{EpsMatrix, EpsRational};

/// (claim id, time limit in seconds)
const LIMITS: [(&str, u64); 13] = [
    ("rho-closed-form", 5),
    ("rho-checks", 5),
    ("statement-2", 2),
    ("p-properties", 2),
    ("reduction-identity", 180),
    ("obvious-reduction-fails", 60),
    ("gamma-map", 60),
    ("star-convexity", 120),
    ("statement-1", 300),
    ("real-eta", 5),
    ("field-order", 30),
    ("psd-oracle", 120),
    ("layers", 300),
];

const MIN_HEAVY_RESTARTS: usize = 1000;
const REDUCTION_N_MAX: u32 = 3;

/// Closed form written out from scratch, independent of the library's
/// alpha/beta helpers.
fn independent_closed_form() -> EpsMatrix {
    let alpha = EpsRational::parse("(1/8)*(1 + e/(6*(1-e)))").unwrap();
    let beta = EpsRational::parse("(1/8)*(1/3 + e/(2*(1-e)))").unwrap();
    EpsMatrix::identity(9)
        .scale_eps(&alpha)
        .sub(&flip_operator(3).scale_eps(&beta))
        .unwrap()
}

#[test]
fn acceptance() {
    let cfg = ClaimConfig {
        heavy_restarts: MIN_HEAVY_RESTARTS,
        n_max: REDUCTION_N_MAX,
        ..ClaimConfig::default()
    };
    assert_eq!(CLAIMS.len(), LIMITS.len());
    let mut failed = Vec::new();
    for (k, (id, secs)) in LIMITS.iter().enumerate() {
        assert_eq!(CLAIMS[k].0, *id);
        let r = run_claim(id, &cfg).unwrap();
        let mut ok = r.verdict == ClaimVerdict::Pass;
        let mut why = String::new();
        if Duration::from_millis(r.runtime_ms) > Duration::from_secs(*secs) {
            ok = false;
            why = format!(" (took {} ms, limit {} s)", r.runtime_ms, secs);
        }
        if *id == "rho-closed-form" {
            // cross-check the library's comparison against the hand-written form
            let rho = rho_eta_pipeline().unwrap().rho;
            let independent = rho == independent_closed_form();
            if independent != ok {
                why.push_str(" (independent closed-form check disagrees)");
                ok = false;
            }
        }
        println!(
            "{} {:>2} {:<24} {:>7} ms{}",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            id,
            r.runtime_ms,
            why
        );
        if !ok {
            println!("     witness: {}", serde_json::to_string(&r.witness).unwrap());
            failed.push(*id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
