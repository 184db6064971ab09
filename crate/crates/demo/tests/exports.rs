use serde_json::Value;
use tsp_demo::{check_psd, inspect_element, rho_pipeline};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn inspect() {
    let v = parse(inspect_element("(1/8)*(1 + e/(6*(1-e)))", "1/10"));
    assert_eq!(v["canonical"], "(6-5e)/(48-48e)");
    assert_eq!(v["shadow"], "1/8");
    assert_eq!(v["value"], "55/432");
    assert_eq!(v["sign"], "Positive");
    let v = parse(inspect_element("e^2 - e", ""));
    assert_eq!(v["sign"], "Negative");
    assert_eq!(v["infinitesimal"], true);
    assert!(v["value"].is_null());
    assert!(parse(inspect_element("1 +", "")).get("error").is_some());
    assert!(parse(inspect_element("e", "e")).get("error").is_some());
}

#[test]
fn psd() {
    let v = parse(check_psd(r#"[["1", "1"], ["1", "1 - e"]]"#));
    assert_eq!(v["status"], "NotPSD");
    assert!(v["value"].as_str().unwrap().starts_with('-'));
    let v = parse(check_psd(r#"[["1", ["0", "1"]], [["0", "-1"], 1]]"#));
    assert_eq!(v["status"], "PSD");
    assert!(parse(check_psd(r#"[["1", "2"]]"#)).get("error").is_some());
    assert!(parse(check_psd(r#"[["1", "2"], ["0", "1"]]"#)).get("error").is_some());
    let err = parse(check_psd("[[\"1\",\n 2"));
    assert!(err["error"].as_str().unwrap().contains("line 2"));
}

#[test]
fn rho() {
    let v = parse(rho_pipeline("e"));
    assert_eq!(v["closed_form_alpha"], "(6-5e)/(48-48e)");
    assert_eq!(v["trace_one"], true);
    assert_eq!(v["psd"], true);
    assert_eq!(v["npt"], true);
    let v = parse(rho_pipeline("0"));
    assert_eq!(v["npt"], false);
}
