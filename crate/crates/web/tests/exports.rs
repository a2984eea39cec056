use serde_json::Value;
use torus_extremal_web::{deformation_curve, family_report, kahler_certificate};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn family_report_for_gamma_ab() {
    let v = parse(family_report("gamma_ab(2,3)"));
    assert_eq!(v["levels"][0]["kahler"]["status"], "feasible");
    assert_eq!(v["levels"][0]["immersion"]["status"], "infeasible");
    assert_eq!(v["levels"].as_array().unwrap().len(), 2);
}

#[test]
fn family_report_for_gamma_t() {
    let v = parse(family_report("gamma_t(0.1)"));
    assert_eq!(v["mode"], "float");
    assert_eq!(v["claimed_dual_check"]["integral"], false);
}

#[test]
fn certificate_is_verified() {
    let v = parse(kahler_certificate("checkerboard(4)"));
    assert_eq!(v["level"]["l"], 12);
    assert_eq!(v["level"]["kahler"]["verification"]["ok"], true);
}

#[test]
fn curve_is_symmetric_for_diagonal_alpha() {
    let alpha = r#"{"hermitian": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}"#;
    let v = parse(deformation_curve("standard(2)", alpha, 1, 0.5, 10));
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 11);
    let lam = |i: usize| pts[i]["lambda"].as_f64().unwrap();
    assert!((lam(0) - lam(10)).abs() < 1e-9);
    assert!(lam(5) > lam(4));
    assert_eq!(v["derivative"]["pass"], true);
}

#[test]
fn errors_come_back_as_json() {
    let v = parse(family_report("gamma_t(1)"));
    assert!(v["error"].as_str().unwrap().contains("π/12"));
    let v = parse(deformation_curve("standard(2)", "{", 1, 0.1, 4));
    assert!(v["error"].is_string());
}
