//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain strings and numbers and returns a JSON string.
//! Failures come back as `{"error": "..."}` rather than exceptions.

use serde_json::{json, Value};
use torus_extremal::catalog::parse_entry;
use torus_extremal::deformation::{deformed_spectrum, derivative_check};
use torus_extremal::report::{parse_alpha, report_for_entry, ReportOptions};
use torus_extremal::{Error, TorusShape, DEFAULT_TOL};
use wasm_bindgen::prelude::wasm_bindgen;

fn wrap(r: Result<Value, Error>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// Levels, both feasibility systems and discrepancy notes for a catalog entry.
pub fn family_report_value(spec: &str) -> Result<Value, Error> {
    let entry = parse_entry(spec, DEFAULT_TOL)?;
    let opts = ReportOptions {
        levels: 2,
        combinations: 2,
        ..ReportOptions::default()
    };
    Ok(report_for_entry(&entry, &opts)?.json)
}

/// The first-level Kähler certificate with its verification.
pub fn kahler_certificate_value(spec: &str) -> Result<Value, Error> {
    let entry = parse_entry(spec, DEFAULT_TOL)?;
    let opts = ReportOptions {
        immersion: false,
        identities: false,
        ..ReportOptions::default()
    };
    let r = report_for_entry(&entry, &opts)?.json;
    Ok(json!({
        "source": r["source"],
        "level": r["levels"][0],
    }))
}

/// `λ_k(g_t)` for `t` on a uniform grid, plus the derivative check at `t = 0`.
pub fn deformation_curve_value(spec: &str, alpha: &str, k: usize, t_max: f64, steps: usize) -> Result<Value, Error> {
    let entry = parse_entry(spec, DEFAULT_TOL)?;
    let b = entry.lattice.to_float(DEFAULT_TOL);
    let alpha: Value =
        serde_json::from_str(alpha).map_err(|e| Error::parse(format!("alpha line {}", e.line()), e.to_string()))?;
    let d = parse_alpha(&alpha, &TorusShape::of(&b))?;
    if !d.trace_zero {
        return Err(Error::TraceNotZero);
    }
    let steps = steps.clamp(2, 2000);
    let points: Vec<Value> = (0..=steps)
        .map(|i| {
            let t = -t_max + 2.0 * t_max * i as f64 / steps as f64;
            // outside the positive cone the curve simply stops
            json!({ "t": t, "lambda": deformed_spectrum(&b, &d, t, k).ok() })
        })
        .collect::<Vec<_>>();
    let check = derivative_check(&b, &d, k)?;
    Ok(json!({
        "source": entry.to_string(),
        "k": k,
        "points": points,
        "derivative": check.to_json(d.to_json()),
    }))
}

#[wasm_bindgen]
pub fn family_report(spec: &str) -> String {
    wrap(family_report_value(spec))
}

#[wasm_bindgen]
pub fn kahler_certificate(spec: &str) -> String {
    wrap(kahler_certificate_value(spec))
}

#[wasm_bindgen]
pub fn deformation_curve(spec: &str, alpha: &str, k: usize, t_max: f64, steps: usize) -> String {
    wrap(deformation_curve_value(spec, alpha, k, t_max, steps))
}
