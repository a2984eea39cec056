//! Report assembly, re-verification and text rendering.
//!
//! Reports are `serde_json::Value`s; object keys are sorted, rationals are
//! printed as `"p/q"`, so equal inputs give byte-identical output.

use serde_json::{json, Map, Value};

use crate::catalog::{AnyLattice, CatalogEntry, Expectation};
use crate::coeff::Coeff;
use crate::deformation::{derivative_check, HarmonicDeformation};
use crate::error::{Error, Result};
use crate::extremality::{
    brute_force_oracle, build_immersion_system, build_kahler_system, multiplicity_shortcut, solve_feasibility,
    unscale_immersion_weights, verify_certificate, verify_immersion_weights, FeasibilitySystem,
};
use crate::forms::EigenfunctionBasis;
use crate::fourier::TorusShape;
use crate::identities::check_identities;
use crate::io::{lattice_to_json, parse_lattice_value};
use crate::lattice::{dual_basis, DualLattice, LatticeBasis};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::spectrum::{enumerate_levels, level_for_index, EigenLevel};

/// Seed for the random eigenspace elements of the identity suite.
pub const IDENTITY_SEED: u64 = 0x7e57;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    /// Multiplicity-counted eigenvalue index used for identities and derivatives.
    pub k: usize,
    /// Minimum number of distinct levels to list.
    pub levels: usize,
    pub kahler: bool,
    pub immersion: bool,
    pub identities: bool,
    /// Random eigenspace elements checked against `L(f) = L_rhs(f)`.
    pub combinations: usize,
    /// Constant deformation `{"hermitian": [[[re, im], ...], ...]}`.
    pub alpha: Option<Value>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            k: 1,
            levels: 1,
            kahler: true,
            immersion: true,
            identities: true,
            combinations: 20,
            alpha: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    /// Some verdict fell inside the float ambiguity band.
    pub ambiguous: bool,
    /// Some freshly produced certificate failed its own check.
    pub verification_failed: bool,
}

fn list<R: Real>(v: &[R]) -> Value {
    Value::Array(v.iter().map(Real::to_json).collect())
}

fn coeff_json<C: Coeff>(c: &C, exact: bool) -> Value {
    if exact {
        Value::String(c.to_string())
    } else {
        json!(c.to_complex().re)
    }
}

/// Enumerates at least `min_levels` levels and enough to cover index `k`.
fn levels_covering<R: Real>(dual: &DualLattice<R>, k: usize, min_levels: usize) -> Result<Vec<EigenLevel<R>>> {
    let mut count = min_levels.max(1);
    loop {
        let levels = enumerate_levels(dual, count)?;
        if levels.iter().map(EigenLevel::multiplicity).sum::<usize>() >= k {
            return Ok(levels);
        }
        count += 1;
    }
}

fn oracle_json<R: Real>(system: &FeasibilitySystem<R>, verdict: Option<bool>) -> Value {
    match brute_force_oracle(system) {
        Ok(feasible) => json!({
            "feasible": feasible,
            "agrees": verdict.map(|v| v == feasible),
        }),
        Err(Error::TooLarge { cols, rows }) => json!({ "skipped": format!("too large ({cols} columns, {rows} rows)") }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

struct Section {
    json: Value,
    feasible: Option<bool>,
    ambiguous: bool,
    verification_failed: bool,
}

fn solve_section<R: Real>(system: &FeasibilitySystem<R>) -> Result<(Section, Option<Vec<R>>)> {
    match solve_feasibility(system) {
        Ok(outcome) => {
            let mut obj = outcome.to_json(system);
            obj["pivots"] = json!(outcome.stats.pivots);
            obj["oracle"] = oracle_json(system, Some(outcome.is_feasible()));
            let failed = match (outcome.weights(), outcome.farkas()) {
                (Some(w), _) => !system.check_weights(w),
                (_, Some(y)) => !system.check_farkas(y),
                _ => true,
            };
            if outcome.is_feasible() {
                let unique = system.a.rank(system.tol) == system.cols();
                obj["unique"] = json!(unique);
            }
            Ok((
                Section {
                    json: obj,
                    feasible: Some(outcome.is_feasible()),
                    ambiguous: false,
                    verification_failed: failed,
                },
                outcome.weights().map(<[R]>::to_vec),
            ))
        }
        Err(Error::NumericallyAmbiguous { phase_one_value }) => Ok((
            Section {
                json: json!({
                    "status": "ambiguous",
                    "phase_one_value": phase_one_value,
                    "system": system.summary_json(),
                    "oracle": oracle_json(system, None),
                }),
                feasible: None,
                ambiguous: true,
                verification_failed: false,
            },
            None,
        )),
        Err(e) => Err(e),
    }
}

fn kahler_section<R: Real>(level: &EigenLevel<R>, shape: &std::sync::Arc<TorusShape<R>>) -> Result<Section> {
    let Ok(n) = shape.complex_dim() else {
        return Ok(Section {
            json: json!({ "status": "skipped", "reason": "no Kähler check (odd dimension)" }),
            feasible: None,
            ambiguous: false,
            verification_failed: false,
        });
    };
    let system = build_kahler_system(level, n, shape.tol)?;
    let (mut section, weights) = solve_section(&system)?;
    let shortcut = multiplicity_shortcut(level, n).is_some();
    section.json["shortcut"] = json!(shortcut.then_some("not_extremal"));
    if let Some(w) = weights {
        let basis = EigenfunctionBasis::new(level, shape)?;
        section.json["verification"] = match verify_certificate(level, &w, &basis) {
            Ok(r) => json!({
                "ok": true,
                "a": coeff_json(&r.omega_multiple, R::EXACT),
                "residual_zero": r.residual_zero,
                "l_sum_zero": r.l_sum_zero,
            }),
            Err(e) => {
                section.verification_failed = true;
                json!({ "ok": false, "error": e.to_string() })
            }
        };
    }
    Ok(section)
}

fn immersion_section<R: Real>(level: &EigenLevel<R>, tol: f64) -> Result<Section> {
    let system = build_immersion_system(level, level.real_dim(), tol)?;
    let (mut section, weights) = solve_section(&system)?;
    if let Some(w) = weights {
        let c = unscale_immersion_weights(&w);
        let ok = verify_immersion_weights(level, &c, tol);
        section.verification_failed |= !ok;
        section.json["weights_unscaled"] = Value::Array(c.iter().map(|v| coeff_json(v, R::EXACT)).collect());
        section.json["verification"] = json!({ "ok": ok });
    }
    Ok(section)
}

/// Parses `{"hermitian": [[[re, im], ...], ...]}` into a constant deformation.
pub fn parse_alpha<R: Real>(value: &Value, shape: &std::sync::Arc<TorusShape<R>>) -> Result<HarmonicDeformation<R>> {
    let rows = value
        .get("hermitian")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("hermitian", "expected an n x n array of [re, im] pairs"))?;
    let n = rows.len();
    let mut re = Matrix::zeros(n, n);
    let mut im = Matrix::zeros(n, n);
    for (a, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| Error::parse(format!("hermitian[{a}]"), format!("expected {n} entries")))?;
        for (b, entry) in row.iter().enumerate() {
            let field = format!("hermitian[{a}][{b}]");
            let (x, y) = match entry.as_array().map(Vec::as_slice) {
                Some([x, y]) => (x, y),
                _ => return Err(Error::parse(field, "expected [re, im]")),
            };
            let parse = |v: &Value| R::from_json(v).ok_or_else(|| Error::parse(field.clone(), format!("bad number {v}")));
            re[(a, b)] = parse(x)?;
            im[(a, b)] = parse(y)?;
        }
    }
    HarmonicDeformation::constant(shape, re, im)
}

fn claimed_dual_note<R: Real>(b: &LatticeBasis<R>, claimed: &[Vec<f64>]) -> (Value, String) {
    let gens = b.to_float(b.tol()).generators();
    let mut worst = 0.0f64;
    for w in claimed {
        for g in &gens {
            let p: f64 = w.iter().zip(g).map(|(x, y)| x * y).sum();
            worst = worst.max((p - p.round()).abs());
        }
    }
    let integral = worst <= 1e-9;
    let note = if integral {
        "claimed dual basis pairs integrally with the primal basis".to_string()
    } else {
        format!("claimed dual basis does not pair integrally with the primal basis (max distance from Z: {worst:.6})")
    };
    (json!({ "integral": integral, "max_distance": worst }), note)
}

fn verdict_word(f: Option<bool>) -> &'static str {
    match f {
        Some(true) => "feasible",
        Some(false) => "infeasible",
        None => "undecided",
    }
}

fn build<R: Real>(b: &LatticeBasis<R>, expectation: Option<&Expectation>, opts: &ReportOptions) -> Result<(Map<String, Value>, bool, bool)> {
    let dual = dual_basis(b)?;
    let shape = TorusShape::of(b);
    let levels = levels_covering(&dual, opts.k, opts.levels)?;
    let idx = level_for_index(&levels, opts.k)?;
    let mut out = Map::new();
    let mut ambiguous = false;
    let mut failed = false;
    out.insert("mode".into(), json!(if R::EXACT { "exact" } else { "float" }));
    out.insert("tol".into(), json!(b.tol()));
    out.insert("volume".into(), b.volume().to_json());
    out.insert(
        "dual".into(),
        Value::Array(dual.generators().iter().map(|g| list(g)).collect()),
    );
    out.insert(
        "level_index".into(),
        json!({
            "k": opts.k,
            "level": idx.level + 1,
            "first_k": idx.first_k,
            "last_k": idx.last_k,
            "strictly_above_prev": idx.strictly_above_prev,
            "strictly_below_next": idx.strictly_below_next,
        }),
    );

    let mut first_verdicts = (None, None);
    let mut level_json = Vec::new();
    for (i, level) in levels.iter().enumerate() {
        let mut lj = json!({
            "index": i + 1,
            "squared_norm": level.squared_norm.to_json(),
            "lambda": level.lambda(),
            "lambda_exact": if R::EXACT { Value::String(level.lambda_coeff().to_string()) } else { Value::Null },
            "l": level.l(),
            "multiplicity": level.multiplicity(),
            "reps": Value::Array(level.reps.iter().map(|r| list(r)).collect()),
            "coords": level.coords,
        });
        if opts.kahler {
            let s = kahler_section(level, &shape)?;
            ambiguous |= s.ambiguous;
            failed |= s.verification_failed;
            if i == 0 {
                first_verdicts.0 = s.feasible;
            }
            lj["kahler"] = s.json;
        }
        if opts.immersion {
            let s = immersion_section(level, b.tol())?;
            ambiguous |= s.ambiguous;
            failed |= s.verification_failed;
            if i == 0 {
                first_verdicts.1 = s.feasible;
            }
            lj["immersion"] = s.json;
        }
        level_json.push(lj);
    }
    out.insert("levels".into(), Value::Array(level_json));

    if opts.identities {
        let v = if shape.complex_dim().is_ok() {
            check_identities(&levels[idx.level], &shape, opts.combinations, IDENTITY_SEED)?.to_json()
        } else {
            json!({ "skipped": "odd dimension" })
        };
        out.insert("identities".into(), v);
    }

    if let Some(alpha) = &opts.alpha {
        let d = parse_alpha(alpha, &shape)?;
        if !d.trace_zero {
            return Err(Error::TraceNotZero);
        }
        out.insert("derivative".into(), derivative_check(b, &d, opts.k)?.to_json(d.to_json()));
    }

    if let Some(e) = expectation {
        let mut notes = Vec::new();
        let (kc, ic) = first_verdicts;
        if opts.kahler {
            if let (Some(exp), Some(got)) = (e.kahler_feasible, kc) {
                if exp != got {
                    notes.push(format!(
                        "Kähler system at λ_1: computed {}, expected {}",
                        verdict_word(Some(got)),
                        verdict_word(Some(exp))
                    ));
                }
            }
        }
        if opts.immersion {
            if let (Some(exp), Some(got)) = (e.immersion_feasible, ic) {
                if exp != got {
                    notes.push(format!(
                        "immersion system at λ_1: computed {}, expected {}",
                        verdict_word(Some(got)),
                        verdict_word(Some(exp))
                    ));
                }
            }
        }
        if !e.claims.is_empty() && opts.kahler {
            let k0 = &out["levels"][0]["kahler"];
            if k0["unique"] == json!(true) {
                let w: Vec<String> = k0["weights"]
                    .as_array()
                    .map(|a| a.iter().map(|v| v.as_str().map_or_else(|| v.to_string(), String::from)).collect())
                    .unwrap_or_default();
                notes.push(format!(
                    "computed: the Kähler system at λ_1 has the unique solution R = ({})",
                    w.join(", ")
                ));
            }
        }
        if let Some(claimed) = &e.claimed_dual {
            let (v, note) = claimed_dual_note(b, claimed);
            out.insert("claimed_dual_check".into(), v);
            notes.push(note);
        }
        out.insert(
            "expected".into(),
            json!({
                "kahler_feasible": e.kahler_feasible,
                "immersion_feasible": e.immersion_feasible,
                "claims": e.claims,
            }),
        );
        out.insert(
            "computed".into(),
            json!({
                "kahler_feasible": kc,
                "immersion_feasible": ic,
            }),
        );
        out.insert("discrepancies".into(), json!(notes));
    }
    Ok((out, ambiguous, failed))
}

/// Builds the report for a lattice; `source` names where it came from.
pub fn build_report(
    source: &str,
    lattice: &AnyLattice,
    expectation: Option<&Expectation>,
    opts: &ReportOptions,
) -> Result<Report> {
    let (mut obj, ambiguous, failed) = match lattice {
        AnyLattice::Exact(b) => build(b, expectation, opts)?,
        AnyLattice::Float(b) => build(b, expectation, opts)?,
    };
    obj.insert("source".into(), json!(source));
    obj.insert("lattice".into(), lattice_to_json(lattice));
    Ok(Report {
        json: Value::Object(obj),
        ambiguous,
        verification_failed: failed,
    })
}

pub fn report_for_entry(entry: &CatalogEntry, opts: &ReportOptions) -> Result<Report> {
    build_report(&entry.to_string(), &entry.lattice, Some(&entry.expectation), opts)
}

fn reject(msg: impl Into<String>) -> Error {
    Error::CertificateRejected(msg.into())
}

fn parse_list<R: Real>(v: &Value, what: &str) -> Result<Vec<R>> {
    v.as_array()
        .ok_or_else(|| reject(format!("{what}: missing list")))?
        .iter()
        .map(|x| R::from_json(x).ok_or_else(|| reject(format!("{what}: bad entry {x}"))))
        .collect()
}

fn reverify_system<R: Real>(system: &FeasibilitySystem<R>, section: &Value, what: &str) -> Result<Option<Vec<R>>> {
    match section["status"].as_str() {
        Some("feasible") => {
            let w = parse_list::<R>(&section["weights"], what)?;
            if !system.check_weights(&w) {
                return Err(reject(format!("{what}: weights do not solve the system")));
            }
            Ok(Some(w))
        }
        Some("infeasible") => {
            let y = parse_list::<R>(&section["farkas"], what)?;
            if !system.check_farkas(&y) {
                return Err(reject(format!("{what}: Farkas vector is not a certificate")));
            }
            Ok(None)
        }
        Some("ambiguous") => Ok(None),
        other => Err(reject(format!("{what}: unexpected status {other:?}"))),
    }
}

fn reverify_generic<R: Real>(b: &LatticeBasis<R>, report: &Value) -> Result<usize> {
    let levels_json = report["levels"].as_array().ok_or_else(|| reject("missing levels"))?;
    let dual = dual_basis(b)?;
    let levels = enumerate_levels(&dual, levels_json.len())?;
    if levels.len() != levels_json.len() {
        return Err(reject("level count differs"));
    }
    let shape = TorusShape::of(b);
    let mut checked = 0;
    for (i, (level, lj)) in levels.iter().zip(levels_json).enumerate() {
        let what = format!("level {}", i + 1);
        let norm = R::from_json(&lj["squared_norm"]).ok_or_else(|| reject(format!("{what}: bad squared_norm")))?;
        if !norm.approx_eq(&level.squared_norm, b.tol()) || lj["l"] != json!(level.l()) {
            return Err(reject(format!("{what}: level data differs from recomputation")));
        }
        let k = &lj["kahler"];
        if !k.is_null() {
            if k["status"] == "skipped" {
                if shape.complex_dim().is_ok() {
                    return Err(reject(format!("{what}: Kähler check skipped in even dimension")));
                }
            } else {
                let n = shape.complex_dim()?;
                let system = build_kahler_system(level, n, b.tol())?;
                if let Some(w) = reverify_system(&system, k, &format!("{what} kahler"))? {
                    let basis = EigenfunctionBasis::new(level, &shape)?;
                    verify_certificate(level, &w, &basis)?;
                }
                checked += 1;
            }
        }
        let m = &lj["immersion"];
        if !m.is_null() {
            let system = build_immersion_system(level, level.real_dim(), b.tol())?;
            if let Some(w) = reverify_system(&system, m, &format!("{what} immersion"))? {
                if !verify_immersion_weights(level, &unscale_immersion_weights(&w), b.tol()) {
                    return Err(reject(format!("{what} immersion: 4π² Σ c u uᵀ ≠ I")));
                }
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Re-parses the embedded lattice and re-checks every embedded certificate.
/// Returns the number of certificates checked.
pub fn reverify(report: &Value, tol: f64) -> Result<usize> {
    let lattice = parse_lattice_value(&report["lattice"], tol)?;
    match &lattice {
        AnyLattice::Exact(b) => reverify_generic(b, report),
        AnyLattice::Float(b) => reverify_generic(b, report),
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => format!("({})", a.iter().map(compact).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

fn render_section(out: &mut String, name: &str, s: &Value) {
    if s.is_null() {
        return;
    }
    let status = s["status"].as_str().unwrap_or("?");
    out.push_str(&format!("  {name}: {status}"));
    match status {
        "feasible" => out.push_str(&format!(" weights {}", compact(&s["weights"]))),
        "infeasible" => out.push_str(&format!(" farkas {}", compact(&s["farkas"]))),
        "ambiguous" => out.push_str(&format!(" phase-1 value {}", s["phase_one_value"])),
        "skipped" => out.push_str(&format!(" ({})", s["reason"].as_str().unwrap_or(""))),
        _ => {}
    }
    if let Some(f) = s["oracle"]["feasible"].as_bool() {
        out.push_str(&format!("; oracle {}", if f { "feasible" } else { "infeasible" }));
    }
    if s["shortcut"].is_string() {
        out.push_str("; multiplicity shortcut: not extremal");
    }
    if let Some(ok) = s["verification"]["ok"].as_bool() {
        out.push_str(if ok { "; certificate verified" } else { "; certificate REJECTED" });
    }
    out.push('\n');
}

/// Human-readable summary of a report.
pub fn render_text(report: &Value) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "lattice {} [{} mode], volume {}\n",
        report["source"].as_str().unwrap_or("?"),
        report["mode"].as_str().unwrap_or("?"),
        compact(&report["volume"])
    ));
    if let Some(levels) = report["levels"].as_array() {
        for l in levels {
            out.push_str(&format!(
                "level {}: |w|² = {}, λ = {:.6}, l = {}\n",
                l["index"],
                compact(&l["squared_norm"]),
                l["lambda"].as_f64().unwrap_or(f64::NAN),
                l["l"]
            ));
            render_section(&mut out, "kähler", &l["kahler"]);
            render_section(&mut out, "immersion", &l["immersion"]);
        }
    }
    let id = &report["identities"];
    if let Some(pass) = id["pass"].as_bool() {
        out.push_str(&format!(
            "identities: {} ({} reps, {}/{} random combinations)\n",
            if pass { "pass" } else { "FAIL" },
            id["reps"],
            id["combinations_ok"],
            id["combinations"]
        ));
    }
    let d = &report["derivative"];
    if !d.is_null() {
        out.push_str(&format!(
            "derivative at k = {}: left {:.8}, right {:.8}, Q-Gram [{:.8}, {:.8}] {}\n",
            d["k"],
            d["d_left"].as_f64().unwrap_or(f64::NAN),
            d["d_right"].as_f64().unwrap_or(f64::NAN),
            d["qgram_min"].as_f64().unwrap_or(f64::NAN),
            d["qgram_max"].as_f64().unwrap_or(f64::NAN),
            if d["pass"] == true { "pass" } else { "FAIL" }
        ));
    }
    if let Some(claims) = report["expected"]["claims"].as_array() {
        for c in claims {
            out.push_str(&format!("claim: {}\n", c.as_str().unwrap_or("")));
        }
    }
    if let Some(notes) = report["discrepancies"].as_array() {
        for n in notes {
            out.push_str(&format!("note: {}\n", n.as_str().unwrap_or("")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_entry;

    fn report(spec: &str) -> Report {
        let entry = parse_entry(spec, 1e-9).unwrap();
        report_for_entry(&entry, &ReportOptions::default()).unwrap()
    }

    #[test]
    fn standard_one_is_feasible_both_ways() {
        let r = report("standard(1)");
        let l1 = &r.json["levels"][0];
        assert_eq!(l1["kahler"]["status"], "feasible");
        assert_eq!(l1["immersion"]["status"], "feasible");
        assert_eq!(l1["immersion"]["weights_unscaled"][0], "1/4·π^-2");
        assert!(!r.ambiguous && !r.verification_failed);
        assert_eq!(r.json["discrepancies"], json!([]));
        assert_eq!(reverify(&r.json, 1e-9).unwrap(), 2);
    }

    #[test]
    fn gamma_ab_notes_the_forced_solution() {
        let r = report("gamma_ab(2,3)");
        let l1 = &r.json["levels"][0];
        assert_eq!(l1["kahler"]["status"], "feasible");
        assert_eq!(l1["kahler"]["unique"], true);
        assert_eq!(l1["immersion"]["status"], "infeasible");
        let notes = r.json["discrepancies"].as_array().unwrap();
        assert!(notes.iter().any(|n| n.as_str().unwrap().contains("R = (1, 1)")), "{notes:?}");
        reverify(&r.json, 1e-9).unwrap();
    }

    #[test]
    fn reports_are_deterministic() {
        let a = serde_json::to_string(&report("checkerboard(4)").json).unwrap();
        let b = serde_json::to_string(&report("checkerboard(4)").json).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tampered_certificates_are_rejected() {
        let mut r = report("standard(2)").json;
        r["levels"][0]["kahler"]["weights"][0] = json!("2");
        assert!(matches!(reverify(&r, 1e-9), Err(Error::CertificateRejected(_))));
    }

    #[test]
    fn odd_checkerboard_skips_kahler() {
        let r = report("checkerboard(5)");
        assert_eq!(r.json["levels"][0]["kahler"]["status"], "skipped");
        assert_eq!(r.json["levels"][0]["immersion"]["status"], "feasible");
        reverify(&r.json, 1e-9).unwrap();
    }

    #[test]
    fn text_rendering_mentions_verdicts() {
        let text = render_text(&report("gamma_ab(2,3)").json);
        assert!(text.contains("kähler: feasible"));
        assert!(text.contains("immersion: infeasible"));
    }
}
