use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use torus_extremal::catalog::{catalog_lookup, parse_entry, CatalogEntry, CATALOG_NAMES};
use torus_extremal::io::read_lattice_file;
use torus_extremal::report::{build_report, render_text, reverify, Report, ReportOptions};
use torus_extremal::scalar::tolerance_from_env;
use torus_extremal::Error;

/// Spectral extremality checks for flat complex tori.
#[derive(Parser, Debug)]
#[command(name = "torus-extremal", version)]
struct Cli {
    #[command(flatten)]
    input: Input,

    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Input {
    /// Lattice file (JSON).
    #[arg(long, global = true, conflicts_with = "catalog")]
    lattice: Option<PathBuf>,

    /// Catalog entry, e.g. `checkerboard(4)` or `gamma_ab` with `--param`.
    #[arg(long, global = true)]
    catalog: Option<String>,

    /// Catalog parameter `key=value`; repeatable.
    #[arg(long = "param", global = true, value_parser = parse_key_value)]
    params: Vec<(String, String)>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the dual lattice basis.
    Dual,
    /// List the first eigenvalue levels.
    Spectrum {
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Solve the Kähler extremality system at the level of λ_k.
    CheckKahler {
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Solve the minimal-immersion system at the level of λ_k.
    CheckImmersion {
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Check the eigenfunction identities at the level of λ_k.
    VerifyIdentities {
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Random eigenspace elements checked against the L identity.
        #[arg(long, default_value_t = 20)]
        combinations: usize,
    },
    /// Compare one-sided derivatives of λ_k(g_t) with the Q_α spectrum.
    DerivativeCheck {
        /// JSON file `{"hermitian": [[[re, im], ...], ...]}`.
        #[arg(long)]
        alpha: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Show a catalog entry, or list the catalog without NAME.
    Catalog {
        name: Option<String>,
        /// Parameters `key=value`.
        #[arg(long, num_args = 1.., value_parser = parse_key_value)]
        params: Vec<(String, String)>,
    },
    /// Full report: levels, both systems with certificates, identities.
    Report {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        /// Optional constant deformation for a derivative check.
        #[arg(long)]
        alpha: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        combinations: usize,
    },
    /// Re-check every certificate embedded in a saved JSON report.
    Reverify { file: PathBuf },
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got `{s}`"))
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NumericallyAmbiguous { .. } => 3,
            Error::CertificateRejected(_) => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

enum Source {
    Entry(CatalogEntry),
    File(PathBuf, torus_extremal::catalog::AnyLattice),
}

fn lookup(spec: &str, params: &[(String, String)], tol: f64) -> Result<CatalogEntry, Failure> {
    if spec.contains('(') {
        if !params.is_empty() {
            return Err(usage("use either `name(args)` or `--param`, not both"));
        }
        return Ok(parse_entry(spec, tol)?);
    }
    let map: BTreeMap<String, String> = params.iter().cloned().collect();
    Ok(catalog_lookup(spec.trim(), &map, tol)?)
}

fn load(input: &Input, tol: f64) -> Result<Source, Failure> {
    match (&input.lattice, &input.catalog) {
        (Some(path), None) => Ok(Source::File(path.clone(), read_lattice_file(path, tol)?)),
        (None, Some(spec)) => Ok(Source::Entry(lookup(spec, &input.params, tol)?)),
        _ => Err(usage("give exactly one of --lattice FILE or --catalog SPEC")),
    }
}

fn run_report(source: &Source, opts: &ReportOptions) -> Result<Report, Failure> {
    Ok(match source {
        Source::Entry(e) => build_report(&e.to_string(), &e.lattice, Some(&e.expectation), opts)?,
        Source::File(p, l) => build_report(&p.display().to_string(), l, None, opts)?,
    })
}

fn read_json(path: &PathBuf) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::from(Error::parse(
            format!("{} line {} column {}", path.display(), e.line(), e.column()),
            e.to_string(),
        ))
    })
}

fn only(section: &str) -> ReportOptions {
    ReportOptions {
        kahler: section == "kahler",
        immersion: section == "immersion",
        identities: section == "identities",
        ..ReportOptions::default()
    }
}

/// Keeps the lattice echo and the level of `k` from a full report.
fn level_of_k(report: &Value) -> Value {
    let idx = report["level_index"]["level"].as_u64().unwrap_or(1) as usize;
    json!({
        "source": report["source"],
        "lattice": report["lattice"],
        "mode": report["mode"],
        "volume": report["volume"],
        "level_index": report["level_index"],
        "levels": [report["levels"][idx - 1].clone()],
    })
}

fn emit(value: &Value, as_json: bool) {
    let text = if as_json {
        serde_json::to_string_pretty(value).expect("serializable") + "\n"
    } else {
        render_text(value)
    };
    // a closed pipe (e.g. `| head`) is not an error
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn status(report: &Report) -> u8 {
    if report.verification_failed {
        4
    } else if report.ambiguous {
        3
    } else {
        0
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let tol = tolerance_from_env();
    match &cli.command {
        Command::Catalog { name: None, .. } => {
            for name in CATALOG_NAMES {
                println!("{name}");
            }
            Ok(0)
        }
        Command::Catalog {
            name: Some(name),
            params,
        } => {
            let entry = lookup(name, params, tol)?;
            let lattice = torus_extremal::io::lattice_to_json(&entry.lattice);
            let value = json!({
                "entry": entry.to_string(),
                "lattice": lattice,
                "expected": {
                    "kahler_feasible": entry.expectation.kahler_feasible,
                    "immersion_feasible": entry.expectation.immersion_feasible,
                    "claims": entry.expectation.claims,
                },
            });
            if cli.json {
                emit(&value, true);
            } else {
                println!("{entry}");
                for row in lattice["basis"].as_array().into_iter().flatten() {
                    let cells: Vec<String> = row
                        .as_array()
                        .into_iter()
                        .flatten()
                        .map(|v| v.as_str().map_or_else(|| v.to_string(), String::from))
                        .collect();
                    println!("  [{}]", cells.join(", "));
                }
                for c in &entry.expectation.claims {
                    println!("claim: {c}");
                }
            }
            Ok(0)
        }
        Command::Reverify { file } => {
            let report = read_json(file)?;
            let n = reverify(&report, tol)?;
            if cli.json {
                emit(&json!({ "certificates": n, "ok": true }), true);
            } else {
                println!("{n} certificates re-verified");
            }
            Ok(0)
        }
        cmd => {
            let source = load(&cli.input, tol)?;
            let (opts, trim) = match cmd {
                Command::Dual => (only("none"), false),
                Command::Spectrum { levels } => (
                    ReportOptions {
                        levels: *levels,
                        ..only("none")
                    },
                    false,
                ),
                Command::CheckKahler { k } => (ReportOptions { k: *k, ..only("kahler") }, true),
                Command::CheckImmersion { k } => (ReportOptions { k: *k, ..only("immersion") }, true),
                Command::VerifyIdentities { k, combinations } => (
                    ReportOptions {
                        k: *k,
                        combinations: *combinations,
                        ..only("identities")
                    },
                    true,
                ),
                Command::DerivativeCheck { alpha, k } => (
                    ReportOptions {
                        k: *k,
                        alpha: Some(read_json(alpha)?),
                        ..only("none")
                    },
                    true,
                ),
                Command::Report {
                    k,
                    levels,
                    alpha,
                    combinations,
                } => (
                    ReportOptions {
                        k: *k,
                        levels: *levels,
                        combinations: *combinations,
                        alpha: alpha.as_ref().map(read_json).transpose()?,
                        ..ReportOptions::default()
                    },
                    false,
                ),
                Command::Catalog { .. } | Command::Reverify { .. } => unreachable!("handled above"),
            };
            let report = run_report(&source, &opts)?;
            let mut value = if trim { level_of_k(&report.json) } else { report.json.clone() };
            for key in ["identities", "derivative"] {
                if !report.json[key].is_null() {
                    value[key] = report.json[key].clone();
                }
            }
            if matches!(cmd, Command::Dual) {
                let dual = json!({ "source": report.json["source"], "dual": report.json["dual"] });
                if cli.json {
                    emit(&dual, true);
                } else {
                    println!("dual basis of {} (generators):", report.json["source"].as_str().unwrap_or(""));
                    for g in dual["dual"].as_array().into_iter().flatten() {
                        println!("  {g}");
                    }
                }
                return Ok(status(&report));
            }
            emit(&value, cli.json);
            let mut code = status(&report);
            if code == 0 && !report.json["derivative"].is_null() && report.json["derivative"]["pass"] != true {
                eprintln!("derivative check failed");
                code = 4;
            }
            if code == 0 && !report.json["identities"].is_null() && report.json["identities"]["pass"] == false {
                eprintln!("identity check failed");
                code = 4;
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
