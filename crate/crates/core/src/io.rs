//! Lattice files.
//!
//! ```json
//! { "n": 2, "mode": "exact", "basis": [["1", "0", ...], ...] }
//! { "n": 2, "complex_basis": [[[1, 0], [0, 0]], ...] }
//! ```
//!
//! In `basis`, row `i` holds the real coordinate `x^i` of every generator,
//! so generators are columns. In `complex_basis`, each row is one generator
//! given by `n` pairs `[re, im]`. Rational entries are strings such as
//! `"1/3"`; numbers make the lattice floating-point. Mixing the two is an
//! error.

use serde_json::{json, Map, Value};

use crate::catalog::AnyLattice;
use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;
use crate::linalg::Matrix;
use crate::scalar::{parse_rational, Rational, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EntryKind {
    Exact,
    Float,
}

fn entry_kind(v: &Value, field: &str) -> Result<EntryKind> {
    match v {
        Value::String(_) => Ok(EntryKind::Exact),
        Value::Number(_) => Ok(EntryKind::Float),
        other => Err(Error::parse(field, format!("expected a \"p/q\" string or a number, got {other}"))),
    }
}

fn rational_entry(v: &Value, field: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).ok_or_else(|| Error::parse(field, format!("`{s}` is not a rational"))),
        _ => Err(Error::MixedMode),
    }
}

fn float_entry(v: &Value, field: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::parse(field, "number out of range")),
        _ => Err(Error::MixedMode),
    }
}

/// Flattens the entry grid of either form into `(field, value)` pairs laid
/// out as a real basis matrix `rows[i][j] = x^i(γ_j)`.
fn real_grid(obj: &Map<String, Value>) -> Result<Vec<Vec<(String, Value)>>> {
    if let Some(basis) = obj.get("basis") {
        let rows = basis.as_array().ok_or_else(|| Error::parse("basis", "expected an array of rows"))?;
        let mut grid = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| Error::parse(format!("basis[{i}]"), "expected an array"))?;
            grid.push(
                row.iter()
                    .enumerate()
                    .map(|(j, v)| (format!("basis[{i}][{j}]"), v.clone()))
                    .collect(),
            );
        }
        return Ok(grid);
    }
    if let Some(cb) = obj.get("complex_basis") {
        let gens = cb
            .as_array()
            .ok_or_else(|| Error::parse("complex_basis", "expected an array of generators"))?;
        let mut columns: Vec<Vec<(String, Value)>> = Vec::with_capacity(gens.len());
        for (j, g) in gens.iter().enumerate() {
            let pairs = g
                .as_array()
                .ok_or_else(|| Error::parse(format!("complex_basis[{j}]"), "expected an array of [re, im] pairs"))?;
            let mut col = Vec::with_capacity(2 * pairs.len());
            for (a, p) in pairs.iter().enumerate() {
                let field = format!("complex_basis[{j}][{a}]");
                match p.as_array().map(Vec::as_slice) {
                    Some([re, im]) => {
                        col.push((format!("{field}[0]"), re.clone()));
                        col.push((format!("{field}[1]"), im.clone()));
                    }
                    _ => return Err(Error::parse(field, "expected a pair [re, im]")),
                }
            }
            columns.push(col);
        }
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::parse("complex_basis", "generators have different lengths"));
        }
        return Ok((0..rows).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect());
    }
    Err(Error::parse("basis", "missing `basis` or `complex_basis`"))
}

/// Parses a lattice file; `tol` is the float tolerance.
pub fn parse_lattice_str(text: &str, tol: f64) -> Result<AnyLattice> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    parse_lattice_value(&value, tol)
}

pub fn parse_lattice_value(value: &Value, tol: f64) -> Result<AnyLattice> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse("$", "expected a JSON object"))?;
    let grid = real_grid(obj)?;
    let dim = grid.len();
    if dim == 0 {
        return Err(Error::parse("basis", "empty basis"));
    }
    if let Some(bad) = grid.iter().find(|r| r.len() != dim) {
        return Err(Error::BadShape {
            expected: dim,
            rows: dim,
            cols: bad.len(),
        });
    }
    if let Some(n) = obj.get("n") {
        let n = n.as_u64().ok_or_else(|| Error::parse("n", "expected a positive integer"))? as usize;
        if 2 * n != dim {
            return Err(Error::BadShape {
                expected: 2 * n,
                rows: dim,
                cols: dim,
            });
        }
    }
    let mut kind = None;
    for (field, v) in grid.iter().flatten() {
        let k = entry_kind(v, field)?;
        match kind {
            None => kind = Some(k),
            Some(prev) if prev != k => return Err(Error::MixedMode),
            _ => {}
        }
    }
    let kind = kind.expect("nonempty grid");
    if let Some(mode) = obj.get("mode") {
        let declared = match mode.as_str() {
            Some("exact") => EntryKind::Exact,
            Some("float") => EntryKind::Float,
            _ => return Err(Error::parse("mode", "expected \"exact\" or \"float\"")),
        };
        if declared != kind {
            return Err(Error::MixedMode);
        }
    }
    match kind {
        EntryKind::Exact => {
            let rows = grid
                .iter()
                .map(|r| r.iter().map(|(f, v)| rational_entry(v, f)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyLattice::Exact(LatticeBasis::new(Matrix::from_rows(rows)?, 0.0)?))
        }
        EntryKind::Float => {
            let rows = grid
                .iter()
                .map(|r| r.iter().map(|(f, v)| float_entry(v, f)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyLattice::Float(LatticeBasis::new(Matrix::from_rows(rows)?, tol)?))
        }
    }
}

pub fn read_lattice_file(path: &std::path::Path, tol: f64) -> Result<AnyLattice> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    parse_lattice_str(&text, tol)
}

fn basis_json<R: Real>(b: &LatticeBasis<R>) -> Value {
    let m = b.matrix();
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(Real::to_json).collect()))
            .collect(),
    )
}

/// Serializes in the `basis` form; `n` is omitted for odd real dimension.
pub fn lattice_to_json(lattice: &AnyLattice) -> Value {
    let (mode, basis, dim) = match lattice {
        AnyLattice::Exact(b) => ("exact", basis_json(b), b.real_dim()),
        AnyLattice::Float(b) => ("float", basis_json(b), b.real_dim()),
    };
    let mut obj = json!({ "mode": mode, "basis": basis });
    if dim % 2 == 0 {
        obj["n"] = json!(dim / 2);
    }
    obj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::gamma_ab;

    #[test]
    fn exact_identity_round_trip() {
        let text = r#"{"n": 2, "mode": "exact", "basis": [["1","0","0","0"],["0","1","0","0"],["0","0","1","0"],["0","0","0","1"]]}"#;
        let l = parse_lattice_str(text, 1e-9).unwrap();
        assert!(l.is_exact());
        let again = parse_lattice_value(&lattice_to_json(&l), 1e-9).unwrap();
        assert_eq!(l, again);
    }

    #[test]
    fn mixed_entries_are_rejected() {
        let text = r#"{"basis": [["1/3", 0.5], ["0", "1"]]}"#;
        assert_eq!(parse_lattice_str(text, 1e-9).unwrap_err(), Error::MixedMode);
        let text = r#"{"mode": "float", "basis": [["1", "0"], ["0", "1"]]}"#;
        assert_eq!(parse_lattice_str(text, 1e-9).unwrap_err(), Error::MixedMode);
    }

    #[test]
    fn complex_form_matches_real_form() {
        let text = r#"{"n": 2, "complex_basis": [
            [["1","0"],["0","0"]], [["0","1/2"],["0","0"]],
            [["0","0"],["1","0"]], [["0","0"],["0","1/3"]]]}"#;
        let l = parse_lattice_str(text, 1e-9).unwrap();
        let expected = gamma_ab(&Rational::from_i64(2), &Rational::from_i64(3)).unwrap();
        assert_eq!(l, AnyLattice::Exact(expected));
    }

    #[test]
    fn errors_name_the_field() {
        let err = parse_lattice_str(r#"{"basis": [["1", "x"], ["0", "1"]]}"#, 1e-9).unwrap_err();
        assert_eq!(err, Error::parse("basis[0][1]", "`x` is not a rational"));
        let err = parse_lattice_str("{\n  \"basis\": [", 1e-9).unwrap_err();
        assert!(matches!(err, Error::Parse { ref field, .. } if field.starts_with("line 2")));
        let err = parse_lattice_str(r#"{"n": 2, "basis": [["1","0"],["0","1"]]}"#, 1e-9).unwrap_err();
        assert!(matches!(err, Error::BadShape { .. }));
        let err = parse_lattice_str(r#"{"basis": [["1","2"],["2","4"]]}"#, 1e-9).unwrap_err();
        assert_eq!(err, Error::SingularBasis);
    }

    #[test]
    fn float_files_parse() {
        let l = parse_lattice_str(r#"{"basis": [[1.0, 0.25], [0, 2]]}"#, 1e-9).unwrap();
        assert!(!l.is_exact());
    }
}
