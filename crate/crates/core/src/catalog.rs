//! Built-in lattice families.
//!
//! Entries are addressed either by name plus parameters or by a compact
//! expression such as `gamma_ab(2,3)` or `product(standard(1),scaled(2,standard(1)))`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::{product_lattice, LatticeBasis};
use crate::linalg::Matrix;
use crate::scalar::{parse_rational, Rational, Real};

/// A lattice in either numeric mode.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyLattice {
    Exact(LatticeBasis<Rational>),
    Float(LatticeBasis<f64>),
}

impl AnyLattice {
    pub fn real_dim(&self) -> usize {
        match self {
            AnyLattice::Exact(l) => l.real_dim(),
            AnyLattice::Float(l) => l.real_dim(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnyLattice::Exact(_))
    }

    pub fn to_float(&self, tol: f64) -> LatticeBasis<f64> {
        match self {
            AnyLattice::Exact(l) => l.to_float(tol),
            AnyLattice::Float(l) => l.clone(),
        }
    }

    pub fn product(&self, other: &AnyLattice, tol: f64) -> Result<AnyLattice> {
        match (self, other) {
            (AnyLattice::Exact(a), AnyLattice::Exact(b)) => Ok(AnyLattice::Exact(product_lattice(a, b)?)),
            // a float factor turns the whole product into a float lattice
            _ => Ok(AnyLattice::Float(product_lattice(&self.to_float(tol), &other.to_float(tol))?)),
        }
    }

    pub fn scaled(&self, s: &Rational) -> Result<AnyLattice> {
        match self {
            AnyLattice::Exact(l) => Ok(AnyLattice::Exact(l.scaled(s)?)),
            AnyLattice::Float(l) => Ok(AnyLattice::Float(l.scaled(&s.to_f64())?)),
        }
    }
}

/// What the literature asserts about an entry, for side-by-side comparison.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Expectation {
    pub kahler_feasible: Option<bool>,
    pub immersion_feasible: Option<bool>,
    /// Claims that the computation may contradict, each stated as a formula.
    pub claims: Vec<String>,
    /// A dual basis asserted in the literature, in real coordinates, to be
    /// checked for integral pairing with the primal basis.
    pub claimed_dual: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub lattice: AnyLattice,
    pub expectation: Expectation,
}

impl fmt::Display for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}({})", self.name, ps.join(","))
    }
}

pub const CATALOG_NAMES: &[&str] = &["standard", "checkerboard", "gamma_ab", "gamma_t", "product", "scaled"];

fn param<'a>(params: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    params
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::ParameterOutOfRange(format!("missing parameter `{key}`")))
}

fn int_param(params: &BTreeMap<String, String>, key: &str) -> Result<usize> {
    let s = param(params, key)?;
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::ParameterOutOfRange(format!("`{key}` must be a positive integer, got `{s}`")))
}

fn rational_param(params: &BTreeMap<String, String>, key: &str) -> Result<Rational> {
    let s = param(params, key)?;
    parse_rational(s).ok_or_else(|| Error::ParameterOutOfRange(format!("`{key}` must be rational, got `{s}`")))
}

/// `Z^{2n}`.
pub fn standard(n: usize) -> Result<LatticeBasis<Rational>> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("standard(n) needs n >= 1".into()));
    }
    Ok(LatticeBasis::identity(2 * n, 0.0))
}

/// `D_m = {x ∈ Z^m : Σ x_i even}` with basis `2e_1, e_j − e_1`.
pub fn checkerboard(m: usize) -> Result<LatticeBasis<Rational>> {
    if m < 3 {
        return Err(Error::ParameterOutOfRange(format!("checkerboard(m) needs m >= 3, got {m}")));
    }
    let mut b = Matrix::zeros(m, m);
    b[(0, 0)] = Rational::from_i64(2);
    for j in 1..m {
        b[(0, j)] = Rational::from_i64(-1);
        b[(j, j)] = Rational::from_i64(1);
    }
    LatticeBasis::new(b, 0.0)
}

/// Basis `(1,0), (i/a,0), (0,1), (0,i/b)` for `a, b > 1`.
pub fn gamma_ab(a: &Rational, b: &Rational) -> Result<LatticeBasis<Rational>> {
    let one = Rational::from_i64(1);
    if *a <= one || *b <= one {
        return Err(Error::ParameterOutOfRange(format!("gamma_ab needs a, b > 1, got a={a}, b={b}")));
    }
    let z = Rational::from_i64(0);
    let cols = vec![
        vec![one.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), one.clone() / a.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), one.clone(), z.clone()],
        vec![z.clone(), z.clone(), z, one.clone() / b.clone()],
    ];
    LatticeBasis::from_columns(&cols, 0.0)
}

/// Basis `(1,0), (0,(cos t − i sin t)/cos 2t), (i,0), (0,(−sin t + i cos t)/cos 2t)`
/// for `0 < t < π/12`.
pub fn gamma_t(t: f64, tol: f64) -> Result<LatticeBasis<f64>> {
    if !(t > 0.0 && t < std::f64::consts::PI / 12.0) {
        return Err(Error::ParameterOutOfRange(format!("gamma_t needs 0 < t < π/12, got t={t}")));
    }
    let (s, c, c2) = (t.sin(), t.cos(), (2.0 * t).cos());
    let cols = vec![
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, c / c2, -s / c2],
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, -s / c2, c / c2],
    ];
    LatticeBasis::from_columns(&cols, tol)
}

/// The dual basis `(1,0), (0,1), (i cos t, i sin t), (i sin t, i cos t)`
/// listed for `Γ_t`, in real coordinates.
pub fn gamma_t_claimed_dual(t: f64) -> Vec<Vec<f64>> {
    let (s, c) = (t.sin(), t.cos());
    vec![
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
        vec![0.0, c, 0.0, s],
        vec![0.0, s, 0.0, c],
    ]
}

/// Looks up an entry by name and string parameters.
pub fn catalog_lookup(name: &str, params: &BTreeMap<String, String>, tol: f64) -> Result<CatalogEntry> {
    let (lattice, expectation) = match name {
        "standard" => (
            AnyLattice::Exact(standard(int_param(params, "n")?)?),
            Expectation {
                kahler_feasible: Some(true),
                immersion_feasible: Some(true),
                ..Expectation::default()
            },
        ),
        "checkerboard" => {
            let m = int_param(params, "m")?;
            (
                AnyLattice::Exact(checkerboard(m)?),
                Expectation {
                    kahler_feasible: (m == 4).then_some(true),
                    immersion_feasible: Some(true),
                    ..Expectation::default()
                },
            )
        }
        "gamma_ab" => {
            let a = rational_param(params, "a")?;
            let b = rational_param(params, "b")?;
            (
                AnyLattice::Exact(gamma_ab(&a, &b)?),
                Expectation {
                    kahler_feasible: Some(true),
                    immersion_feasible: Some(false),
                    claims: vec![
                        "expected: the Kähler system at λ_1 reduces to R_1 + R_2 = 1 (e.g. R_1 = R_2 = 1/2)".into(),
                    ],
                    claimed_dual: None,
                },
            )
        }
        "gamma_t" => {
            let s = param(params, "t")?;
            let t: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::ParameterOutOfRange(format!("`t` must be a number, got `{s}`")))?;
            (
                AnyLattice::Float(gamma_t(t, tol)?),
                Expectation {
                    kahler_feasible: Some(false),
                    immersion_feasible: Some(false),
                    claims: vec![
                        "expected: dual basis (1,0), (0,1), (i cos t, i sin t), (i sin t, i cos t)".into(),
                        "expected: the four shortest dual vectors violate the diagonal equations, so λ_1 is not extremal".into(),
                    ],
                    claimed_dual: Some(gamma_t_claimed_dual(t)),
                },
            )
        }
        "product" => {
            let e1 = parse_entry(param(params, "e1")?, tol)?;
            let e2 = parse_entry(param(params, "e2")?, tol)?;
            (e1.lattice.product(&e2.lattice, tol)?, Expectation::default())
        }
        "scaled" => {
            let s = rational_param(params, "s")?;
            if s <= Rational::from_i64(0) {
                return Err(Error::ParameterOutOfRange(format!("scale must be positive, got {s}")));
            }
            let inner = parse_entry(param(params, "entry")?, tol)?;
            (inner.lattice.scaled(&s)?, inner.expectation)
        }
        other => return Err(Error::UnknownEntry(other.to_string())),
    };
    Ok(CatalogEntry {
        name: name.to_string(),
        params: params.clone(),
        lattice,
        expectation,
    })
}

/// Positional parameter names of each entry.
fn positional(name: &str) -> &'static [&'static str] {
    match name {
        "standard" => &["n"],
        "checkerboard" => &["m"],
        "gamma_ab" => &["a", "b"],
        "gamma_t" => &["t"],
        "product" => &["e1", "e2"],
        "scaled" => &["s", "entry"],
        _ => &[],
    }
}

/// Splits `a,b(c,d),e` at top-level commas.
fn split_args(s: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::parse("catalog", "unbalanced parentheses"));
                }
                cur.push(ch);
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur).trim().to_string()),
            _ => cur.push(ch),
        }
    }
    if depth != 0 {
        return Err(Error::parse("catalog", "unbalanced parentheses"));
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    Ok(out)
}

/// Parses `name(arg, ...)`; arguments may be positional or `key=value`.
pub fn parse_entry(spec: &str, tol: f64) -> Result<CatalogEntry> {
    let spec = spec.trim();
    let (name, args) = match spec.find('(') {
        Some(open) => {
            if !spec.ends_with(')') {
                return Err(Error::parse("catalog", format!("expected `)` at end of `{spec}`")));
            }
            (spec[..open].trim(), split_args(&spec[open + 1..spec.len() - 1])?)
        }
        None => (spec, Vec::new()),
    };
    if !CATALOG_NAMES.contains(&name) {
        return Err(Error::UnknownEntry(name.to_string()));
    }
    let names = positional(name);
    let mut params = BTreeMap::new();
    for (i, arg) in args.iter().enumerate() {
        let keyed = arg
            .split_once('=')
            .filter(|(k, _)| !k.trim().is_empty() && k.trim().chars().all(|c| c.is_ascii_alphanumeric() || c == '_'));
        match keyed {
            Some((k, v)) => {
                params.insert(k.trim().to_string(), v.trim().to_string());
            }
            None => {
                let key = names
                    .get(i)
                    .ok_or_else(|| Error::ParameterOutOfRange(format!("too many arguments for {name}")))?;
                params.insert((*key).to_string(), arg.clone());
            }
        }
    }
    catalog_lookup(name, &params, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::dual_basis;
    use crate::spectrum::enumerate_levels;

    #[test]
    fn standard_is_identity() {
        let l = standard(2).unwrap();
        assert_eq!(l.matrix(), &Matrix::identity(4));
        assert!(standard(0).is_err());
    }

    #[test]
    fn checkerboard_has_index_two() {
        for m in 3..=8 {
            let l = checkerboard(m).unwrap();
            assert_eq!(l.volume(), Rational::from_i64(2));
        }
        assert!(matches!(checkerboard(2), Err(Error::ParameterOutOfRange(_))));
    }

    #[test]
    fn d4_dual_has_twelve_pairs() {
        let l = checkerboard(4).unwrap();
        let levels = enumerate_levels(&dual_basis(&l).unwrap(), 1).unwrap();
        assert_eq!(levels[0].l(), 12);
        assert_eq!(levels[0].squared_norm, Rational::from_i64(1));
    }

    #[test]
    fn gamma_t_range() {
        assert!(gamma_t(0.1, 1e-9).is_ok());
        assert!(matches!(gamma_t(0.3, 1e-9), Err(Error::ParameterOutOfRange(_))));
        assert!(matches!(gamma_t(0.0, 1e-9), Err(Error::ParameterOutOfRange(_))));
    }

    #[test]
    fn expressions_parse() {
        let e = parse_entry("gamma_ab(2,3)", 1e-9).unwrap();
        assert_eq!(e.params["a"], "2");
        let e = parse_entry("gamma_ab(b=3, a=5/2)", 1e-9).unwrap();
        assert_eq!(e.params["a"], "5/2");
        let e = parse_entry("product(standard(1), scaled(2, standard(1)))", 1e-9).unwrap();
        assert_eq!(e.lattice.real_dim(), 4);
        let e = parse_entry("product(e1=standard(1), e2=gamma_t(0.1))", 1e-9).unwrap();
        assert!(!e.lattice.is_exact());
        assert_eq!(parse_entry("torus(3)", 1e-9).unwrap_err(), Error::UnknownEntry("torus".into()));
        assert!(parse_entry("gamma_ab(1,3)", 1e-9).is_err());
    }
}
