//! Feasibility systems for λ_k-extremality and minimal immersions.
//!
//! The Kähler system asks for weights `R_ν >= 0` with
//! `Σ R_ν |w_ν^α|² = 1` and `Σ R_ν conj(w_ν^α) w_ν^β = 0` for `α ≠ β`.
//! The immersion system asks for `c_ν >= 0` with `4π² Σ c_ν u_ν u_νᵀ = I`;
//! it is solved in the scaled variables `ĉ_ν = 4π² c_ν` so that its entries
//! stay rational.

use std::fmt;

use serde_json::{json, Value};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::forms::{ddc, l_rhs, EigenfunctionBasis, Form11};
use crate::fourier::TrigPoly;
use crate::linalg::Matrix;
use crate::scalar::{dot, Real};
use crate::spectrum::EigenLevel;

/// Float-mode phase-one values below this bound are never asserted as
/// infeasible.
pub const AMBIGUITY_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Kahler,
    Immersion,
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Kahler => "kahler",
            SystemKind::Immersion => "immersion",
        })
    }
}

/// `A x = b, x >= 0` with real entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilitySystem<R> {
    pub a: Matrix<R>,
    pub b: Vec<R>,
    pub variables: Vec<String>,
    pub kind: SystemKind,
    pub tol: f64,
}

impl<R: Real> FeasibilitySystem<R> {
    pub fn new(a: Matrix<R>, b: Vec<R>, kind: SystemKind, tol: f64) -> Self {
        assert_eq!(a.rows(), b.len(), "right-hand side length");
        let prefix = match kind {
            SystemKind::Kahler => "R",
            SystemKind::Immersion => "c",
        };
        let variables = (1..=a.cols()).map(|j| format!("{prefix}_{j}")).collect();
        FeasibilitySystem { a, b, variables, kind, tol }
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// `max_i |(A x − b)_i|`.
    pub fn residual(&self, x: &[R]) -> R {
        let ax = self.a.mul_vec(x);
        ax.iter()
            .zip(&self.b)
            .map(|(l, r)| (l.clone() - r.clone()).abs())
            .fold(R::zero(), |m, v| if v > m { v } else { m })
    }

    fn scale(&self) -> f64 {
        let a = (0..self.rows())
            .flat_map(|i| self.a.row(i).iter())
            .chain(&self.b)
            .map(|x| x.to_f64().abs())
            .fold(1.0, f64::max);
        a * self.cols().max(1) as f64
    }

    /// Re-verifies a weight certificate: nonnegative and `A x = b`.
    pub fn check_weights(&self, x: &[R]) -> bool {
        if x.len() != self.cols() {
            return false;
        }
        if R::EXACT {
            x.iter().all(|v| !v.is_negative()) && self.residual(x).is_zero()
        } else {
            let tol = self.tol * self.scale();
            x.iter().all(|v| v.to_f64() >= -tol) && self.residual(x).to_f64() <= tol
        }
    }

    /// Re-verifies a Farkas certificate: `yᵀA <= 0` and `yᵀb > 0`.
    pub fn check_farkas(&self, y: &[R]) -> bool {
        if y.len() != self.rows() {
            return false;
        }
        let yb = dot(y, &self.b);
        let yta = self.a.transpose().mul_vec(y);
        if R::EXACT {
            yb.is_positive() && yta.iter().all(|v| !v.is_positive())
        } else {
            let ynorm = y.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
            let tol = self.tol * self.scale() * ynorm.max(1.0);
            yb.to_f64() > AMBIGUITY_BAND.max(tol) && yta.iter().all(|v| v.to_f64() <= tol)
        }
    }

    pub fn summary_json(&self) -> Value {
        json!({ "rows": self.rows(), "cols": self.cols(), "kind": self.kind.to_string() })
    }
}

/// Diagonal rows `α = 1..n` first, then for each `α < β` the real part and
/// the imaginary part of the off-diagonal equation.
pub fn build_kahler_system<R: Real>(level: &EigenLevel<R>, n: usize, tol: f64) -> Result<FeasibilitySystem<R>> {
    let reps = level.complex_reps()?;
    if reps.iter().any(|w| w.dim() != n) {
        return Err(Error::DimensionMismatch(format!(
            "representatives do not have complex dimension {n}"
        )));
    }
    let l = reps.len();
    let mut rows: Vec<Vec<R>> = Vec::new();
    let mut b = Vec::new();
    for alpha in 0..n {
        rows.push(reps.iter().map(|w| w.abs_sq(alpha)).collect());
        b.push(R::one());
    }
    for alpha in 0..n {
        for beta in alpha + 1..n {
            let products: Vec<(R, R)> = reps.iter().map(|w| w.conj_product(alpha, beta)).collect();
            rows.push(products.iter().map(|p| p.0.clone()).collect());
            rows.push(products.iter().map(|p| p.1.clone()).collect());
            b.push(R::zero());
            b.push(R::zero());
        }
    }
    let a = if rows.is_empty() {
        Matrix::zeros(0, l)
    } else {
        Matrix::from_rows(rows)?
    };
    Ok(FeasibilitySystem::new(a, b, SystemKind::Kahler, tol))
}

/// Rows are the entries `(i, j)`, `i <= j`, of `Σ ĉ_ν u_ν u_νᵀ = I`.
pub fn build_immersion_system<R: Real>(level: &EigenLevel<R>, m: usize, tol: f64) -> Result<FeasibilitySystem<R>> {
    if level.reps.iter().any(|u| u.len() != m) {
        return Err(Error::DimensionMismatch(format!(
            "representatives do not have real dimension {m}"
        )));
    }
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for i in 0..m {
        for j in i..m {
            rows.push(level.reps.iter().map(|u| u[i].clone() * u[j].clone()).collect());
            b.push(if i == j { R::one() } else { R::zero() });
        }
    }
    let a = if rows.is_empty() {
        Matrix::zeros(0, level.l())
    } else {
        Matrix::from_rows(rows)?
    };
    Ok(FeasibilitySystem::new(a, b, SystemKind::Immersion, tol))
}

/// Nonnegative weights solving the system.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightCertificate<R> {
    pub weights: Vec<R>,
    pub residual: R,
}

/// `y` with `yᵀA <= 0` and `yᵀb > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate<R> {
    pub y: Vec<R>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<R> {
    Feasible(WeightCertificate<R>),
    Infeasible(FarkasCertificate<R>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverStats {
    pub pivots: usize,
    pub phase_one_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityOutcome<R> {
    pub verdict: Verdict<R>,
    pub stats: SolverStats,
}

impl<R: Real> FeasibilityOutcome<R> {
    pub fn is_feasible(&self) -> bool {
        matches!(self.verdict, Verdict::Feasible(_))
    }

    pub fn weights(&self) -> Option<&[R]> {
        match &self.verdict {
            Verdict::Feasible(w) => Some(&w.weights),
            Verdict::Infeasible(_) => None,
        }
    }

    pub fn farkas(&self) -> Option<&[R]> {
        match &self.verdict {
            Verdict::Infeasible(f) => Some(&f.y),
            Verdict::Feasible(_) => None,
        }
    }

    pub fn to_json(&self, system: &FeasibilitySystem<R>) -> Value {
        let list = |v: &[R]| Value::Array(v.iter().map(Real::to_json).collect());
        match &self.verdict {
            Verdict::Feasible(w) => json!({
                "status": "feasible",
                "weights": list(&w.weights),
                "residual": w.residual.to_json(),
                "system": system.summary_json(),
            }),
            Verdict::Infeasible(f) => json!({
                "status": "infeasible",
                "farkas": list(&f.y),
                "residual": Value::Null,
                "system": system.summary_json(),
            }),
        }
    }
}

fn is_pos<R: Real>(x: &R, tol: f64) -> bool {
    if R::EXACT {
        x.is_positive()
    } else {
        x.to_f64() > tol
    }
}

fn is_neg<R: Real>(x: &R, tol: f64) -> bool {
    if R::EXACT {
        x.is_negative()
    } else {
        x.to_f64() < -tol
    }
}

/// Phase-one simplex with Bland's rule. Returns the final tableau data:
/// basis, rhs, and the dual vector `y = c_Bᵀ B⁻¹` for the sign-normalized rows.
struct PhaseOne<R> {
    x: Vec<R>,
    value: R,
    y: Vec<R>,
    pivots: usize,
}

fn phase_one<R: Real>(a: &Matrix<R>, b: &[R], tol: f64) -> PhaseOne<R> {
    let (m, l) = (a.rows(), a.cols());
    let width = l + m + 1;
    let rhs = l + m;
    // tableau rows: [A | I | b] with rows flipped so that b >= 0
    let mut t: Vec<Vec<R>> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row = vec![R::zero(); width];
        for j in 0..l {
            row[j] = if flip { -a[(i, j)].clone() } else { a[(i, j)].clone() };
        }
        row[l + i] = R::one();
        row[rhs] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(row);
    }
    let mut basis: Vec<usize> = (l..l + m).collect();
    let cost = |j: usize| if j >= l && j < l + m { R::one() } else { R::zero() };
    let mut pivots = 0;
    loop {
        // reduced cost d_j = c_j − Σ_i c_{B_i} t[i][j]
        let reduced = |j: usize, t: &Vec<Vec<R>>, basis: &Vec<usize>| {
            let mut d = cost(j);
            for (i, &bi) in basis.iter().enumerate() {
                if bi >= l {
                    d = d - t[i][j].clone();
                }
            }
            d
        };
        let entering = (0..l + m).find(|&j| !basis.contains(&j) && is_neg(&reduced(j, &t, &basis), tol));
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, R)> = None;
        for i in 0..m {
            if !is_pos(&t[i][e], tol) {
                continue;
            }
            let ratio = t[i][rhs].clone() / t[i][e].clone();
            leave = match leave {
                None => Some((i, ratio)),
                Some((k, best)) => {
                    let better = if R::EXACT {
                        ratio < best || (ratio == best && basis[i] < basis[k])
                    } else {
                        let (r, bb) = (ratio.to_f64(), best.to_f64());
                        r < bb - tol || ((r - bb).abs() <= tol && basis[i] < basis[k])
                    };
                    if better {
                        Some((i, ratio))
                    } else {
                        Some((k, best))
                    }
                }
            };
        }
        // phase one is bounded below by zero, so an entering column always has a pivot
        let Some((p, _)) = leave else { break };
        let inv = R::one() / t[p][e].clone();
        for v in t[p].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        let prow = t[p].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == p || row[e].is_zero() {
                continue;
            }
            let f = row[e].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v = v.clone() - f.clone() * pv.clone();
            }
            if !R::EXACT {
                row[e] = R::zero();
            }
        }
        basis[p] = e;
        pivots += 1;
    }
    let mut x = vec![R::zero(); l];
    let mut value = R::zero();
    for (i, &bi) in basis.iter().enumerate() {
        if bi < l {
            x[bi] = t[i][rhs].clone();
        } else {
            value = value + t[i][rhs].clone();
        }
    }
    // y_i = Σ_k c_{B_k} (B⁻¹)_{k i}; the artificial columns hold B⁻¹
    let mut y = vec![R::zero(); m];
    for (i, yi) in y.iter_mut().enumerate() {
        for (k, &bk) in basis.iter().enumerate() {
            if bk >= l {
                *yi = yi.clone() + t[k][l + i].clone();
            }
        }
        if b[i].is_negative() {
            *yi = -yi.clone();
        }
    }
    PhaseOne { x, value, y, pivots }
}

/// Decides `{x >= 0 : A x = b} ≠ ∅` and returns a re-verified certificate.
pub fn solve_feasibility<R: Real>(system: &FeasibilitySystem<R>) -> Result<FeasibilityOutcome<R>> {
    let tol = system.tol;
    let (m, l) = (system.rows(), system.cols());
    // a zero row with nonzero right-hand side is infeasible on its own
    for i in 0..m {
        let zero_row = (0..l).all(|j| system.a[(i, j)].is_zero_tol(tol));
        if zero_row && !system.b[i].is_zero_tol(tol) {
            let mut y = vec![R::zero(); m];
            y[i] = if system.b[i].is_negative() { -R::one() } else { R::one() };
            return Ok(FeasibilityOutcome {
                verdict: Verdict::Infeasible(FarkasCertificate { y }),
                stats: SolverStats {
                    pivots: 0,
                    phase_one_value: system.b[i].to_f64().abs(),
                },
            });
        }
    }
    let run = phase_one(&system.a, &system.b, tol);
    let value = run.value.to_f64();
    let stats = SolverStats {
        pivots: run.pivots,
        phase_one_value: value,
    };
    let feasible = if R::EXACT {
        run.value.is_zero()
    } else {
        value <= tol * system.scale()
    };
    if feasible {
        let mut x = run.x;
        if !R::EXACT {
            for v in x.iter_mut() {
                if v.is_negative() {
                    *v = R::zero();
                }
            }
        }
        if !system.check_weights(&x) {
            return Err(Error::NumericallyAmbiguous { phase_one_value: value });
        }
        let residual = system.residual(&x);
        return Ok(FeasibilityOutcome {
            verdict: Verdict::Feasible(WeightCertificate { weights: x, residual }),
            stats,
        });
    }
    if !R::EXACT && value <= AMBIGUITY_BAND {
        return Err(Error::NumericallyAmbiguous { phase_one_value: value });
    }
    if !system.check_farkas(&run.y) {
        if R::EXACT {
            return Err(Error::CertificateRejected("Farkas vector failed re-verification".into()));
        }
        return Err(Error::NumericallyAmbiguous { phase_one_value: value });
    }
    Ok(FeasibilityOutcome {
        verdict: Verdict::Infeasible(FarkasCertificate { y: run.y }),
        stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShortcutVerdict {
    NotExtremal,
}

/// A single antipodal pair cannot satisfy the Kähler system in dimension
/// `n >= 2`.
pub fn multiplicity_shortcut<R: Real>(level: &EigenLevel<R>, n: usize) -> Option<ShortcutVerdict> {
    (level.l() == 1 && n >= 2).then_some(ShortcutVerdict::NotExtremal)
}

/// Largest number of columns the oracle enumerates subsets of.
pub const ORACLE_MAX_COLS: usize = 14;
/// Largest number of independent rows the oracle accepts.
pub const ORACLE_MAX_ROWS: usize = 12;

/// Decides feasibility by enumerating every basic solution.
pub fn brute_force_oracle<R: Real>(system: &FeasibilitySystem<R>) -> Result<bool> {
    let (m, l) = (system.rows(), system.cols());
    let tol = system.tol;
    let mut aug = Matrix::zeros(m, l + 1);
    for i in 0..m {
        for j in 0..l {
            aug[(i, j)] = system.a[(i, j)].clone();
        }
        aug[(i, l)] = system.b[i].clone();
    }
    let pivots = aug.row_reduce(tol);
    if pivots.last() == Some(&l) {
        return Ok(false);
    }
    let r = pivots.len();
    if l > ORACLE_MAX_COLS || r > ORACLE_MAX_ROWS {
        return Err(Error::TooLarge { cols: l, rows: r });
    }
    if r == 0 {
        return Ok(true);
    }
    let b: Vec<R> = (0..r).map(|i| aug[(i, l)].clone()).collect();
    let mut subset: Vec<usize> = (0..r).collect();
    loop {
        let cols: Vec<Vec<R>> = subset
            .iter()
            .map(|&j| (0..r).map(|i| aug[(i, j)].clone()).collect())
            .collect();
        let sub = Matrix::from_columns(&cols)?;
        if sub.rank(tol) == r {
            if let Some(xs) = sub.solve(&b, tol) {
                let mut x = vec![R::zero(); l];
                for (&j, v) in subset.iter().zip(xs) {
                    x[j] = v;
                }
                if x.iter().all(|v| !is_neg(v, tol * system.scale())) {
                    let clamped: Vec<R> = x.into_iter().map(|v| if v.is_negative() { R::zero() } else { v }).collect();
                    if system.check_weights(&clamped) {
                        return Ok(true);
                    }
                }
            }
        }
        if !next_subset(&mut subset, l) {
            return Ok(false);
        }
    }
}

/// Advances to the next `k`-subset of `0..n` in lexicographic order.
fn next_subset(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    for i in (0..k).rev() {
        if s[i] < n - k + i {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Outcome of the three certificate checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport<C> {
    /// `A·R = b` on the Kähler system.
    pub residual_zero: bool,
    /// `a > 0` with `Σ R_ν [H(φ dd^c φ) + H(ψ dd^c ψ)] = −aω`.
    pub omega_multiple: C,
    /// `Σ R_ν [L_rhs(φ_ν) + L_rhs(ψ_ν)] = 0`.
    pub l_sum_zero: bool,
}

/// Checks a Kähler weight certificate against the Fourier calculus.
pub fn verify_certificate<R: Real>(
    level: &EigenLevel<R>,
    weights: &[R],
    basis: &EigenfunctionBasis<R>,
) -> Result<CertificateReport<R::Coeff>> {
    if weights.len() != level.l() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} representatives",
            weights.len(),
            level.l()
        )));
    }
    if weights.iter().any(|w| is_neg(w, basis.functions[0].shape().tol)) {
        return Err(Error::CertificateRejected("negative weight".into()));
    }
    let shape = basis.functions[0].shape();
    let n = shape.complex_dim()?;
    let system = build_kahler_system(level, n, shape.tol)?;
    if !system.check_weights(weights) {
        return Err(Error::CertificateRejected("(i) weights do not solve the Kähler system".into()));
    }

    let mut harmonic = Form11::zero(shape)?;
    let mut l_sum = TrigPoly::zero(shape);
    for (nu, r) in weights.iter().enumerate() {
        if r.is_zero() {
            continue;
        }
        let rc = r.to_coeff();
        for f in [basis.phi(nu), basis.psi(nu)] {
            let h = ddc(f)?.mul_fn(f)?.harmonic_project();
            harmonic = harmonic.add(&h.scale(&rc))?;
            l_sum = &l_sum + &l_rhs(f, &basis.lambda)?.scale(&rc);
        }
    }
    let c = harmonic
        .omega_multiple()
        .ok_or_else(|| Error::CertificateRejected("(ii) harmonic part is not a multiple of ω".into()))?;
    let a = -c;
    let z = a.to_complex();
    let positive = z.re > 0.0 && z.im.abs() <= shape.tol.max(1e-12) * z.re.max(1.0);
    if !positive {
        return Err(Error::CertificateRejected(format!("(ii) multiple of ω is not negative: {a}")));
    }
    if !l_sum.is_zero_approx() {
        return Err(Error::CertificateRejected("(iii) weighted L sum does not vanish".into()));
    }
    Ok(CertificateReport {
        residual_zero: true,
        omega_multiple: a,
        l_sum_zero: true,
    })
}

/// `4π² Σ c_ν u_ν u_νᵀ = I` in the coefficient ring, for unscaled weights `c_ν`.
pub fn verify_immersion_weights<R: Real>(level: &EigenLevel<R>, c: &[R::Coeff], tol: f64) -> bool {
    if c.len() != level.l() || c.iter().any(|v| v.to_complex().re < -tol) {
        return false;
    }
    let m = level.real_dim();
    let four_pi_sq = R::Coeff::from_i64(4) * R::Coeff::pi() * R::Coeff::pi();
    for i in 0..m {
        for j in i..m {
            let mut s = R::Coeff::zero();
            for (u, cv) in level.reps.iter().zip(c) {
                s = s + cv.clone() * (u[i].clone() * u[j].clone()).to_coeff();
            }
            let target = if i == j { R::Coeff::one() } else { R::Coeff::zero() };
            if !(four_pi_sq.clone() * s - target).is_zero_tol(tol) {
                return false;
            }
        }
    }
    true
}

/// Converts scaled immersion weights `ĉ_ν` to `c_ν = ĉ_ν / 4π²`.
pub fn unscale_immersion_weights<R: Real>(scaled: &[R]) -> Vec<R::Coeff> {
    let factor = R::from_ratio(1, 4).to_coeff() * R::Coeff::pi_pow(-2);
    scaled.iter().map(|v| v.to_coeff() * factor.clone()).collect()
}
