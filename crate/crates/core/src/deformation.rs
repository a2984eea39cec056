//! Constant harmonic deformations `ω + tα` of the flat Kähler form.
//!
//! For constant `α = (i/2) Σ h_{αβ} dz^α ∧ dz̄^β` with `h` Hermitian, the
//! deformed metric is again flat. Its Riemannian matrix in the real
//! coordinates is `M_t = [[P, Q], [−Q, P]]` (interleaved), where
//! `I + t h = P + iQ`, and the volume-normalized metric is
//! `det(M_t)^{−1/2n} M_t`. Eigenvalues are `4π² det(M_t)^{1/2n} wᵀ M_t⁻¹ w`.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::forms::{form_inner, q_alpha_pair, EigenfunctionBasis, Form11};
use crate::fourier::TorusShape;
use crate::lattice::{dual_basis, LatticeBasis};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::spectrum::{enumerate_levels, level_for_index, EigenLevel};

/// A closed real (1,1)-form used as a deformation direction.
#[derive(Debug, Clone)]
pub struct HarmonicDeformation<R: Real> {
    pub alpha: Form11<R>,
    /// Hermitian matrix `h = re + i·im` with `α = (i/2) Σ h_{αβ} dz^α ∧ dz̄^β`,
    /// present when `α` is constant.
    pub hermitian: Option<(Matrix<R>, Matrix<R>)>,
    /// `∫ g(α, ω) dμ = 0`.
    pub trace_zero: bool,
}

impl<R: Real> HarmonicDeformation<R> {
    /// Constant deformation from a Hermitian matrix `re + i·im`.
    pub fn constant(shape: &std::sync::Arc<TorusShape<R>>, re: Matrix<R>, im: Matrix<R>) -> Result<Self> {
        let n = shape.complex_dim()?;
        if re.rows() != n || re.cols() != n || im.rows() != n || im.cols() != n {
            return Err(Error::DimensionMismatch(format!("deformation matrix must be {n}x{n}")));
        }
        let tol = shape.tol;
        let antisym = (0..n).all(|a| (0..n).all(|b| (im[(a, b)].clone() + im[(b, a)].clone()).is_zero_tol(tol)));
        if !re.is_symmetric(tol) || !antisym {
            return Err(Error::NonRealInput);
        }
        let half_i = R::Coeff::i() * R::from_ratio(1, 2).to_coeff();
        let coeffs: Vec<Vec<R::Coeff>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| half_i.clone() * (re[(a, b)].to_coeff() + R::Coeff::i() * im[(a, b)].to_coeff()))
                    .collect()
            })
            .collect();
        let alpha = Form11::constant(shape, &coeffs)?;
        let trace = (0..n).fold(R::zero(), |acc, a| acc + re[(a, a)].clone());
        Ok(HarmonicDeformation {
            alpha,
            hermitian: Some((re, im)),
            trace_zero: trace.is_zero_tol(tol),
        })
    }

    /// Arbitrary closed real form, typically `dd^c ψ`; only usable through `Q_α`
    /// (use [`HarmonicDeformation::constant`] for spectral deformations).
    pub fn from_form(alpha: Form11<R>) -> Result<Self> {
        if !alpha.is_real() {
            return Err(Error::NonRealInput);
        }
        let omega = Form11::omega(alpha.shape())?;
        let pairing = form_inner(&alpha, &omega)?.integrate();
        let tol = alpha.shape().tol;
        Ok(HarmonicDeformation {
            trace_zero: pairing.is_zero_tol(tol),
            hermitian: None,
            alpha,
        })
    }

    pub fn to_json(&self) -> Value {
        match &self.hermitian {
            Some((re, im)) => {
                let n = re.rows();
                let rows: Vec<Value> = (0..n)
                    .map(|a| {
                        Value::Array(
                            (0..n)
                                .map(|b| json!([re[(a, b)].to_json(), im[(a, b)].to_json()]))
                                .collect(),
                        )
                    })
                    .collect();
                json!({ "hermitian": rows })
            }
            None => json!({ "hermitian": Value::Null }),
        }
    }
}

/// `I + t h` as the real matrix `M_t` in interleaved coordinates.
fn deformed_metric<R: Real>(d: &HarmonicDeformation<R>, t: f64) -> Result<DMatrix<f64>> {
    let (re, im) = d.hermitian.as_ref().ok_or(Error::NonConstantDeformation)?;
    let n = re.rows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            let p = if a == b { 1.0 } else { 0.0 } + t * re[(a, b)].to_f64();
            let q = t * im[(a, b)].to_f64();
            m[(2 * a, 2 * b)] = p;
            m[(2 * a + 1, 2 * b + 1)] = p;
            m[(2 * a, 2 * b + 1)] = q;
            m[(2 * a + 1, 2 * b)] = -q;
        }
    }
    Ok(m)
}

/// Spectrum data of the deformed flat metric.
struct DeformedLattice {
    dual: crate::lattice::DualLattice<f64>,
    /// `det(M_t)^{1/2n}`; 1 when the metric is not volume-normalized.
    factor: f64,
}

fn deformed_lattice<R: Real>(
    b: &LatticeBasis<R>,
    d: &HarmonicDeformation<R>,
    t: f64,
    normalize: bool,
) -> Result<DeformedLattice> {
    let m = deformed_metric(d, t)?;
    let dim = m.nrows();
    if dim != b.real_dim() {
        return Err(Error::DimensionMismatch("deformation and lattice dimensions differ".into()));
    }
    let chol = nalgebra::Cholesky::new(m.clone()).ok_or(Error::NotPositive { t })?;
    let det = chol.determinant();
    let minv = chol.inverse();
    let l = nalgebra::Cholesky::new(minv).ok_or(Error::NotPositive { t })?.l();
    let tol = if R::EXACT { crate::scalar::DEFAULT_TOL } else { b.tol() };
    let primal = b.to_float(tol);
    let dual = dual_basis(&primal)?;
    let d0 = dual.matrix().to_nalgebra();
    // D' = Lᵀ D has Gram Dᵀ M⁻¹ D; its primal is the inverse transpose
    let dprime = l.transpose() * d0;
    let bprime = dprime
        .clone()
        .try_inverse()
        .ok_or(Error::SingularBasis)?
        .transpose();
    let rows: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| bprime[(i, j)]).collect()).collect();
    let lattice = LatticeBasis::new(Matrix::from_rows(rows)?, tol)?;
    let factor = if normalize { det.powf(1.0 / dim as f64) } else { 1.0 };
    Ok(DeformedLattice {
        dual: dual_basis(&lattice)?,
        factor,
    })
}

fn kth_eigenvalue(lat: &DeformedLattice, k: usize) -> Result<f64> {
    let mut count = 1;
    loop {
        let levels = enumerate_levels(&lat.dual, count)?;
        let covered: usize = levels.iter().map(EigenLevel::multiplicity).sum();
        if covered >= k {
            let idx = level_for_index(&levels, k)?;
            return Ok(lat.factor * levels[idx.level].lambda());
        }
        count += 1;
    }
}

/// `λ_k(g_t)` for the volume-normalized deformed metric.
pub fn deformed_spectrum<R: Real>(b: &LatticeBasis<R>, d: &HarmonicDeformation<R>, t: f64, k: usize) -> Result<f64> {
    kth_eigenvalue(&deformed_lattice(b, d, t, true)?, k)
}

/// `λ_k(g̃_t)` for the metric of `ω + tα` without volume normalization.
pub fn unnormalized_spectrum<R: Real>(
    b: &LatticeBasis<R>,
    d: &HarmonicDeformation<R>,
    t: f64,
    k: usize,
) -> Result<f64> {
    kth_eigenvalue(&deformed_lattice(b, d, t, false)?, k)
}

/// Volume of the normalized deformed torus.
pub fn deformed_volume<R: Real>(b: &LatticeBasis<R>, d: &HarmonicDeformation<R>, t: f64) -> Result<f64> {
    let m = deformed_metric(d, t)?;
    let dim = m.nrows() as f64;
    let det = nalgebra::Cholesky::new(m).ok_or(Error::NotPositive { t })?.determinant();
    let c = det.powf(-1.0 / dim);
    Ok(b.volume().to_f64().abs() * (c.powf(dim) * det).sqrt())
}

/// Gram matrix of the polarized `Q_α` on one eigenspace.
#[derive(Debug, Clone)]
pub struct QGramMatrix<C> {
    pub entries: Vec<Vec<C>>,
}

impl<C: Coeff> QGramMatrix<C> {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entries[i][j].to_complex().re)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| (self.entries[i][j].clone() - self.entries[j][i].clone()).is_zero_tol(tol)))
    }

    /// Smallest and largest eigenvalue.
    pub fn extreme_eigenvalues(&self) -> (f64, f64) {
        if self.dim() == 0 {
            return (0.0, 0.0);
        }
        let eig = self.to_f64().symmetric_eigenvalues();
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    }

    /// `Σ_ν R_ν (Q(φ_ν) + Q(ψ_ν))` from the diagonal.
    pub fn weighted_trace<R: Real<Coeff = C>>(&self, weights: &[R]) -> C {
        let mut acc = C::zero();
        for (nu, r) in weights.iter().enumerate() {
            let s = self.entries[2 * nu][2 * nu].clone() + self.entries[2 * nu + 1][2 * nu + 1].clone();
            acc = acc + r.to_coeff() * s;
        }
        acc
    }
}

/// `Q_α(f_i, f_j)` over the basis `φ_1, ψ_1, φ_2, ...`.
pub fn q_gram<R: Real>(basis: &EigenfunctionBasis<R>, d: &HarmonicDeformation<R>) -> Result<QGramMatrix<R::Coeff>> {
    if !d.trace_zero {
        return Err(Error::TraceNotZero);
    }
    let f = &basis.functions;
    let n = f.len();
    let mut entries = vec![vec![R::Coeff::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = q_alpha_pair(&f[i], &f[j], &d.alpha)?;
            entries[i][j] = v.clone();
            entries[j][i] = v;
        }
    }
    Ok(QGramMatrix { entries })
}

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-4;

/// Outcome of comparing one-sided derivatives with the `Q_α` spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeReport {
    pub k: usize,
    pub d_left: f64,
    pub d_right: f64,
    pub qgram_min: f64,
    pub qgram_max: f64,
    /// Predicted left and right derivatives, when `λ_k` sits at an edge of its level.
    pub expected: Option<(f64, f64)>,
    pub tolerance: f64,
    pub richardson: bool,
    pub pass: bool,
}

impl DerivativeReport {
    pub fn to_json(&self, alpha: Value) -> Value {
        json!({
            "alpha": alpha,
            "k": self.k,
            "d_left": self.d_left,
            "d_right": self.d_right,
            "qgram_min": self.qgram_min,
            "qgram_max": self.qgram_max,
            "tolerance": self.tolerance,
            "richardson": self.richardson,
            "pass": self.pass,
        })
    }
}

fn one_sided<F: Fn(f64) -> Result<f64>>(f: &F, h: f64, l0: f64) -> Result<(f64, f64)> {
    let right = (-3.0 * l0 + 4.0 * f(h)? - f(2.0 * h)?) / (2.0 * h);
    let left = (3.0 * l0 - 4.0 * f(-h)? + f(-2.0 * h)?) / (2.0 * h);
    Ok((left, right))
}

/// Compares the one-sided derivatives of `λ_k(g_t)` at `t = 0` with the
/// extreme eigenvalues of the `Q_α` Gram matrix.
///
/// At the first index of a level the left derivative is the largest and the
/// right derivative the smallest eigenvalue; at the last index it is the
/// other way round.
pub fn derivative_check<R: Real>(b: &LatticeBasis<R>, d: &HarmonicDeformation<R>, k: usize) -> Result<DerivativeReport> {
    let dual = dual_basis(b)?;
    let mut count = 1;
    let levels = loop {
        let levels = enumerate_levels(&dual, count)?;
        if levels.iter().map(EigenLevel::multiplicity).sum::<usize>() >= k {
            break levels;
        }
        count += 1;
    };
    let idx = level_for_index(&levels, k)?;
    let shape = TorusShape::of(b);
    let basis = EigenfunctionBasis::new(&levels[idx.level], &shape)?;
    let gram = q_gram(&basis, d)?;
    let (qmin, qmax) = gram.extreme_eigenvalues();
    let expected = if idx.strictly_above_prev {
        Some((qmax, qmin))
    } else if idx.strictly_below_next {
        Some((qmin, qmax))
    } else {
        None
    };

    let f = |t: f64| deformed_spectrum(b, d, t, k);
    let l0 = f(0.0)?;
    let tolerance = 1e-6f64.max(10.0 * FD_STEP * FD_STEP);
    let matches = |(left, right): (f64, f64)| match expected {
        Some((el, er)) => (left - el).abs() <= tolerance && (right - er).abs() <= tolerance,
        None => left >= qmin - tolerance && right <= qmax + tolerance,
    };
    let (mut left, mut right) = one_sided(&f, FD_STEP, l0)?;
    let mut richardson = false;
    if !matches((left, right)) {
        let (lh, rh) = one_sided(&f, FD_STEP / 2.0, l0)?;
        left = (4.0 * lh - left) / 3.0;
        right = (4.0 * rh - right) / 3.0;
        richardson = true;
    }
    Ok(DerivativeReport {
        k,
        d_left: left,
        d_right: right,
        qgram_min: qmin,
        qgram_max: qmax,
        expected,
        tolerance,
        richardson,
        pass: matches((left, right)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::standard;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn diag_deformation() -> (LatticeBasis<Rational>, HarmonicDeformation<Rational>) {
        let b = standard(2).unwrap();
        let shape = TorusShape::of(&b);
        let re = Matrix::from_rows(vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(-1, 1)]]).unwrap();
        let d = HarmonicDeformation::constant(&shape, re, Matrix::zeros(2, 2)).unwrap();
        (b, d)
    }

    #[test]
    fn closed_form_spectrum() {
        let (b, d) = diag_deformation();
        let four_pi_sq: f64 = 4.0 * std::f64::consts::PI.powi(2);
        for t in [0.0f64, 0.1, -0.2] {
            let expected: f64 = four_pi_sq * (1.0 - t * t).sqrt() / (1.0 + t.abs());
            let got = deformed_spectrum(&b, &d, t, 1).unwrap();
            assert!((got - expected).abs() < 1e-9, "t={t}: {got} vs {expected}");
        }
        assert!(matches!(deformed_spectrum(&b, &d, 1.5, 1), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn gram_is_diagonal_for_diagonal_alpha() {
        let (b, d) = diag_deformation();
        let dual = dual_basis(&b).unwrap();
        let level = &enumerate_levels(&dual, 1).unwrap()[0];
        let basis = EigenfunctionBasis::new(level, &TorusShape::of(&b)).unwrap();
        let gram = q_gram(&basis, &d).unwrap();
        assert!(gram.is_symmetric(0.0));
        let lam = basis.lambda.clone();
        // reps e_1, i e_1 live on z¹ and e_2, i e_2 on z²
        for i in 0..8 {
            for j in 0..8 {
                let expected = match (i == j, i < 4) {
                    (true, true) => -lam.clone(),
                    (true, false) => lam.clone(),
                    _ => crate::coeff::Symbolic::zero(),
                };
                assert_eq!(gram.entries[i][j], expected, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn derivatives_match_gram_extremes() {
        let (b, d) = diag_deformation();
        let r = derivative_check(&b, &d, 1).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.qgram_min < 0.0 && r.qgram_max > 0.0);
    }

    #[test]
    fn trace_must_vanish() {
        let b = standard(2).unwrap();
        let shape = TorusShape::of(&b);
        let d = HarmonicDeformation::constant(&shape, Matrix::identity(2), Matrix::zeros(2, 2)).unwrap();
        assert!(!d.trace_zero);
        let dual = dual_basis(&b).unwrap();
        let level = &enumerate_levels(&dual, 1).unwrap()[0];
        let basis = EigenfunctionBasis::new(level, &shape).unwrap();
        assert_eq!(q_gram(&basis, &d).unwrap_err(), Error::TraceNotZero);
    }

    #[test]
    fn non_hermitian_matrix_is_rejected() {
        let shape = TorusShape::of(&standard(2).unwrap());
        let re = Matrix::from_rows(vec![vec![q(0, 1), q(1, 1)], vec![q(0, 1), q(0, 1)]]).unwrap();
        assert_eq!(
            HarmonicDeformation::constant(&shape, re, Matrix::zeros(2, 2)).unwrap_err(),
            Error::NonRealInput
        );
    }
}
