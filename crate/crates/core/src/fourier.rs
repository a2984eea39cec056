//! Trigonometric polynomials on a flat torus `R^m / Γ`.
//!
//! A [`TrigPoly`] is a finite sum `Σ c_u e^{2πi⟨u,x⟩}` with frequencies `u` in
//! the dual lattice. Coefficients live in the exact ring [`Symbolic`] for
//! rational lattices and in `Complex64` for float lattices.
//!
//! [`Symbolic`]: crate::coeff::Symbolic

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;
use crate::scalar::{dot, Real};

/// Real dimension, volume and comparison tolerance shared by all functions
/// on one torus.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusShape<R> {
    pub real_dim: usize,
    pub volume: R,
    pub tol: f64,
}

impl<R: Real> TorusShape<R> {
    pub fn new(real_dim: usize, volume: R, tol: f64) -> Arc<Self> {
        Arc::new(TorusShape { real_dim, volume, tol })
    }

    pub fn of(lattice: &LatticeBasis<R>) -> Arc<Self> {
        Self::new(lattice.real_dim(), lattice.volume(), lattice.tol())
    }

    pub fn complex_dim(&self) -> Result<usize> {
        if self.real_dim % 2 == 1 {
            Err(Error::OddDimension(self.real_dim))
        } else {
            Ok(self.real_dim / 2)
        }
    }
}

#[derive(Clone, PartialEq)]
struct Term<R: Real> {
    freq: Vec<R>,
    coeff: R::Coeff,
}

/// Finite Fourier sum `Σ c_u e^{2πi⟨u,x⟩}`; zero coefficients are never stored.
#[derive(Clone)]
pub struct TrigPoly<R: Real> {
    shape: Arc<TorusShape<R>>,
    terms: BTreeMap<Vec<R::Key>, Term<R>>,
}

fn freq_key<R: Real>(u: &[R]) -> Vec<R::Key> {
    u.iter().map(Real::key).collect()
}

impl<R: Real> TrigPoly<R> {
    pub fn zero(shape: &Arc<TorusShape<R>>) -> Self {
        TrigPoly {
            shape: Arc::clone(shape),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(shape: &Arc<TorusShape<R>>, c: R::Coeff) -> Self {
        let zero = vec![R::zero(); shape.real_dim];
        Self::mode(shape, &zero, c)
    }

    /// `c · e^{2πi⟨u,x⟩}`.
    pub fn mode(shape: &Arc<TorusShape<R>>, u: &[R], c: R::Coeff) -> Self {
        assert_eq!(u.len(), shape.real_dim, "frequency dimension mismatch");
        let mut p = Self::zero(shape);
        p.add_term(u, c);
        p
    }

    /// `cos(2π⟨u,x⟩) = ½(e_u + e_{−u})`.
    pub fn cos(shape: &Arc<TorusShape<R>>, u: &[R]) -> Self {
        let half = R::from_ratio(1, 2).to_coeff();
        let neg: Vec<R> = u.iter().map(|x| -x.clone()).collect();
        let mut p = Self::mode(shape, u, half.clone());
        p.add_term(&neg, half);
        p
    }

    /// `sin(2π⟨u,x⟩) = (e_u − e_{−u}) / 2i`.
    pub fn sin(shape: &Arc<TorusShape<R>>, u: &[R]) -> Self {
        // 1/(2i) = −i/2
        let c = -(R::Coeff::i() * R::from_ratio(1, 2).to_coeff());
        let neg: Vec<R> = u.iter().map(|x| -x.clone()).collect();
        let mut p = Self::mode(shape, u, c.clone());
        p.add_term(&neg, -c);
        p
    }

    pub fn shape(&self) -> &Arc<TorusShape<R>> {
        &self.shape
    }

    pub fn real_dim(&self) -> usize {
        self.shape.real_dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(frequency, coefficient)` pairs in canonical key order.
    pub fn terms(&self) -> impl Iterator<Item = (&[R], &R::Coeff)> {
        self.terms.values().map(|t| (t.freq.as_slice(), &t.coeff))
    }

    pub fn coefficient(&self, u: &[R]) -> R::Coeff {
        self.terms
            .get(&freq_key(u))
            .map_or_else(R::Coeff::zero, |t| t.coeff.clone())
    }

    /// The zero-frequency coefficient, i.e. the mean value.
    pub fn mean(&self) -> R::Coeff {
        self.coefficient(&vec![R::zero(); self.real_dim()])
    }

    pub(crate) fn add_term(&mut self, u: &[R], c: R::Coeff) {
        if c.is_zero_tol(0.0) {
            return;
        }
        let key = freq_key(u);
        match self.terms.get_mut(&key) {
            Some(t) => {
                let sum = t.coeff.clone() + c;
                if sum.is_zero_tol(0.0) {
                    self.terms.remove(&key);
                } else {
                    t.coeff = sum;
                }
            }
            None => {
                self.terms.insert(
                    key,
                    Term {
                        freq: u.to_vec(),
                        coeff: c,
                    },
                );
            }
        }
    }

    fn same_shape(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.shape, &other.shape) || *self.shape == *other.shape
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "trigonometric polynomials on different tori (dimensions {} and {})",
                self.real_dim(),
                other.real_dim()
            )))
        }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &R::Coeff) -> Self {
        self.map_modes(|_, coeff| coeff.clone() * c.clone())
    }

    /// Replaces each coefficient `c_u` by `f(u, c_u)`.
    pub fn map_modes<F: Fn(&[R], &R::Coeff) -> R::Coeff>(&self, f: F) -> Self {
        let mut out = Self::zero(&self.shape);
        for t in self.terms.values() {
            out.add_term(&t.freq, f(&t.freq, &t.coeff));
        }
        out
    }

    /// Complex conjugate: `c_u e_u ↦ conj(c_u) e_{−u}`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(&self.shape);
        for t in self.terms.values() {
            let neg: Vec<R> = t.freq.iter().map(|x| -x.clone()).collect();
            out.add_term(&neg, t.coeff.conj());
        }
        out
    }

    /// True when `c_{−u} = conj(c_u)` for all `u`.
    pub fn is_real(&self) -> bool {
        self.approx_eq(&self.conj())
    }

    /// Exact equality for exact lattices; tolerance relative to the largest
    /// coefficient otherwise.
    pub fn approx_eq(&self, other: &Self) -> bool {
        if !self.same_shape(other) {
            return false;
        }
        if R::EXACT {
            return self.terms.len() == other.terms.len()
                && self
                    .terms
                    .iter()
                    .zip(&other.terms)
                    .all(|((ka, a), (kb, b))| ka == kb && a.coeff == b.coeff);
        }
        let scale = self.max_magnitude().max(other.max_magnitude()).max(1.0);
        let diff = self - other;
        diff.max_magnitude() <= self.shape.tol * scale
    }

    pub fn is_zero_approx(&self) -> bool {
        if R::EXACT {
            self.is_zero()
        } else {
            self.max_magnitude() <= self.shape.tol
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.terms
            .values()
            .map(|t| t.coeff.magnitude())
            .fold(0.0, f64::max)
    }

    /// `∫_T f dμ = Vol · c_0`.
    pub fn integrate(&self) -> R::Coeff {
        self.shape.volume.to_coeff() * self.mean()
    }

    /// Δ multiplies `e_u` by `4π²|u|²`.
    pub fn laplacian(&self) -> Self {
        let four_pi_sq = R::Coeff::from_i64(4) * R::Coeff::pi() * R::Coeff::pi();
        self.map_modes(|u, c| c.clone() * four_pi_sq.clone() * dot(u, u).to_coeff())
    }

    /// `∂/∂x^k` multiplies `e_u` by `2πi·u_k`.
    pub fn partial(&self, k: usize) -> Self {
        let two_pi_i = R::Coeff::from_i64(2) * R::Coeff::pi() * R::Coeff::i();
        self.map_modes(|u, c| c.clone() * two_pi_i.clone() * u[k].to_coeff())
    }

    /// Pointwise value at real coordinates `x`.
    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.terms
            .values()
            .map(|t| {
                let phase: f64 = t.freq.iter().zip(x).map(|(u, xi)| u.to_f64() * xi).sum();
                t.coeff.to_complex() * Complex64::from_polar(1.0, two_pi * phase)
            })
            .sum()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(self * other)
    }
}

impl<R: Real> PartialEq for TrigPoly<R> {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

impl<R: Real> fmt::Debug for TrigPoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .values()
            .map(|t| {
                let u: Vec<String> = t.freq.iter().map(ToString::to_string).collect();
                format!("({}) e[{}]", t.coeff, u.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

// Binary operators assume both operands live on the same torus; the
// `checked_*` methods and the free functions validate that first.

impl<R: Real> Add for &TrigPoly<R> {
    type Output = TrigPoly<R>;
    fn add(self, rhs: &TrigPoly<R>) -> TrigPoly<R> {
        debug_assert!(self.same_shape(rhs));
        let mut out = self.clone();
        for t in rhs.terms.values() {
            out.add_term(&t.freq, t.coeff.clone());
        }
        out
    }
}

impl<R: Real> Sub for &TrigPoly<R> {
    type Output = TrigPoly<R>;
    fn sub(self, rhs: &TrigPoly<R>) -> TrigPoly<R> {
        debug_assert!(self.same_shape(rhs));
        let mut out = self.clone();
        for t in rhs.terms.values() {
            out.add_term(&t.freq, -t.coeff.clone());
        }
        out
    }
}

impl<R: Real> Neg for &TrigPoly<R> {
    type Output = TrigPoly<R>;
    fn neg(self) -> TrigPoly<R> {
        self.map_modes(|_, c| -c.clone())
    }
}

impl<R: Real> Mul for &TrigPoly<R> {
    type Output = TrigPoly<R>;
    fn mul(self, rhs: &TrigPoly<R>) -> TrigPoly<R> {
        debug_assert!(self.same_shape(rhs));
        let mut out = TrigPoly::zero(&self.shape);
        for a in self.terms.values() {
            for b in rhs.terms.values() {
                let u: Vec<R> = a.freq.iter().zip(&b.freq).map(|(x, y)| x.clone() + y.clone()).collect();
                out.add_term(&u, a.coeff.clone() * b.coeff.clone());
            }
        }
        out
    }
}

/// Pointwise product; frequencies add.
pub fn trig_mul<R: Real>(f: &TrigPoly<R>, g: &TrigPoly<R>) -> Result<TrigPoly<R>> {
    f.checked_mul(g)
}

pub fn trig_integrate<R: Real>(f: &TrigPoly<R>) -> R::Coeff {
    f.integrate()
}

pub fn laplacian<R: Real>(f: &TrigPoly<R>) -> TrigPoly<R> {
    f.laplacian()
}

/// `∇f · ∇g` (bilinear): modes `u`, `v` contribute `−4π²⟨u,v⟩ f_u g_v` at `u + v`.
pub fn grad_inner<R: Real>(f: &TrigPoly<R>, g: &TrigPoly<R>) -> Result<TrigPoly<R>> {
    f.check_shape(g)?;
    let minus_four_pi_sq = -(R::Coeff::from_i64(4) * R::Coeff::pi() * R::Coeff::pi());
    let mut out = TrigPoly::zero(&f.shape);
    for a in f.terms.values() {
        for b in g.terms.values() {
            let uv = dot(&a.freq, &b.freq);
            if uv.is_zero() {
                continue;
            }
            let w: Vec<R> = a.freq.iter().zip(&b.freq).map(|(x, y)| x.clone() + y.clone()).collect();
            out.add_term(
                &w,
                minus_four_pi_sq.clone() * uv.to_coeff() * a.coeff.clone() * b.coeff.clone(),
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Symbolic;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn shape(dim: usize) -> Arc<TorusShape<Rational>> {
        TorusShape::new(dim, q(1, 1), 0.0)
    }

    #[test]
    fn modes_cancel_to_canonical_zero() {
        let s = shape(2);
        let u = [q(1, 1), q(0, 1)];
        let f = TrigPoly::mode(&s, &u, Symbolic::from_i64(3));
        let g = &f - &f;
        assert!(g.is_zero());
        assert_eq!(g.len(), 0);
    }

    #[test]
    fn cos_squared_is_half_plus_half_cos() {
        let s = shape(2);
        let u = [q(1, 1), q(2, 1)];
        let c = TrigPoly::cos(&s, &u);
        let sq = &c * &c;
        assert_eq!(sq.mean(), Symbolic::from_rational(q(1, 2)));
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.integrate(), Symbolic::from_rational(q(1, 2)));
        let sn = TrigPoly::sin(&s, &u);
        let cs = &c * &sn;
        assert!(cs.mean().is_zero());
    }

    #[test]
    fn conj_and_reality() {
        let s = shape(2);
        let u = [q(1, 2), q(1, 3)];
        assert!(TrigPoly::cos(&s, &u).is_real());
        assert!(TrigPoly::sin(&s, &u).is_real());
        let e = TrigPoly::mode(&s, &u, Symbolic::one());
        assert!(!e.is_real());
    }

    #[test]
    fn laplacian_of_mode() {
        let s = shape(2);
        let u = [q(1, 1), q(1, 1)];
        let f = TrigPoly::cos(&s, &u);
        let lam = Symbolic::from_i64(8) * Symbolic::pi_pow(2);
        assert_eq!(f.laplacian(), f.scale(&lam));
        assert!(TrigPoly::constant(&s, Symbolic::one()).laplacian().is_zero());
    }

    #[test]
    fn gradient_of_cos_is_sin_squared() {
        let s = shape(2);
        let u = [q(1, 1), q(0, 1)];
        let c = TrigPoly::cos(&s, &u);
        let sn = TrigPoly::sin(&s, &u);
        let lam = Symbolic::from_i64(4) * Symbolic::pi_pow(2);
        assert_eq!(grad_inner(&c, &c).unwrap(), (&sn * &sn).scale(&lam));
    }

    #[test]
    fn evaluation_matches_cosine() {
        let s = TorusShape::new(2, 1.0f64, 1e-9);
        let u = [1.0, 2.0];
        let c = TrigPoly::cos(&s, &u);
        let x = [0.1, 0.3];
        let v = c.evaluate(&x);
        let expected = (2.0 * std::f64::consts::PI * (0.1 + 0.6)).cos();
        assert!((v.re - expected).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn mismatched_tori_are_rejected() {
        let a = TrigPoly::constant(&shape(2), Symbolic::one());
        let b = TrigPoly::constant(&shape(4), Symbolic::one());
        assert!(matches!(trig_mul(&a, &b), Err(Error::DimensionMismatch(_))));
    }
}
