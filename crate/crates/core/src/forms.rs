//! Differential forms with trigonometric-polynomial coefficients.
//!
//! Real coordinates are `x^0, ..., x^{m-1}` with complex coordinates
//! `z^α = x^{2α} + i x^{2α+1}`. The flat metric is Euclidean in the real
//! coordinates, so `g^{αβ̄} = 2δ_{αβ}` and the Kähler form is
//! `ω = (i/2) Σ dz^α ∧ dz̄^α = Σ dx^{2α} ∧ dx^{2α+1}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::fourier::{grad_inner, TorusShape, TrigPoly};
use crate::scalar::Real;
use crate::spectrum::EigenLevel;

/// A (1,1)-form `Σ η_{αβ̄} dz^α ∧ dz̄^β`.
#[derive(Clone, Debug)]
pub struct Form11<R: Real> {
    shape: Arc<TorusShape<R>>,
    n: usize,
    coeffs: Vec<TrigPoly<R>>,
}

impl<R: Real> Form11<R> {
    pub fn zero(shape: &Arc<TorusShape<R>>) -> Result<Self> {
        let n = shape.complex_dim()?;
        Ok(Form11 {
            shape: Arc::clone(shape),
            n,
            coeffs: vec![TrigPoly::zero(shape); n * n],
        })
    }

    /// Constant form from an `n × n` coefficient matrix (row `α`, column `β`).
    pub fn constant(shape: &Arc<TorusShape<R>>, matrix: &[Vec<R::Coeff>]) -> Result<Self> {
        let mut out = Self::zero(shape)?;
        if matrix.len() != out.n || matrix.iter().any(|row| row.len() != out.n) {
            return Err(Error::DimensionMismatch(format!(
                "(1,1)-form needs a {n}x{n} coefficient matrix",
                n = out.n
            )));
        }
        for (a, row) in matrix.iter().enumerate() {
            for (b, c) in row.iter().enumerate() {
                out.coeffs[a * out.n + b] = TrigPoly::constant(shape, c.clone());
            }
        }
        Ok(out)
    }

    /// The Kähler form, `ω_{αβ̄} = (i/2)δ_{αβ}`.
    pub fn omega(shape: &Arc<TorusShape<R>>) -> Result<Self> {
        let mut out = Self::zero(shape)?;
        let half_i = R::Coeff::i() * R::from_ratio(1, 2).to_coeff();
        for a in 0..out.n {
            out.coeffs[a * out.n + a] = TrigPoly::constant(shape, half_i.clone());
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &Arc<TorusShape<R>> {
        &self.shape
    }

    pub fn get(&self, alpha: usize, beta: usize) -> &TrigPoly<R> {
        &self.coeffs[alpha * self.n + beta]
    }

    fn zip_with<F: Fn(&TrigPoly<R>, &TrigPoly<R>) -> TrigPoly<R>>(&self, other: &Self, f: F) -> Self {
        Form11 {
            shape: Arc::clone(&self.shape),
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }

    fn map<F: Fn(&TrigPoly<R>) -> TrigPoly<R>>(&self, f: F) -> Self {
        Form11 {
            shape: Arc::clone(&self.shape),
            n: self.n,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n == other.n && *self.shape == *other.shape {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("(1,1)-forms on different tori".into()))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, c: &R::Coeff) -> Self {
        self.map(|p| p.scale(c))
    }

    /// `f · η`.
    pub fn mul_fn(&self, f: &TrigPoly<R>) -> Result<Self> {
        if **f.shape() != *self.shape {
            return Err(Error::DimensionMismatch("function and form on different tori".into()));
        }
        Ok(self.map(|p| p * f))
    }

    /// Mean value of every coefficient: the harmonic part on a flat torus.
    pub fn harmonic_project(&self) -> Self {
        self.map(|p| TrigPoly::constant(&self.shape, p.mean()))
    }

    /// The coefficient matrix when every entry is constant.
    pub fn constant_matrix(&self) -> Option<Vec<Vec<R::Coeff>>> {
        let zero = vec![R::zero(); self.shape.real_dim];
        let mut rows = Vec::with_capacity(self.n);
        for a in 0..self.n {
            let mut row = Vec::with_capacity(self.n);
            for b in 0..self.n {
                let p = self.get(a, b);
                if p.terms().any(|(u, _)| u != zero.as_slice()) {
                    return None;
                }
                row.push(p.mean());
            }
            rows.push(row);
        }
        Some(rows)
    }

    pub fn is_constant(&self) -> bool {
        self.constant_matrix().is_some()
    }

    /// Reality: `η_{βᾱ} = −conj(η_{αβ̄})`.
    pub fn is_real(&self) -> bool {
        (0..self.n).all(|a| {
            (0..self.n).all(|b| {
                let lhs = self.get(b, a);
                let rhs = -&self.get(a, b).conj();
                lhs.approx_eq(&rhs)
            })
        })
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.n == other.n && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a.approx_eq(b))
    }

    pub fn is_zero_approx(&self) -> bool {
        self.coeffs.iter().all(TrigPoly::is_zero_approx)
    }

    /// True when `self = c·ω` for some coefficient `c`; returns `c`.
    pub fn omega_multiple(&self) -> Option<R::Coeff> {
        let m = self.constant_matrix()?;
        let two_over_i = -(R::Coeff::from_i64(2) * R::Coeff::i());
        let c = m.first()?.first()?.clone() * two_over_i;
        let candidate = Form11::omega(&self.shape).ok()?.scale(&c);
        candidate.approx_eq(self).then_some(c)
    }

    /// Expansion in real coordinates, using
    /// `dz^a∧dz̄^b = dx_a∧dx_b − i dx_a∧dy_b + i dy_a∧dx_b + dy_a∧dy_b`.
    pub fn to_real_form(&self) -> RealForm<R> {
        let mut out = RealForm::zero(&self.shape, 2);
        let i = R::Coeff::i();
        for a in 0..self.n {
            for b in 0..self.n {
                let p = self.get(a, b);
                if p.is_zero() {
                    continue;
                }
                let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
                out.add_wedge2(xa, xb, &p.clone());
                out.add_wedge2(xa, yb, &p.scale(&-i.clone()));
                out.add_wedge2(ya, xb, &p.scale(&i));
                out.add_wedge2(ya, yb, &p.clone());
            }
        }
        out
    }
}

/// `dd^c f = 2i∂∂̄f`: the mode `e_u` contributes `−2π²i w̄^α w^β e_u`, where
/// `w^j = u^{2j} + i u^{2j+1}`.
pub fn ddc<R: Real>(f: &TrigPoly<R>) -> Result<Form11<R>> {
    let shape = f.shape();
    let mut out = Form11::zero(shape)?;
    let n = out.n;
    let i = R::Coeff::i();
    let factor = -(R::Coeff::from_i64(2) * R::Coeff::pi() * R::Coeff::pi() * i.clone());
    for (u, c) in f.terms() {
        let w: Vec<R::Coeff> = (0..n)
            .map(|j| u[2 * j].to_coeff() + i.clone() * u[2 * j + 1].to_coeff())
            .collect();
        for a in 0..n {
            for b in 0..n {
                let v = factor.clone() * w[a].conj() * w[b].clone() * c.clone();
                out.coeffs[a * n + b].add_term(u, v);
            }
        }
    }
    Ok(out)
}

/// Pointwise inner product `g(a, b) = 4 Σ a_{αβ̄} conj(b_{αβ̄})`.
pub fn form_inner<R: Real>(a: &Form11<R>, b: &Form11<R>) -> Result<TrigPoly<R>> {
    a.check(b)?;
    let four = R::Coeff::from_i64(4);
    let mut out = TrigPoly::zero(&a.shape);
    for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
        out = &out + &(x * &y.conj());
    }
    Ok(out.scale(&four))
}

pub fn harmonic_project<R: Real>(a: &Form11<R>) -> Form11<R> {
    a.harmonic_project()
}

/// A real-coordinate `p`-form `Σ_I f_I dx^I` over increasing multi-indices `I`.
#[derive(Clone, Debug)]
pub struct RealForm<R: Real> {
    shape: Arc<TorusShape<R>>,
    degree: usize,
    comps: BTreeMap<Vec<usize>, TrigPoly<R>>,
}

/// `dx^k ∧ dx^I` as `±dx^J`.
fn wedge_index(k: usize, idx: &[usize]) -> Option<(bool, Vec<usize>)> {
    match idx.binary_search(&k) {
        Ok(_) => None,
        Err(pos) => {
            let mut j = idx.to_vec();
            j.insert(pos, k);
            Some((pos % 2 == 0, j))
        }
    }
}

/// `ι_k dx^I` as `±dx^J`.
fn interior_index(k: usize, idx: &[usize]) -> Option<(bool, Vec<usize>)> {
    idx.binary_search(&k).ok().map(|pos| {
        let mut j = idx.to_vec();
        j.remove(pos);
        (pos % 2 == 0, j)
    })
}

/// `θ_k` with `d^c = Σ_k θ_k ∧ ∂_k`: `θ(dx^{2j}) = dx^{2j+1}`, `θ(dx^{2j+1}) = −dx^{2j}`.
fn theta(k: usize) -> (bool, usize) {
    if k % 2 == 0 {
        (true, k + 1)
    } else {
        (false, k - 1)
    }
}

impl<R: Real> RealForm<R> {
    pub fn zero(shape: &Arc<TorusShape<R>>, degree: usize) -> Self {
        RealForm {
            shape: Arc::clone(shape),
            degree,
            comps: BTreeMap::new(),
        }
    }

    pub fn function(f: &TrigPoly<R>) -> Self {
        let mut out = Self::zero(f.shape(), 0);
        out.add_component(Vec::new(), f);
        out
    }

    /// Builds a form from `(multi-index, coefficient)` pairs; indices need not
    /// be sorted and repeated indices vanish.
    pub fn from_components(
        shape: &Arc<TorusShape<R>>,
        degree: usize,
        comps: Vec<(Vec<usize>, TrigPoly<R>)>,
    ) -> Result<Self> {
        let mut out = Self::zero(shape, degree);
        for (idx, f) in comps {
            if idx.len() != degree || idx.iter().any(|&k| k >= shape.real_dim) {
                return Err(Error::DimensionMismatch(format!("bad multi-index {idx:?}")));
            }
            let mut acc: Option<(bool, Vec<usize>)> = Some((true, Vec::new()));
            for &k in idx.iter().rev() {
                acc = acc.and_then(|(s, j)| wedge_index(k, &j).map(|(t, j2)| (s == t, j2)));
            }
            if let Some((sign, j)) = acc {
                out.add_component(j, &if sign { f } else { -&f });
            }
        }
        Ok(out)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn component(&self, idx: &[usize]) -> TrigPoly<R> {
        self.comps.get(idx).cloned().unwrap_or_else(|| TrigPoly::zero(&self.shape))
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &TrigPoly<R>)> {
        self.comps.iter()
    }

    fn add_component(&mut self, idx: Vec<usize>, f: &TrigPoly<R>) {
        if f.is_zero() {
            return;
        }
        let sum = match self.comps.get(&idx) {
            Some(g) => g + f,
            None => f.clone(),
        };
        if sum.is_zero() {
            self.comps.remove(&idx);
        } else {
            self.comps.insert(idx, sum);
        }
    }

    fn add_signed(&mut self, sign: bool, idx: Vec<usize>, f: &TrigPoly<R>) {
        if sign {
            self.add_component(idx, f);
        } else {
            self.add_component(idx, &-f);
        }
    }

    fn add_wedge2(&mut self, i: usize, j: usize, f: &TrigPoly<R>) {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.add_component(vec![i, j], f),
            std::cmp::Ordering::Greater => self.add_component(vec![j, i], &-f),
            std::cmp::Ordering::Equal => {}
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (idx, f) in &other.comps {
            out.add_component(idx.clone(), f);
        }
        out
    }

    pub fn scale(&self, c: &R::Coeff) -> Self {
        let mut out = Self::zero(&self.shape, self.degree);
        for (idx, f) in &self.comps {
            out.add_component(idx.clone(), &f.scale(c));
        }
        out
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        if self.degree != other.degree {
            return false;
        }
        let keys: std::collections::BTreeSet<&Vec<usize>> = self.comps.keys().chain(other.comps.keys()).collect();
        keys.into_iter().all(|k| self.component(k).approx_eq(&other.component(k)))
    }

    pub fn is_zero_approx(&self) -> bool {
        self.comps.values().all(TrigPoly::is_zero_approx)
    }

    /// Pointwise `Σ_I a_I conj(b_I)`.
    pub fn pointwise_inner(&self, other: &Self) -> TrigPoly<R> {
        let mut out = TrigPoly::zero(&self.shape);
        for (idx, f) in &self.comps {
            if let Some(g) = other.comps.get(idx) {
                out = &out + &(f * &g.conj());
            }
        }
        out
    }

    /// L² inner product `∫ Σ_I a_I conj(b_I) dμ`.
    pub fn l2_inner(&self, other: &Self) -> R::Coeff {
        self.pointwise_inner(other).integrate()
    }

    /// Exterior derivative, for degrees 0 through 3.
    pub fn d(&self) -> Result<Self> {
        if self.degree > 3 {
            return Err(Error::UnsupportedDegree(self.degree));
        }
        let mut out = Self::zero(&self.shape, self.degree + 1);
        for (idx, f) in &self.comps {
            for k in 0..self.shape.real_dim {
                if let Some((sign, j)) = wedge_index(k, idx) {
                    out.add_signed(sign, j, &f.partial(k));
                }
            }
        }
        Ok(out)
    }

    /// `d^c = Σ_k θ_k ∧ ∂_k`, for degrees 0 through 3.
    pub fn dc(&self) -> Result<Self> {
        if self.degree > 3 {
            return Err(Error::UnsupportedDegree(self.degree));
        }
        self.shape.complex_dim()?;
        let mut out = Self::zero(&self.shape, self.degree + 1);
        for (idx, f) in &self.comps {
            for k in 0..self.shape.real_dim {
                let (s, t) = theta(k);
                if let Some((sign, j)) = wedge_index(t, idx) {
                    out.add_signed(s == sign, j, &f.partial(k));
                }
            }
        }
        Ok(out)
    }

    /// `δ = −Σ_k ι_k ∂_k`, the L²-adjoint of `d`, for degrees 1 through 4.
    pub fn delta(&self) -> Result<Self> {
        if !(1..=4).contains(&self.degree) {
            return Err(Error::UnsupportedDegree(self.degree));
        }
        let mut out = Self::zero(&self.shape, self.degree - 1);
        for (idx, f) in &self.comps {
            for k in 0..self.shape.real_dim {
                if let Some((sign, j)) = interior_index(k, idx) {
                    out.add_signed(!sign, j, &f.partial(k));
                }
            }
        }
        Ok(out)
    }

    /// `δ^c = −Σ_k ι(θ_k) ∂_k`, the L²-adjoint of `d^c`, for degrees 1 through 4.
    pub fn delta_c(&self) -> Result<Self> {
        if !(1..=4).contains(&self.degree) {
            return Err(Error::UnsupportedDegree(self.degree));
        }
        self.shape.complex_dim()?;
        let mut out = Self::zero(&self.shape, self.degree - 1);
        for (idx, f) in &self.comps {
            for k in 0..self.shape.real_dim {
                let (s, t) = theta(k);
                if let Some((sign, j)) = interior_index(t, idx) {
                    out.add_signed(s != sign, j, &f.partial(k));
                }
            }
        }
        Ok(out)
    }
}

/// `L(f) = δ^c δ (f dd^c f)`.
pub fn l_op<R: Real>(f: &TrigPoly<R>) -> Result<TrigPoly<R>> {
    let beta = ddc(f)?.mul_fn(f)?.to_real_form();
    let out = beta.delta()?.delta_c()?;
    Ok(out.component(&[]))
}

/// `λ²f² − 2λ|∇f|² + |dd^c f|²` for a λ-eigenfunction `f`.
pub fn l_rhs<R: Real>(f: &TrigPoly<R>, lambda: &R::Coeff) -> Result<TrigPoly<R>> {
    if !f.laplacian().approx_eq(&f.scale(lambda)) {
        return Err(Error::NotAnEigenfunction);
    }
    let h = ddc(f)?;
    let f2 = f * f;
    let grad = grad_inner(f, f)?;
    let two_lambda = R::Coeff::from_i64(2) * lambda.clone();
    let out = &(&f2.scale(&(lambda.clone() * lambda.clone())) - &grad.scale(&two_lambda)) + &form_inner(&h, &h)?;
    Ok(out)
}

/// `Q_α(f) = ∫ g(f dd^c f, α) dμ`.
pub fn q_alpha<R: Real>(f: &TrigPoly<R>, alpha: &Form11<R>) -> Result<R::Coeff> {
    q_alpha_pair(f, f, alpha)
}

/// Polarization `½ ∫ g(f dd^c h + h dd^c f, α) dμ` of [`q_alpha`].
pub fn q_alpha_pair<R: Real>(f: &TrigPoly<R>, h: &TrigPoly<R>, alpha: &Form11<R>) -> Result<R::Coeff> {
    if !f.is_real() || !h.is_real() || !alpha.is_real() {
        return Err(Error::NonRealInput);
    }
    let a = ddc(h)?.mul_fn(f)?;
    let b = ddc(f)?.mul_fn(h)?;
    let sum = a.add(&b)?;
    let half = R::from_ratio(1, 2).to_coeff();
    Ok(form_inner(&sum, alpha)?.integrate() * half)
}

/// L²-orthonormal basis `φ_ν, ψ_ν` of one eigenspace, with
/// `φ_w = √(2/V) cos 2π⟨u,x⟩` and `ψ_w = √(2/V) sin 2π⟨u,x⟩`.
#[derive(Clone, Debug)]
pub struct EigenfunctionBasis<R: Real> {
    pub level: EigenLevel<R>,
    pub lambda: R::Coeff,
    /// `φ_1, ψ_1, φ_2, ψ_2, ...`
    pub functions: Vec<TrigPoly<R>>,
}

impl<R: Real> EigenfunctionBasis<R> {
    pub fn new(level: &EigenLevel<R>, shape: &Arc<TorusShape<R>>) -> Result<Self> {
        let norm = (R::from_i64(2) / shape.volume.clone()).sqrt_coeff()?;
        let mut functions = Vec::with_capacity(level.multiplicity());
        for u in &level.reps {
            functions.push(TrigPoly::cos(shape, u).scale(&norm));
            functions.push(TrigPoly::sin(shape, u).scale(&norm));
        }
        Ok(EigenfunctionBasis {
            level: level.clone(),
            lambda: level.lambda_coeff(),
            functions,
        })
    }

    pub fn phi(&self, nu: usize) -> &TrigPoly<R> {
        &self.functions[2 * nu]
    }

    pub fn psi(&self, nu: usize) -> &TrigPoly<R> {
        &self.functions[2 * nu + 1]
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// `Σ_i c_i f_i`.
    pub fn combination(&self, coeffs: &[R]) -> TrigPoly<R> {
        let shape = self.functions[0].shape();
        let mut out = TrigPoly::zero(shape);
        for (c, f) in coeffs.iter().zip(&self.functions) {
            out = &out + &f.scale(&c.to_coeff());
        }
        out
    }
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
    fn omega_norm_is_dimension() {
        for n in 1..=3 {
            let s = shape(2 * n);
            let w = Form11::omega(&s).unwrap();
            let norm = form_inner(&w, &w).unwrap();
            assert_eq!(norm, TrigPoly::constant(&s, Symbolic::from_i64(n as i64)));
            let real = w.to_real_form();
            assert_eq!(real.pointwise_inner(&real), norm);
        }
    }

    #[test]
    fn ddc_matches_d_of_dc() {
        let s = shape(4);
        let f = &TrigPoly::cos(&s, &[q(1, 1), q(1, 2), q(0, 1), q(2, 1)])
            + &TrigPoly::sin(&s, &[q(0, 1), q(1, 1), q(1, 3), q(0, 1)]);
        let via_real = RealForm::function(&f).dc().unwrap().d().unwrap();
        assert!(via_real.approx_eq(&ddc(&f).unwrap().to_real_form()));
    }

    #[test]
    fn omega_pairs_with_ddc_to_minus_laplacian() {
        let s = shape(4);
        let f = TrigPoly::cos(&s, &[q(1, 1), q(1, 2), q(0, 1), q(2, 1)]);
        let w = Form11::omega(&s).unwrap();
        assert_eq!(form_inner(&ddc(&f).unwrap(), &w).unwrap(), -&f.laplacian());
    }

    #[test]
    fn ddc_is_real_and_harmonic_part_vanishes() {
        let s = shape(4);
        let f = TrigPoly::sin(&s, &[q(1, 1), q(0, 1), q(1, 1), q(0, 1)]);
        let h = ddc(&f).unwrap();
        assert!(h.is_real());
        assert!(h.harmonic_project().is_zero_approx());
    }

    #[test]
    fn multi_index_signs() {
        assert_eq!(wedge_index(1, &[0, 2]), Some((false, vec![0, 1, 2])));
        assert_eq!(wedge_index(0, &[1, 2]), Some((true, vec![0, 1, 2])));
        assert_eq!(wedge_index(2, &[2]), None);
        assert_eq!(interior_index(2, &[0, 2]), Some((false, vec![0])));
        let s = shape(4);
        let one = TrigPoly::constant(&s, Symbolic::one());
        let a = RealForm::from_components(&s, 2, vec![(vec![1, 0], one.clone())]).unwrap();
        assert_eq!(a.component(&[0, 1]), -&one);
    }

    #[test]
    fn degree_limits() {
        let s = shape(6);
        let one = TrigPoly::constant(&s, Symbolic::one());
        let f = RealForm::function(&one);
        assert_eq!(f.delta().unwrap_err(), Error::UnsupportedDegree(0));
        let top = RealForm::from_components(&s, 4, vec![(vec![0, 1, 2, 3], one.clone())]).unwrap();
        assert_eq!(top.d().unwrap_err(), Error::UnsupportedDegree(4));
        assert!(top.delta().unwrap().is_zero_approx());
    }

    #[test]
    fn l_rhs_rejects_non_eigenfunctions() {
        let s = shape(2);
        let f = &TrigPoly::cos(&s, &[q(1, 1), q(0, 1)]) + &TrigPoly::cos(&s, &[q(1, 1), q(1, 1)]);
        let lam = Symbolic::from_i64(4) * Symbolic::pi_pow(2);
        assert_eq!(l_rhs(&f, &lam).unwrap_err(), Error::NotAnEigenfunction);
    }

    #[test]
    fn q_alpha_rejects_complex_functions() {
        let s = shape(2);
        let e = TrigPoly::mode(&s, &[q(1, 1), q(0, 1)], Symbolic::one());
        let w = Form11::omega(&s).unwrap();
        assert_eq!(q_alpha(&e, &w).unwrap_err(), Error::NonRealInput);
    }

    fn sample_basis() -> EigenfunctionBasis<Rational> {
        let s = TorusShape::new(4, q(2, 1), 0.0);
        let level = EigenLevel {
            squared_norm: q(1, 1),
            reps: vec![vec![q(1, 2), q(1, 2), q(1, 2), q(1, 2)], vec![q(1, 1), q(0, 1), q(0, 1), q(0, 1)]],
            coords: vec![vec![0; 4], vec![0; 4]],
        };
        EigenfunctionBasis::new(&level, &s).unwrap()
    }

    #[test]
    fn l_operator_matches_closed_form() {
        let basis = sample_basis();
        let lam = basis.lambda.clone();
        for f in &basis.functions {
            assert_eq!(l_op(f).unwrap(), l_rhs(f, &lam).unwrap());
        }
        let sum = &l_op(basis.phi(0)).unwrap() + &l_op(basis.psi(0)).unwrap();
        assert!(sum.is_zero());
        let mixed = basis.combination(&[q(1, 1), q(-2, 3), q(1, 5), q(0, 1)]);
        assert_eq!(l_op(&mixed).unwrap(), l_rhs(&mixed, &lam).unwrap());
    }

    #[test]
    fn basis_is_orthonormal() {
        let basis = sample_basis();
        for (i, f) in basis.functions.iter().enumerate() {
            for (j, g) in basis.functions.iter().enumerate() {
                let expected = if i == j { Symbolic::one() } else { Symbolic::zero() };
                assert_eq!((f * g).integrate(), expected);
            }
        }
    }
}
