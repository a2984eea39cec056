//! Lattices in `C^n ≅ R^{2n}` and their duals.
//!
//! Real coordinates are ordered `x^1, ..., x^{2n}` with `z^j = x^{2j-1} + i x^{2j}`.
//! A basis is stored column-wise: column `j` holds the real coordinates of the
//! lattice generator `γ_j`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{Mode, Real};

/// Basis of a full-rank lattice, columns are generators.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis<R> {
    basis: Matrix<R>,
    tol: f64,
}

impl<R: Real> LatticeBasis<R> {
    /// Validates a square, nonsingular basis. Odd real dimensions are accepted
    /// (real tori), but every complex-geometric operation rejects them.
    pub fn new(basis: Matrix<R>, tol: f64) -> Result<Self> {
        if basis.rows() != basis.cols() || basis.rows() == 0 {
            return Err(Error::BadShape {
                expected: basis.rows().max(1),
                rows: basis.rows(),
                cols: basis.cols(),
            });
        }
        let lattice = LatticeBasis { basis, tol };
        if lattice.is_singular() {
            return Err(Error::SingularBasis);
        }
        Ok(lattice)
    }

    pub fn from_columns(cols: &[Vec<R>], tol: f64) -> Result<Self> {
        Self::new(Matrix::from_columns(cols)?, tol)
    }

    /// Basis given by `2n` complex generators, each a list of `n` complex numbers.
    pub fn from_complex_columns(cols: &[Vec<Complex<R>>], tol: f64) -> Result<Self> {
        let real: Vec<Vec<R>> = cols
            .iter()
            .map(|c| ComplexVector::new(c.clone()).realify())
            .collect();
        Self::new(Matrix::from_columns(&real)?, tol)
    }

    fn is_singular(&self) -> bool {
        let det = self.basis.determinant();
        if R::EXACT {
            det.is_zero()
        } else {
            let col_scale: f64 = self
                .basis
                .columns()
                .iter()
                .map(|c| c.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt())
                .product();
            det.to_f64().abs() <= self.tol * col_scale.max(f64::MIN_POSITIVE)
        }
    }

    pub fn identity(real_dim: usize, tol: f64) -> Self {
        LatticeBasis {
            basis: Matrix::identity(real_dim),
            tol,
        }
    }

    pub fn matrix(&self) -> &Matrix<R> {
        &self.basis
    }

    pub fn real_dim(&self) -> usize {
        self.basis.rows()
    }

    /// Complex dimension `n`; fails for odd real dimension.
    pub fn complex_dim(&self) -> Result<usize> {
        let d = self.real_dim();
        if d % 2 == 1 {
            Err(Error::OddDimension(d))
        } else {
            Ok(d / 2)
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn mode(&self) -> Mode {
        R::mode(self.tol)
    }

    pub fn generators(&self) -> Vec<Vec<R>> {
        self.basis.columns()
    }

    /// Covolume `|det B|`, the volume of the torus.
    pub fn volume(&self) -> R {
        self.basis.determinant().abs()
    }

    /// Scales every generator by `s`.
    pub fn scaled(&self, s: &R) -> Result<Self> {
        Self::new(self.basis.scale(s), self.tol)
    }

    pub fn to_float(&self, tol: f64) -> LatticeBasis<f64> {
        LatticeBasis {
            basis: self.basis.to_f64(),
            tol,
        }
    }
}

/// Block-diagonal direct sum of two lattices.
pub fn product_lattice<R: Real>(a: &LatticeBasis<R>, b: &LatticeBasis<R>) -> Result<LatticeBasis<R>> {
    if a.mode() != b.mode() {
        return Err(Error::ModeMismatch);
    }
    LatticeBasis::new(a.basis.direct_sum(&b.basis), a.tol)
}

/// Complex view of a vector of `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector<R> {
    pub components: Vec<Complex<R>>,
}

impl<R: Real> ComplexVector<R> {
    pub fn new(components: Vec<Complex<R>>) -> Self {
        ComplexVector { components }
    }

    /// `w^j = u^{2j-1} + i u^{2j}`; `None` for odd length.
    pub fn complexify(real: &[R]) -> Option<Self> {
        if real.len() % 2 == 1 {
            return None;
        }
        Some(ComplexVector {
            components: real
                .chunks(2)
                .map(|p| Complex::new(p[0].clone(), p[1].clone()))
                .collect(),
        })
    }

    pub fn realify(&self) -> Vec<R> {
        self.components
            .iter()
            .flat_map(|c| [c.re.clone(), c.im.clone()])
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// `|w^α|²`.
    pub fn abs_sq(&self, alpha: usize) -> R {
        let c = &self.components[alpha];
        c.re.clone() * c.re.clone() + c.im.clone() * c.im.clone()
    }

    /// `conj(w^α) · w^β` as `(re, im)`.
    pub fn conj_product(&self, alpha: usize, beta: usize) -> (R, R) {
        let a = &self.components[alpha];
        let b = &self.components[beta];
        // (a.re - i a.im)(b.re + i b.im)
        (
            a.re.clone() * b.re.clone() + a.im.clone() * b.im.clone(),
            a.re.clone() * b.im.clone() - a.im.clone() * b.re.clone(),
        )
    }
}

/// Dual lattice `Γ* = {w : Re(v · w̄) ∈ Z for all v ∈ Γ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualLattice<R> {
    primal: LatticeBasis<R>,
    basis: Matrix<R>,
}

impl<R: Real> DualLattice<R> {
    pub fn primal(&self) -> &LatticeBasis<R> {
        &self.primal
    }

    /// Dual basis, columns are generators.
    pub fn matrix(&self) -> &Matrix<R> {
        &self.basis
    }

    pub fn generators(&self) -> Vec<Vec<R>> {
        self.basis.columns()
    }

    pub fn real_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn tol(&self) -> f64 {
        self.primal.tol
    }

    /// The dual basis as a lattice in its own right.
    pub fn as_lattice(&self) -> LatticeBasis<R> {
        LatticeBasis {
            basis: self.basis.clone(),
            tol: self.primal.tol,
        }
    }
}

/// Inverse-transpose of the primal basis.
pub fn dual_basis<R: Real>(primal: &LatticeBasis<R>) -> Result<DualLattice<R>> {
    let inv = primal.basis.inverse(primal.tol).ok_or(Error::SingularBasis)?;
    Ok(DualLattice {
        primal: primal.clone(),
        basis: inv.transpose(),
    })
}

/// Gram matrix `DᵀD` of the dual basis.
pub fn gram_matrix<R: Real>(dual: &DualLattice<R>) -> Matrix<R> {
    &dual.basis.transpose() * &dual.basis
}

/// Half-sum pairing `½(v·w̄ + v̄·w)`, which equals the real dot product.
pub fn pairing<R: Real>(v: &[R], w: &[R]) -> R {
    crate::scalar::dot(v, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::{One, Zero};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn c(re: Rational, im: Rational) -> Complex<Rational> {
        Complex::new(re, im)
    }

    fn gamma_ab(a: Rational, b: Rational) -> LatticeBasis<Rational> {
        let z = Rational::zero;
        let o = Rational::one;
        LatticeBasis::from_complex_columns(
            &[
                vec![c(o(), z()), c(z(), z())],
                vec![c(z(), o() / a.clone()), c(z(), z())],
                vec![c(z(), z()), c(o(), z())],
                vec![c(z(), z()), c(z(), o() / b.clone())],
            ],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn identity_is_self_dual() {
        let b = LatticeBasis::<Rational>::identity(4, 0.0);
        let d = dual_basis(&b).unwrap();
        assert_eq!(d.matrix(), &Matrix::identity(4));
        assert_eq!(gram_matrix(&d), Matrix::identity(4));
    }

    #[test]
    fn gamma_ab_dual_and_gram() {
        let (a, b) = (q(2, 1), q(3, 1));
        let lat = gamma_ab(a.clone(), b.clone());
        let dual = dual_basis(&lat).unwrap();
        // (1,0), (ai,0), (0,1), (0,bi)
        let expected = Matrix::from_columns(&[
            vec![q(1, 1), q(0, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), a.clone(), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(0, 1), b.clone()],
        ])
        .unwrap();
        assert_eq!(dual.matrix(), &expected);
        let g = gram_matrix(&dual);
        let mut diag = Matrix::zeros(4, 4);
        diag[(0, 0)] = q(1, 1);
        diag[(1, 1)] = a.clone() * a;
        diag[(2, 2)] = q(1, 1);
        diag[(3, 3)] = b.clone() * b;
        assert_eq!(g, diag);
    }

    #[test]
    fn dual_transpose_times_primal_is_identity() {
        let lat = LatticeBasis::from_columns(
            &[
                vec![q(2, 1), q(1, 3), q(0, 1), q(0, 1)],
                vec![q(0, 1), q(1, 1), q(1, 2), q(0, 1)],
                vec![q(1, 1), q(0, 1), q(3, 1), q(1, 5)],
                vec![q(0, 1), q(0, 1), q(-1, 1), q(1, 1)],
            ],
            0.0,
        )
        .unwrap();
        let dual = dual_basis(&lat).unwrap();
        assert_eq!(&dual.matrix().transpose() * lat.matrix(), Matrix::identity(4));
        for d in dual.generators() {
            for g in lat.generators() {
                assert!(pairing(&g, &d).is_integer());
            }
        }
    }

    #[test]
    fn singular_basis_rejected() {
        let err = LatticeBasis::from_columns(&[vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]], 0.0)
            .unwrap_err();
        assert_eq!(err, Error::SingularBasis);
        let err = LatticeBasis::from_columns(&[vec![1.0, 2.0], vec![2.0, 4.0 + 1e-14]], 1e-9)
            .unwrap_err();
        assert_eq!(err, Error::SingularBasis);
    }

    #[test]
    fn product_is_block_diagonal_and_dual_commutes() {
        let a = LatticeBasis::<Rational>::identity(2, 0.0);
        let b = a.scaled(&q(2, 1)).unwrap();
        let p = product_lattice(&a, &b).unwrap();
        assert_eq!(p.complex_dim().unwrap(), 2);
        let dp = dual_basis(&p).unwrap();
        let da = dual_basis(&a).unwrap();
        let db = dual_basis(&b).unwrap();
        assert_eq!(dp.matrix(), &da.matrix().direct_sum(db.matrix()));
    }

    #[test]
    fn product_mode_mismatch() {
        let a = LatticeBasis::<f64>::identity(2, 1e-9);
        let b = LatticeBasis::<f64>::identity(2, 1e-6);
        assert_eq!(product_lattice(&a, &b).unwrap_err(), Error::ModeMismatch);
    }

    #[test]
    fn complexify_realify_roundtrip() {
        let real = vec![q(1, 2), q(-1, 3), q(0, 1), q(5, 1)];
        let w = ComplexVector::complexify(&real).unwrap();
        assert_eq!(w.components[0], c(q(1, 2), q(-1, 3)));
        assert_eq!(w.realify(), real);
        assert!(ComplexVector::<Rational>::complexify(&real[..3]).is_none());
    }

    #[test]
    fn conj_product_matches_definition() {
        // w = ((1+i)/2, (1+i)/2): conj(w¹) w² = ((1-i)/2)((1+i)/2) = 1/2
        let w = ComplexVector::new(vec![c(q(1, 2), q(1, 2)), c(q(1, 2), q(1, 2))]);
        assert_eq!(w.conj_product(0, 1), (q(1, 2), q(0, 1)));
        assert_eq!(w.abs_sq(0), q(1, 2));
    }
}
