//! Spectral extremality of flat tori.
//!
//! Lattices, their dual spectra, exact Fourier calculus on trigonometric
//! polynomials, feasibility certificates for λ_k-extremality and harmonic
//! deformations of the flat metric.

pub mod catalog;
pub mod coeff;
pub mod deformation;
pub mod error;
pub mod extremality;
pub mod forms;
pub mod io;
pub mod fourier;
pub mod identities;
pub mod lattice;
pub mod report;
pub mod linalg;
pub mod scalar;
pub mod spectrum;

pub use coeff::{Coeff, Symbolic};
pub use error::{Error, Result};
pub use forms::{ddc, form_inner, harmonic_project, l_op, l_rhs, q_alpha, q_alpha_pair, EigenfunctionBasis, Form11, RealForm};
pub use fourier::{grad_inner, laplacian, trig_integrate, trig_mul, TorusShape, TrigPoly};
pub use lattice::{dual_basis, gram_matrix, product_lattice, ComplexVector, DualLattice, LatticeBasis};
pub use linalg::Matrix;
pub use scalar::{parse_rational, Mode, Rational, Real, DEFAULT_TOL};
pub use spectrum::{enumerate_levels, level_for_index, EigenLevel, LevelIndex};
