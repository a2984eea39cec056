//! Pointwise identities for first eigenfunctions.
//!
//! For `φ = √(2/V) cos 2π⟨w,x⟩`, `ψ = √(2/V) sin 2π⟨w,x⟩` and `λ = 4π²|w|²`:
//! `|∇φ|² = λψ²`, `|∇ψ|² = λφ²`, `|dd^c φ|² = λ²φ²` and `L(φ) + L(ψ) = 0`.
//! Random combinations `f` of the level are checked against `L(f) = L_rhs(f)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::Result;
use crate::forms::{ddc, form_inner, l_op, l_rhs, EigenfunctionBasis};
use crate::fourier::{grad_inner, TorusShape};
use crate::scalar::Real;
use crate::spectrum::EigenLevel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepIdentities {
    pub grad_phi: bool,
    pub grad_psi: bool,
    pub ddc_phi: bool,
    pub l_sum: bool,
}

impl RepIdentities {
    pub fn all(&self) -> bool {
        self.grad_phi && self.grad_psi && self.ddc_phi && self.l_sum
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentitySummary {
    pub reps: Vec<RepIdentities>,
    pub combinations: usize,
    pub combinations_ok: usize,
}

impl IdentitySummary {
    pub fn pass(&self) -> bool {
        self.reps.iter().all(RepIdentities::all) && self.combinations_ok == self.combinations
    }

    pub fn to_json(&self) -> Value {
        let count = |f: fn(&RepIdentities) -> bool| self.reps.iter().filter(|r| f(r)).count();
        json!({
            "reps": self.reps.len(),
            "grad_phi": count(|r| r.grad_phi),
            "grad_psi": count(|r| r.grad_psi),
            "ddc_phi": count(|r| r.ddc_phi),
            "l_sum": count(|r| r.l_sum),
            "combinations": self.combinations,
            "combinations_ok": self.combinations_ok,
            "pass": self.pass(),
        })
    }
}

/// Checks the four identities for one representative.
pub fn rep_identities<R: Real>(basis: &EigenfunctionBasis<R>, nu: usize) -> Result<RepIdentities> {
    let (phi, psi) = (basis.phi(nu), basis.psi(nu));
    let lambda = &basis.lambda;
    let grad_phi = grad_inner(phi, phi)?.approx_eq(&(psi * psi).scale(lambda));
    let grad_psi = grad_inner(psi, psi)?.approx_eq(&(phi * phi).scale(lambda));
    let h = ddc(phi)?;
    let ddc_phi = form_inner(&h, &h)?.approx_eq(&(phi * phi).scale(&(lambda.clone() * lambda.clone())));
    let l_sum = (&l_op(phi)? + &l_op(psi)?).is_zero_approx();
    Ok(RepIdentities {
        grad_phi,
        grad_psi,
        ddc_phi,
        l_sum,
    })
}

/// Random rational coefficients `p/q` with `|p| <= 5`, `1 <= q <= 4`.
pub fn random_coefficients<R: Real>(rng: &mut impl Rng, len: usize) -> Vec<R> {
    (0..len)
        .map(|_| R::from_ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4)))
        .collect()
}

/// Runs the identity suite on a level; `combinations` random elements of the
/// eigenspace are drawn from a fixed seed.
pub fn check_identities<R: Real>(
    level: &EigenLevel<R>,
    shape: &Arc<TorusShape<R>>,
    combinations: usize,
    seed: u64,
) -> Result<IdentitySummary> {
    let basis = EigenfunctionBasis::new(level, shape)?;
    let reps = (0..level.l()).map(|nu| rep_identities(&basis, nu)).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = 0;
    for _ in 0..combinations {
        let f = basis.combination(&random_coefficients::<R>(&mut rng, basis.len()));
        if l_op(&f)?.approx_eq(&l_rhs(&f, &basis.lambda)?) {
            ok += 1;
        }
    }
    Ok(IdentitySummary {
        reps,
        combinations,
        combinations_ok: ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{gamma_ab, standard};
    use crate::lattice::dual_basis;
    use crate::scalar::Rational;
    use crate::spectrum::enumerate_levels;

    #[test]
    fn identities_hold_on_small_lattices() {
        for b in [standard(1).unwrap(), gamma_ab(&Rational::from_i64(2), &Rational::from_i64(3)).unwrap()] {
            let level = &enumerate_levels(&dual_basis(&b).unwrap(), 1).unwrap()[0];
            let s = check_identities(level, &TorusShape::of(&b), 3, 7).unwrap();
            assert!(s.pass(), "{s:?}");
        }
    }

    #[test]
    fn float_identities_hold() {
        let b = standard(2).unwrap().to_float(1e-9);
        let level = &enumerate_levels(&dual_basis(&b).unwrap(), 1).unwrap()[0];
        let s = check_identities(level, &TorusShape::of(&b), 2, 1).unwrap();
        assert!(s.pass(), "{s:?}");
    }
}
