//! Laplace spectrum of a flat torus.
//!
//! The eigenvalues are `λ = 4π²|w|²` for `w` in the dual lattice; each level
//! stores one representative per antipodal pair `±w`. Short vectors are found
//! with a Fincke–Pohst search driven by the rational LDLᵀ factorization of the
//! dual Gram matrix, so exact lattices never leave `Q`.

use std::cmp::Ordering;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::lattice::{gram_matrix, ComplexVector, DualLattice};
use crate::linalg::Matrix;
use crate::scalar::{sq, Real};

/// Default cap on the number of enumerated candidate vectors.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// One eigenvalue `λ = 4π²·squared_norm` with its set `S(λ)` modulo sign.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenLevel<R> {
    pub squared_norm: R,
    /// Real coordinates of the representatives `w_1, ..., w_l`.
    pub reps: Vec<Vec<R>>,
    /// Integer coordinates of each representative in the dual basis.
    pub coords: Vec<Vec<i64>>,
}

impl<R: Real> EigenLevel<R> {
    /// Number of antipodal pairs `l(λ)`.
    pub fn l(&self) -> usize {
        self.reps.len()
    }

    /// `dim E(λ) = 2l`.
    pub fn multiplicity(&self) -> usize {
        2 * self.reps.len()
    }

    pub fn real_dim(&self) -> usize {
        self.reps.first().map_or(0, Vec::len)
    }

    pub fn lambda(&self) -> f64 {
        4.0 * std::f64::consts::PI.powi(2) * self.squared_norm.to_f64()
    }

    /// `4π²|w|²` in the coefficient field.
    pub fn lambda_coeff(&self) -> R::Coeff {
        R::Coeff::from_i64(4) * R::Coeff::pi() * R::Coeff::pi() * self.squared_norm.to_coeff()
    }

    pub fn complex_rep(&self, nu: usize) -> Result<ComplexVector<R>> {
        ComplexVector::complexify(&self.reps[nu]).ok_or(Error::OddDimension(self.real_dim()))
    }

    pub fn complex_reps(&self) -> Result<Vec<ComplexVector<R>>> {
        (0..self.l()).map(|nu| self.complex_rep(nu)).collect()
    }
}

/// `U`, `d` with `xᵀGx = Σ_i d_i (x_i + Σ_{j>i} U_ij x_j)²`.
struct QuadraticForm<R> {
    upper: Matrix<R>,
    diag: Vec<R>,
}

fn ldl<R: Real>(gram: &Matrix<R>) -> QuadraticForm<R> {
    let n = gram.rows();
    let mut upper = Matrix::identity(n);
    let mut diag: Vec<R> = Vec::with_capacity(n);
    for i in 0..n {
        let mut di = gram[(i, i)].clone();
        for k in 0..i {
            di = di - diag[k].clone() * sq(&upper[(k, i)]);
        }
        for j in i + 1..n {
            let mut v = gram[(i, j)].clone();
            for k in 0..i {
                v = v - diag[k].clone() * upper[(k, i)].clone() * upper[(k, j)].clone();
            }
            upper[(i, j)] = v / di.clone();
        }
        diag.push(di);
    }
    QuadraticForm { upper, diag }
}

struct Search<'a, R> {
    form: &'a QuadraticForm<R>,
    bound: R,
    cap: usize,
    x: Vec<i64>,
    found: Vec<(Vec<i64>, R)>,
}

impl<R: Real> Search<'_, R> {
    fn run(&mut self, i: usize, partial: R) -> Result<()> {
        let n = self.x.len();
        let mut center = R::zero();
        for j in i + 1..n {
            center = center - self.form.upper[(i, j)].clone() * R::from_i64(self.x[j]);
        }
        let remaining = self.bound.clone() - partial.clone();
        if remaining.is_negative() {
            return Ok(());
        }
        let di = &self.form.diag[i];
        let radius = (remaining.to_f64() / di.to_f64()).max(0.0).sqrt();
        let c = center.to_f64();
        let lo = (c - radius).floor() as i64 - 1;
        let hi = (c + radius).ceil() as i64 + 1;
        for v in lo..=hi {
            let t = R::from_i64(v) - center.clone();
            let total = partial.clone() + di.clone() * sq(&t);
            if total > self.bound {
                continue;
            }
            self.x[i] = v;
            if i == 0 {
                if self.x.iter().any(|&xi| xi != 0) {
                    self.found.push((self.x.clone(), total));
                    if self.found.len() > self.cap {
                        return Err(Error::EnumerationOverflow { cap: self.cap });
                    }
                }
            } else {
                self.run(i - 1, total)?;
            }
        }
        self.x[i] = 0;
        Ok(())
    }
}

/// All nonzero coefficient vectors `x` with `xᵀGx <= bound`, both signs.
pub(crate) fn short_vectors<R: Real>(gram: &Matrix<R>, bound: &R, cap: usize) -> Result<Vec<(Vec<i64>, R)>> {
    let n = gram.rows();
    let form = ldl(gram);
    let mut search = Search {
        form: &form,
        bound: bound.clone(),
        cap,
        x: vec![0; n],
        found: Vec::new(),
    };
    if n > 0 {
        search.run(n - 1, R::zero())?;
    }
    Ok(search.found)
}

/// True when the first nonzero coordinate is positive.
pub fn is_canonical<R: Real>(v: &[R], tol: f64) -> bool {
    let scale = v.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
    for x in v {
        if R::EXACT {
            if !x.is_zero() {
                return x.is_positive();
            }
        } else if x.to_f64().abs() > tol * scale {
            return x.is_positive();
        }
    }
    false
}

/// Orders representatives lexicographically by real coordinates, largest first.
pub(crate) fn rep_order<R: Real>(a: &[R], b: &[R], tol: f64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp_tol(y, tol) {
            Ordering::Equal => continue,
            o => return o.reverse(),
        }
    }
    Ordering::Equal
}

/// The first `count` distinct nonzero eigenvalue levels, ascending.
///
/// The search radius starts at the shortest basis vector and doubles until
/// `count` levels lie inside it; every vector inside the radius is found, so
/// the returned sets `S(λ)` are complete.
pub fn enumerate_levels<R: Real>(dual: &DualLattice<R>, count: usize) -> Result<Vec<EigenLevel<R>>> {
    enumerate_levels_capped(dual, count, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_levels_capped<R: Real>(
    dual: &DualLattice<R>,
    count: usize,
    cap: usize,
) -> Result<Vec<EigenLevel<R>>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let tol = dual.tol();
    let gram = gram_matrix(dual);
    let n = gram.rows();
    // enumerate in an LLL-reduced basis; `t` maps reduced coordinates back
    let t = lll_transform(&gram.to_f64());
    let t_r = Matrix::from_rows(t.iter().map(|r| r.iter().map(|&v| R::from_i64(v)).collect()).collect())?;
    let reduced = &(&t_r.transpose() * &gram) * &t_r;
    let mut bound = (0..n)
        .map(|i| reduced[(i, i)].clone())
        .reduce(|a, b| if b < a { b } else { a })
        .expect("nonempty lattice");
    loop {
        // float norms near the bound must not be split from their level
        let search_bound = if R::EXACT {
            bound.clone()
        } else {
            bound.clone() * R::from_ratio(1_000_000_000 + 4, 1_000_000_000)
                + R::from_ratio(1, 1_000_000_000_000)
        };
        let found = short_vectors(&reduced, &search_bound, cap)?
            .into_iter()
            .map(|(x, norm)| ((0..n).map(|i| (0..n).map(|j| t[i][j] * x[j]).sum()).collect(), norm))
            .collect();
        let mut levels = group_levels(dual, found, tol);
        levels.retain(|lvl| lvl.squared_norm <= bound || lvl.squared_norm.approx_eq(&bound, tol));
        if levels.len() >= count {
            levels.truncate(count);
            return Ok(levels);
        }
        bound = bound.clone() + bound;
    }
}

/// Unimodular `T` such that the basis `B·T` is LLL-reduced (δ = 0.99) for
/// the Gram matrix `gram = BᵀB`. Only integer column operations are applied,
/// so `T` is unimodular whatever the rounding.
fn lll_transform(gram: &Matrix<f64>) -> Vec<Vec<i64>> {
    let n = gram.rows();
    let mut t: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut g: Vec<Vec<f64>> = (0..n).map(|i| gram.row(i).to_vec()).collect();
    let gram_schmidt = |g: &[Vec<f64>]| {
        let mut mu = vec![vec![0.0; n]; n];
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..i {
                let mut v = g[i][j];
                for k in 0..j {
                    v -= mu[j][k] * mu[i][k] * b[k];
                }
                mu[i][j] = if b[j] > 0.0 { v / b[j] } else { 0.0 };
            }
            let mut v = g[i][i];
            for k in 0..i {
                v -= mu[i][k] * mu[i][k] * b[k];
            }
            b[i] = v;
        }
        (mu, b)
    };
    let mut k = 1;
    let mut steps = 0;
    while k < n && steps < 10_000 {
        steps += 1;
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&g);
            let r = mu[k][j].round();
            if r == 0.0 || r.abs() > 1e12 {
                continue;
            }
            // column k -= r * column j
            let ri = r as i64;
            for row in t.iter_mut() {
                row[k] -= ri * row[j];
            }
            for row in g.iter_mut() {
                row[k] -= r * row[j];
            }
            for c in 0..n {
                g[k][c] -= r * g[j][c];
            }
        }
        let (mu, b) = gram_schmidt(&g);
        if b[k] >= (0.99 - mu[k][k - 1] * mu[k][k - 1]) * b[k - 1] {
            k += 1;
        } else {
            for row in t.iter_mut() {
                row.swap(k, k - 1);
            }
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            g.swap(k, k - 1);
            k = k.max(2) - 1;
        }
    }
    t
}

fn group_levels<R: Real>(dual: &DualLattice<R>, found: Vec<(Vec<i64>, R)>, tol: f64) -> Vec<EigenLevel<R>> {
    let basis = dual.matrix();
    let mut vectors: Vec<(Vec<i64>, Vec<R>, R)> = found
        .into_iter()
        .filter_map(|(x, norm)| {
            let xr: Vec<R> = x.iter().map(|&v| R::from_i64(v)).collect();
            let v = basis.mul_vec(&xr);
            is_canonical(&v, tol).then_some((x, v, norm))
        })
        .collect();
    vectors.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal));

    let mut levels: Vec<EigenLevel<R>> = Vec::new();
    for (x, v, norm) in vectors {
        match levels.last_mut() {
            Some(last) if last.squared_norm.approx_eq(&norm, tol) => {
                last.reps.push(v);
                last.coords.push(x);
            }
            _ => levels.push(EigenLevel {
                squared_norm: norm,
                reps: vec![v],
                coords: vec![x],
            }),
        }
    }
    for level in &mut levels {
        let mut paired: Vec<(Vec<R>, Vec<i64>)> =
            level.reps.drain(..).zip(level.coords.drain(..)).collect();
        paired.sort_by(|a, b| rep_order(&a.0, &b.0, tol));
        for (v, x) in paired {
            level.reps.push(v);
            level.coords.push(x);
        }
    }
    levels
}

/// Position of a multiplicity-counted index `k` among the levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelIndex {
    /// Index into the level list.
    pub level: usize,
    /// First and last multiplicity-counted indices covered by the level.
    pub first_k: usize,
    pub last_k: usize,
    /// `λ_k > λ_{k-1}` (with `λ_0 = 0`).
    pub strictly_above_prev: bool,
    /// `λ_k < λ_{k+1}`.
    pub strictly_below_next: bool,
}

/// Maps `k >= 1` (counted with multiplicity) to its level.
pub fn level_for_index<R: Real>(levels: &[EigenLevel<R>], k: usize) -> Result<LevelIndex> {
    let covered: usize = levels.iter().map(EigenLevel::multiplicity).sum();
    if k == 0 || k > covered {
        return Err(Error::IndexBeyondEnumeration { k, covered });
    }
    let mut first = 1;
    for (i, level) in levels.iter().enumerate() {
        let last = first + level.multiplicity() - 1;
        if k <= last {
            return Ok(LevelIndex {
                level: i,
                first_k: first,
                last_k: last,
                strictly_above_prev: k == first,
                strictly_below_next: k == last,
            });
        }
        first = last + 1;
    }
    unreachable!("k within covered range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{dual_basis, LatticeBasis};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn standard_lattice_first_level() {
        for n in 1..=3 {
            let lat = LatticeBasis::<Rational>::identity(2 * n, 0.0);
            let levels = enumerate_levels(&dual_basis(&lat).unwrap(), 1).unwrap();
            assert_eq!(levels[0].squared_norm, q(1, 1));
            assert_eq!(levels[0].l(), 2 * n);
            // e_1, i e_1, e_2, ... in real-coordinate order
            for (k, rep) in levels[0].reps.iter().enumerate() {
                for (j, x) in rep.iter().enumerate() {
                    assert_eq!(*x, if j == k { q(1, 1) } else { q(0, 1) });
                }
            }
        }
    }

    #[test]
    fn levels_strictly_increase() {
        let lat = LatticeBasis::<Rational>::identity(2, 0.0);
        let levels = enumerate_levels(&dual_basis(&lat).unwrap(), 5).unwrap();
        let norms: Vec<Rational> = levels.iter().map(|l| l.squared_norm.clone()).collect();
        // Z²: 1, 2, 4, 5, 8
        assert_eq!(norms, vec![q(1, 1), q(2, 1), q(4, 1), q(5, 1), q(8, 1)]);
        assert_eq!(levels[3].l(), 4);
    }

    #[test]
    fn level_index_flags() {
        let lat = LatticeBasis::<Rational>::identity(2, 0.0);
        let levels = enumerate_levels(&dual_basis(&lat).unwrap(), 2).unwrap();
        let k1 = level_for_index(&levels, 1).unwrap();
        assert_eq!((k1.level, k1.strictly_above_prev, k1.strictly_below_next), (0, true, false));
        let k4 = level_for_index(&levels, 4).unwrap();
        assert_eq!((k4.level, k4.strictly_above_prev, k4.strictly_below_next), (0, false, true));
        let k5 = level_for_index(&levels, 5).unwrap();
        assert_eq!((k5.level, k5.strictly_above_prev), (1, true));
        assert_eq!(
            level_for_index(&levels, 9).unwrap_err(),
            Error::IndexBeyondEnumeration { k: 9, covered: 8 }
        );
        assert!(level_for_index(&levels, 0).is_err());
    }

    #[test]
    fn overflow_cap_is_enforced() {
        let lat = LatticeBasis::<Rational>::identity(4, 0.0);
        let dual = dual_basis(&lat).unwrap();
        let err = enumerate_levels_capped(&dual, 3, 5).unwrap_err();
        assert_eq!(err, Error::EnumerationOverflow { cap: 5 });
    }

    #[test]
    fn canonical_sign_rule() {
        assert!(is_canonical(&[q(0, 1), q(1, 2), q(-1, 1)], 0.0));
        assert!(!is_canonical(&[q(0, 1), q(-1, 2), q(1, 1)], 0.0));
        assert!(is_canonical(&[1e-15, 0.5], 1e-9));
    }

    #[test]
    fn ldl_reconstructs_quadratic_form() {
        let g = Matrix::from_rows(vec![
            vec![q(2, 1), q(1, 1), q(0, 1)],
            vec![q(1, 1), q(3, 1), q(1, 2)],
            vec![q(0, 1), q(1, 2), q(1, 1)],
        ])
        .unwrap();
        let f = ldl(&g);
        let x = [q(1, 1), q(-2, 1), q(3, 1)];
        let direct = crate::scalar::dot(&x, &g.mul_vec(&x));
        let mut via = q(0, 1);
        for i in 0..3 {
            let mut t = x[i].clone();
            for j in i + 1..3 {
                t += f.upper[(i, j)].clone() * x[j].clone();
            }
            via += f.diag[i].clone() * t.clone() * t;
        }
        assert_eq!(direct, via);
    }
}
