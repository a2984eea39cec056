use std::sync::Arc;

use proptest::prelude::*;
use torus_extremal::catalog::{gamma_ab, standard};
use torus_extremal::deformation::{derivative_check, HarmonicDeformation};
use torus_extremal::extremality::{
    brute_force_oracle, build_immersion_system, build_kahler_system, solve_feasibility, FeasibilitySystem, SystemKind,
};
use torus_extremal::forms::RealForm;
use torus_extremal::scalar::Real;
use torus_extremal::{
    dual_basis, enumerate_levels, harmonic_project, Coeff, Form11, LatticeBasis, Matrix, Rational, Symbolic,
    TorusShape, TrigPoly,
};

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Nonsingular rational bases: a unit upper-triangular integer matrix times
/// a positive rational diagonal, which keeps enumeration cheap.
fn lattice(dim: usize) -> impl Strategy<Value = LatticeBasis<Rational>> {
    (
        prop::collection::vec(-2i64..=2, dim * dim),
        prop::collection::vec((1i64..=4, 1i64..=3), dim),
    )
        .prop_map(move |(upper, diag)| {
            let mut m = Matrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] = if i == j {
                        q(diag[i].0, diag[i].1)
                    } else if i < j {
                        q(upper[i * dim + j], 1) * q(diag[j].0, diag[j].1)
                    } else {
                        q(0, 1)
                    };
                }
            }
            LatticeBasis::new(m, 0.0).expect("triangular with nonzero diagonal")
        })
}

fn even_lattice() -> impl Strategy<Value = LatticeBasis<Rational>> {
    prop_oneof![lattice(2), lattice(4)]
}

/// Squared norms of all `D c` with `|c_i| <= k`, sorted.
fn box_norms(dual: &Matrix<Rational>, k: i64) -> Vec<Rational> {
    let dim = dual.cols();
    let mut out = Vec::new();
    let mut c = vec![-k; dim];
    loop {
        if c.iter().any(|&x| x != 0) {
            let v = dual.mul_vec(&c.iter().map(|&x| q(x, 1)).collect::<Vec<_>>());
            out.push(v.iter().fold(q(0, 1), |a, x| a + x * x));
        }
        let mut i = 0;
        while i < dim && c[i] == k {
            c[i] = -k;
            i += 1;
        }
        if i == dim {
            break;
        }
        c[i] += 1;
    }
    out.sort();
    out
}

fn random_poly(shape: &Arc<TorusShape<Rational>>, terms: &[(Vec<i64>, i64, bool)]) -> TrigPoly<Rational> {
    let mut f = TrigPoly::zero(shape);
    for (u, c, sine) in terms {
        let u: Vec<Rational> = u.iter().map(|&x| q(x, 1)).collect();
        let base = if *sine { TrigPoly::sin(shape, &u) } else { TrigPoly::cos(shape, &u) };
        f = &f + &base.scale(&Symbolic::from_i64(*c));
    }
    f
}

fn terms(dim: usize) -> impl Strategy<Value = Vec<(Vec<i64>, i64, bool)>> {
    prop::collection::vec((prop::collection::vec(-2i64..=2, dim), -3i64..=3, any::<bool>()), 1..4)
}

fn all_indices(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..degree {
        out = out
            .into_iter()
            .flat_map(|idx: Vec<usize>| {
                let start = idx.last().map_or(0, |&l| l + 1);
                (start..dim).map(move |k| {
                    let mut j = idx.clone();
                    j.push(k);
                    j
                })
            })
            .collect();
    }
    out
}

fn random_form(
    shape: &Arc<TorusShape<Rational>>,
    degree: usize,
    polys: &[Vec<(Vec<i64>, i64, bool)>],
) -> RealForm<Rational> {
    let comps = all_indices(shape.real_dim, degree)
        .into_iter()
        .zip(polys.iter().cycle())
        .map(|(idx, t)| (idx, random_poly(shape, t)))
        .collect();
    RealForm::from_components(shape, degree, comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dual_of_dual_is_the_lattice(b in even_lattice()) {
        let d = dual_basis(&b).unwrap();
        let dd = dual_basis(&d.as_lattice()).unwrap();
        // the change of basis B⁻¹·B'' is unimodular; here it is the identity
        prop_assert_eq!(dd.matrix(), b.matrix());
        let g: Matrix<Rational> = &b.matrix().transpose() * d.matrix();
        prop_assert_eq!(g, Matrix::identity(b.real_dim()));
    }

    #[test]
    fn enumeration_matches_box_search(b in lattice(2).boxed().prop_union(lattice(3).boxed())) {
        let dual = dual_basis(&b).unwrap();
        let levels = enumerate_levels(&dual, 2).unwrap();
        // |c_i| <= |b_i|·|v| since c = Bᵀv
        let top = levels.last().unwrap().squared_norm.to_f64();
        let bmax = b.generators().iter().map(|g| g.iter().map(|x| x.to_f64().powi(2)).sum::<f64>()).fold(0.0, f64::max);
        let k = (bmax * top).sqrt().ceil() as i64;
        prop_assume!(k <= 6);
        let norms = box_norms(dual.matrix(), k);
        for level in &levels {
            let count = norms.iter().filter(|n| **n == level.squared_norm).count();
            prop_assert_eq!(count, level.multiplicity());
        }
        let distinct: Vec<&Rational> = {
            let mut d: Vec<&Rational> = norms.iter().filter(|n| **n <= levels.last().unwrap().squared_norm).collect();
            d.dedup();
            d
        };
        prop_assert_eq!(distinct.len(), levels.len());
    }

    #[test]
    fn d_and_delta_are_adjoint(
        p in 0usize..3,
        a in prop::collection::vec(terms(4), 1..4),
        b in prop::collection::vec(terms(4), 1..4),
    ) {
        let shape = TorusShape::of(&standard(2).unwrap());
        let alpha = random_form(&shape, p, &a);
        let beta = random_form(&shape, p + 1, &b);
        prop_assert_eq!(alpha.d().unwrap().l2_inner(&beta), alpha.l2_inner(&beta.delta().unwrap()));
        prop_assert_eq!(alpha.dc().unwrap().l2_inner(&beta), alpha.l2_inner(&beta.delta_c().unwrap()));
        prop_assert!(alpha.d().unwrap().d().unwrap().is_zero_approx());
    }

    #[test]
    fn harmonic_projection_is_a_projector(t in prop::collection::vec(terms(4), 4)) {
        let shape = TorusShape::of(&standard(2).unwrap());
        let coeffs: Vec<Vec<TrigPoly<Rational>>> =
            (0..2).map(|a| (0..2).map(|b| random_poly(&shape, &t[2 * a + b])).collect()).collect();
        let mut form = Form11::zero(&shape).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut m = vec![vec![Symbolic::zero(); 2]; 2];
                m[a][b] = Symbolic::one();
                let unit = Form11::constant(&shape, &m).unwrap();
                form = form.add(&unit.mul_fn(&coeffs[a][b]).unwrap()).unwrap();
            }
        }
        let h = harmonic_project(&form);
        prop_assert!(harmonic_project(&h).approx_eq(&h));
        prop_assert!(h.is_constant());
        prop_assert!(harmonic_project(&form.sub(&h).unwrap()).is_zero_approx());
        let omega = Form11::omega(&shape).unwrap();
        prop_assert!(harmonic_project(&omega).approx_eq(&omega));
    }

    #[test]
    fn solver_agrees_with_oracle(
        rows in 1usize..5,
        cols in 1usize..9,
        entries in prop::collection::vec(-3i64..=3, 40),
        x in prop::collection::vec(0i64..=2, 8),
        rhs in prop::collection::vec(-3i64..=3, 4),
        planted in any::<bool>(),
    ) {
        let a = Matrix::from_rows(
            (0..rows).map(|i| (0..cols).map(|j| q(entries[i * cols + j], 1)).collect()).collect(),
        ).unwrap();
        let b: Vec<Rational> = if planted {
            a.mul_vec(&x[..cols].iter().map(|&v| q(v, 1)).collect::<Vec<_>>())
        } else {
            rhs[..rows].iter().map(|&v| q(v, 1)).collect()
        };
        let sys = FeasibilitySystem::new(a, b, SystemKind::Kahler, 0.0);
        let out = solve_feasibility(&sys).unwrap();
        prop_assert_eq!(out.is_feasible(), brute_force_oracle(&sys).unwrap());
        if planted {
            prop_assert!(out.is_feasible());
        }
        match (out.weights(), out.farkas()) {
            (Some(w), _) => prop_assert!(sys.check_weights(w)),
            (_, Some(y)) => prop_assert!(sys.check_farkas(y)),
            _ => prop_assert!(false),
        }
    }

    #[test]
    fn verdicts_are_scale_invariant(b in even_lattice(), s in (1i64..=5, 1i64..=5)) {
        let s = q(s.0, s.1);
        let scaled = b.scaled(&s).unwrap();
        let l0 = &enumerate_levels(&dual_basis(&b).unwrap(), 1).unwrap()[0];
        let l1 = &enumerate_levels(&dual_basis(&scaled).unwrap(), 1).unwrap()[0];
        prop_assert_eq!(l0.l(), l1.l());
        prop_assert_eq!(l1.squared_norm.clone() * s.clone() * s, l0.squared_norm.clone());
        let n = b.real_dim() / 2;
        let k0 = solve_feasibility(&build_kahler_system(l0, n, 0.0).unwrap()).unwrap();
        let k1 = solve_feasibility(&build_kahler_system(l1, n, 0.0).unwrap()).unwrap();
        prop_assert_eq!(k0.is_feasible(), k1.is_feasible());
    }

    #[test]
    fn immersion_implies_kahler(b in even_lattice()) {
        let level = &enumerate_levels(&dual_basis(&b).unwrap(), 1).unwrap()[0];
        let imm = solve_feasibility(&build_immersion_system(level, b.real_dim(), 0.0).unwrap()).unwrap();
        let kah = solve_feasibility(&build_kahler_system(level, b.real_dim() / 2, 0.0).unwrap()).unwrap();
        prop_assert!(!imm.is_feasible() || kah.is_feasible());
    }

    #[test]
    fn float_mode_agrees_with_exact(b in even_lattice()) {
        let f = b.to_float(1e-9);
        let le = enumerate_levels(&dual_basis(&b).unwrap(), 2).unwrap();
        let lf = enumerate_levels(&dual_basis(&f).unwrap(), 2).unwrap();
        prop_assert_eq!(le.len(), lf.len());
        for (a, c) in le.iter().zip(&lf) {
            prop_assert_eq!(a.l(), c.l());
            prop_assert!((a.squared_norm.to_f64() - c.squared_norm).abs() <= 1e-9 * c.squared_norm.max(1.0));
        }
        let n = b.real_dim() / 2;
        let ke = solve_feasibility(&build_kahler_system(&le[0], n, 0.0).unwrap()).unwrap();
        if let Ok(kf) = solve_feasibility(&build_kahler_system(&lf[0], n, 1e-9).unwrap()) {
            prop_assert_eq!(ke.is_feasible(), kf.is_feasible());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn derivatives_match_gram_for_hermitian_alpha(
        d in (-4i64..=4, 1i64..=4),
        re in (-4i64..=4, 1i64..=4),
        im in (-4i64..=4, 1i64..=4),
        which in 0usize..2,
    ) {
        let b = if which == 0 { standard(2).unwrap() } else { gamma_ab(&q(2, 1), &q(3, 1)).unwrap() };
        let shape = TorusShape::of(&b);
        let h = q(d.0, d.1);
        let (x, y) = (q(re.0, re.1), q(im.0, im.1));
        let re_m = Matrix::from_rows(vec![vec![h.clone(), x.clone()], vec![x, -h]]).unwrap();
        let im_m = Matrix::from_rows(vec![vec![q(0, 1), y.clone()], vec![-y, q(0, 1)]]).unwrap();
        let def = HarmonicDeformation::constant(&shape, re_m, im_m).unwrap();
        prop_assert!(def.trace_zero);
        let r = derivative_check(&b, &def, 1).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }
}
