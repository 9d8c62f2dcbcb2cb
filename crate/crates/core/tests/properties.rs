//! Structural invariants over randomized grids, operators and laws.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use evolop_core::catalog::{acoustics, euler_bernoulli, timoshenko, Coef, PlateParams};
use evolop_core::evolve::{
    dissipation_check, energy_series, solve, EvolutionaryProblem, Forcing, Scheme, SolverConfig,
};
use evolop_core::flatgrid::{
    build_div, build_mother_a, build_nabla, Axis, Bc, Grid, MotherSpace, TensorFieldSpace,
};
use evolop_core::linops::{
    make_block_skew, verify_adjoint_theorem, DenseLu, MatrixOperator, SpaceTag,
};
use evolop_core::matlaw::{
    check_wellposed, implicit_step_matrix, normalize_m0, schur_reduce, MaterialLaw,
};
use evolop_core::subspaces::{
    asym_projection, descend, range_kernel_split, sym_projection, torus_average, ProjectionPair,
};

fn axis() -> impl Strategy<Value = Axis> {
    (2usize..=6, 0.1f64..1.0, any::<bool>()).prop_map(|(n, h, periodic)| {
        Axis::new(
            n,
            h,
            if periodic {
                Bc::Periodic
            } else {
                Bc::Dirichlet
            },
        )
        .unwrap()
    })
}

fn grid(max_dim: usize) -> impl Strategy<Value = Grid> {
    prop::collection::vec(axis(), 1..=max_dim).prop_map(|axes| Grid::new(axes).unwrap())
}

fn field(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn dense(r: usize, c: usize) -> impl Strategy<Value = DMatrix<f64>> {
    field(r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.25f64..4.0, n)
}

/// Symmetric positive definite `B Bᵀ + δ I`.
fn spd(n: usize, shift: f64) -> impl Strategy<Value = DMatrix<f64>> {
    dense(n, n).prop_map(move |b| &b * b.transpose() + DMatrix::identity(n, n) * shift)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn div_is_minus_adjoint_of_nabla(g in grid(3), rank in 0usize..=2, seed in any::<u64>()) {
        let low = TensorFieldSpace::new(g, rank);
        let high = low.raised();
        let grad = build_nabla(&low);
        let div = build_div(&high).unwrap();
        prop_assert!(div.max_abs_diff(&grad.adjoint().neg()).unwrap() <= 1e-12 * grad.max_abs());
        let u = DVector::from_fn(low.dim(), |i, _| ((i as u64 ^ seed) % 97) as f64 / 97.0 - 0.5);
        let v = DVector::from_fn(high.dim(), |i, _| ((i as u64).wrapping_mul(31) % 89) as f64 / 89.0 - 0.5);
        let (lt, ht) = (low.tag(), high.tag());
        let defect = ht.inner(&grad.apply(&u).unwrap(), &v) + lt.inner(&u, &div.apply(&v).unwrap());
        prop_assert!(defect.abs() <= 1e-12 * lt.norm(&u) * ht.norm(&v) + f64::MIN_POSITIVE);
    }

    #[test]
    fn mother_operator_is_skew(g in grid(2), k in 1usize..=2) {
        let a = build_mother_a(&MotherSpace::new(g, k).unwrap()).into_a();
        prop_assert!(a.add(&a.adjoint()).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn descendants_of_skew_operators_are_skew(
        w in weights(6),
        c in dense(4, 2),
        keep in prop::collection::btree_set(0usize..6, 1..6),
    ) {
        let h0 = SpaceTag::new("H0", w[..2].to_vec()).unwrap();
        let h1 = SpaceTag::new("H1", w[2..].to_vec()).unwrap();
        let a = make_block_skew(&MatrixOperator::from_dense(c, h0, h1).unwrap()).into_a();
        let keep: Vec<usize> = keep.into_iter().collect();
        let pv = ProjectionPair::selection(a.domain(), &keep, "V").unwrap();
        let d = descend(&a, &pv).unwrap();
        prop_assert!(d.add(&d.adjoint()).unwrap().max_abs() <= 1e-12 * a.max_abs().max(1.0));
    }

    #[test]
    fn adjoint_of_compatible_composition(
        w in weights(9),
        c in dense(3, 3),
        b in dense(3, 3),
    ) {
        let h0 = SpaceTag::new("H0", w[..3].to_vec()).unwrap();
        let h1 = SpaceTag::new("H1", w[3..6].to_vec()).unwrap();
        let x = SpaceTag::new("X", w[6..].to_vec()).unwrap();
        let c = MatrixOperator::from_dense(c, h0.clone(), h1).unwrap();
        let b = MatrixOperator::from_dense(b, h0, x).unwrap();
        prop_assert!(verify_adjoint_theorem(&c, &b, 1e-12).unwrap());
    }

    #[test]
    fn tensor_projections_are_coisometries(g in grid(3)) {
        let s2 = TensorFieldSpace::new(g.clone(), 2);
        prop_assert!(sym_projection(&s2).unwrap().isometry_defect() <= 1e-14);
        if g.dim() > 1 {
            prop_assert!(asym_projection(&s2).unwrap().isometry_defect() <= 1e-14);
        } else {
            prop_assert!(asym_projection(&s2).is_err());
        }
    }

    #[test]
    fn torus_embedding_is_isometric(n0 in 2usize..=6, nt in 2usize..=6, rank in 0usize..=2, u in field(36 * 4)) {
        let g = Grid::new(vec![Axis::dirichlet(n0, 0.2).unwrap(), Axis::torus(nt).unwrap()]).unwrap();
        let (pp, reduced) = torus_average(&TensorFieldSpace::new(g, rank), &[1]).unwrap();
        prop_assert!(pp.isometry_defect() <= 1e-13);
        let v = DVector::from_iterator(reduced.dim(), u.into_iter().cycle().take(reduced.dim()));
        let e = pp.embedding().apply(&v).unwrap();
        prop_assert!((pp.space().norm(&e) - reduced.tag().norm(&v)).abs() <= 1e-13 * reduced.tag().norm(&v).max(1.0));
    }

    #[test]
    fn crank_nicolson_conserves_energy(m0 in spd(4, 0.5), c in dense(2, 2), u0 in field(4)) {
        let h = SpaceTag::euclidean("H", 4).unwrap();
        let half = SpaceTag::euclidean("half", 2).unwrap();
        let a = make_block_skew(&MatrixOperator::from_dense(c, half.clone(), half).unwrap())
            .into_a()
            .retagged(h.clone(), h.clone())
            .unwrap();
        let law = MaterialLaw::new(
            MatrixOperator::from_dense(m0, h.clone(), h.clone()).unwrap(),
            MatrixOperator::zeros(&h, &h),
        ).unwrap();
        let problem = EvolutionaryProblem::new(law, a, Forcing::zero(), DVector::from_vec(u0)).unwrap();
        let traj = solve(&problem, &SolverConfig::new(0.1, 5.0, Scheme::CrankNicolson)).unwrap();
        let report = dissipation_check(&traj, &problem.law).unwrap();
        prop_assert!(report.max_relative_drift <= 1e-12);
    }

    #[test]
    fn dissipation_balance_holds(m1 in spd(3, 0.1), u0 in field(3)) {
        let h = SpaceTag::euclidean("H", 3).unwrap();
        let law = MaterialLaw::new(MatrixOperator::identity(&h), MatrixOperator::from_dense(m1, h.clone(), h.clone()).unwrap()).unwrap();
        let a = MatrixOperator::zeros(&h, &h);
        let problem = EvolutionaryProblem::new(law, a, Forcing::zero(), DVector::from_vec(u0)).unwrap();
        let traj = solve(&problem, &SolverConfig::new(0.05, 1.0, Scheme::CrankNicolson)).unwrap();
        let report = dissipation_check(&traj, &problem.law).unwrap();
        prop_assert!(report.max_identity_residual <= 1e-12);
        prop_assert!(report.nonincreasing);
    }

    #[test]
    fn schur_reduction_matches_direct_solve(s in spd(5, 1.0), skew in dense(5, 5), f in field(5), k in 1usize..=4) {
        let h = SpaceTag::euclidean("H", 5).unwrap();
        let m = s + (&skew - skew.transpose());
        let op = MatrixOperator::from_dense(m.clone(), h.clone(), h.clone()).unwrap();
        let range = ProjectionPair::selection(&h, &(k..5).collect::<Vec<_>>(), "r").unwrap();
        let kernel = ProjectionPair::selection(&h, &(0..k).collect::<Vec<_>>(), "k").unwrap();
        let (reduced, recipe) = schur_reduce(&op, &range, &kernel).unwrap();
        let f = DVector::from_vec(f);
        let (f_r, f_k) = recipe.split(&f).unwrap();
        let x_r = DenseLu::new(reduced.to_dense(), "reduced").unwrap().solve(&recipe.reduce_rhs(&f_r, &f_k));
        let x = recipe.assemble(&x_r, &recipe.reconstruct(&f_k, &x_r)).unwrap();
        let direct = DenseLu::new(m, "full").unwrap().solve(&f);
        prop_assert!((x - &direct).amax() <= 1e-10 * direct.amax().max(1.0));
    }

    #[test]
    fn normalized_law_has_projector_m0(d in prop::collection::vec(prop_oneof![Just(0.0), 0.5f64..3.0], 4), s in spd(4, 0.5)) {
        let h = SpaceTag::euclidean("H", 4).unwrap();
        let m1 = MatrixOperator::from_dense(s, h.clone(), h.clone()).unwrap();
        let law = MaterialLaw::new(MatrixOperator::diagonal(&h, &d).unwrap(), m1).unwrap();
        prop_assume!(check_wellposed(&law, 1e-12).unwrap().passed());
        let c = MatrixOperator::from_rows(&[&[0.0, 1.0, 0.0, 0.0], &[-1.0, 0.0, 2.0, 0.0], &[0.0, -2.0, 0.0, 0.5], &[0.0, 0.0, -0.5, 0.0]], h.clone(), h.clone()).unwrap();
        let (new_law, a, _) = normalize_m0(&law, &c).unwrap();
        let p = new_law.m0.to_dense();
        prop_assert!((&p * &p - &p).amax() <= 1e-12);
        prop_assert!(a.add(&a.adjoint()).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn range_and_kernel_are_complementary(g in grid(2)) {
        let a = build_mother_a(&MotherSpace::new(g, 1).unwrap()).into_a();
        let (r, k) = range_kernel_split(&a, None).unwrap();
        let mut sum = DMatrix::zeros(a.nrows(), a.ncols());
        for p in [r, k].into_iter().flatten() {
            sum += p.projector().to_dense();
            prop_assert!(p.isometry_defect() <= 1e-12);
        }
        prop_assert!((sum - DMatrix::identity(a.nrows(), a.ncols())).amax() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn beams_are_well_posed_for_positive_parameters(
        n in 4usize..=10,
        nu1 in 0.2f64..3.0,
        nu2 in 0.2f64..3.0,
        kappa in 0.2f64..3.0,
        stiffness in 0.2f64..3.0,
        d in 0.0f64..2.0,
    ) {
        let g = Grid::cube(1, n, 1.0 / n as f64, Bc::Dirichlet).unwrap();
        let params = PlateParams {
            nu1: nu1.into(),
            nu2: nu2.into(),
            kappa: kappa.into(),
            stiffness: stiffness.into(),
            d: d.into(),
        };
        for entry in [
            timoshenko(&g, &params).unwrap(),
            euler_bernoulli(&g, &Coef::Scalar(nu1), &Coef::Scalar(stiffness), &Coef::Scalar(d)).unwrap(),
        ] {
            prop_assert!(check_wellposed(&entry.problem.law, 1e-12).unwrap().passed());
            prop_assert!(entry.derivation_residual().unwrap() <= 1e-12 * entry.problem.a.max_abs());
            let s = implicit_step_matrix(&entry.problem.law, &entry.problem.a, 0.1).unwrap();
            let sym = s.add(&s.adjoint()).unwrap().scale(0.5);
            let expected = entry.problem.law.m0.scale(10.0).add(&entry.problem.law.m1.add(&entry.problem.law.m1.adjoint()).unwrap().scale(0.5)).unwrap();
            prop_assert!(sym.max_abs_diff(&expected).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn energy_never_grows_with_damping(n in 4usize..=12, sigma in 0.0f64..2.0, u0 in field(24)) {
        let g = Grid::cube(1, n, 1.0 / n as f64, Bc::Dirichlet).unwrap();
        let entry = acoustics(&g, &1.0.into(), &1.0.into(), &sigma.into()).unwrap();
        let u0 = DVector::from_iterator(2 * n, u0.into_iter().take(2 * n));
        let problem = entry.problem.clone().with_initial(u0).unwrap();
        let traj = solve(&problem, &SolverConfig::new(0.05, 2.0, Scheme::CrankNicolson)).unwrap();
        let e = energy_series(&traj, &problem.law.m0);
        prop_assert!(e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-13) + 1e-15));
    }
}
