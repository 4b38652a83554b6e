use nonlocal_multisol::geometry::{build_grid, integrate_power, DomainSpec, EigenData};
use nonlocal_multisol::nonlinearity::{make_family_b, truncate};
use nonlocal_multisol::solver::{solve_auxiliary, SolveOptions};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadrature_weights_sum_to_length(a in -3.0f64..3.0, len in 0.1f64..5.0, n in 8usize..300) {
        let grid = build_grid(DomainSpec::interval(a, a + len, n)).unwrap();
        let ones = vec![1.0; grid.len()];
        prop_assert!((integrate_power(&grid, &ones, 1.0) - len).abs() < 1e-12 * len.max(1.0));
    }

    #[test]
    fn eigenvalue_scales_with_length(len in 0.2f64..4.0) {
        let grid = build_grid(DomainSpec::interval(0.0, len, 200)).unwrap();
        let eig = EigenData::compute(&grid, 1.0).unwrap();
        let unit = build_grid(DomainSpec::interval(0.0, 1.0, 200)).unwrap();
        let eu = EigenData::compute(&unit, 1.0).unwrap();
        prop_assert!((eig.lambda1 * len * len - eu.lambda1).abs() < 1e-8 * eu.lambda1);
    }

    #[test]
    fn auxiliary_solution_stays_in_box(t in 0.02f64..0.98) {
        let grid = build_grid(DomainSpec::interval(0.0, 1.0, 128)).unwrap();
        let eig = EigenData::compute(&grid, 1.0).unwrap();
        let fam = make_family_b(1, None, &eig.constants(&grid)).unwrap();
        let tf = truncate(&fam.f, t).unwrap();
        let res = solve_auxiliary(&grid, &tf, &eig, &SolveOptions::default()).unwrap();
        prop_assert!(res.u.iter().all(|&u| u > 0.0 && u <= tf.s_alpha() + 1e-12));
        prop_assert!(res.c_alpha < 0.0);
        prop_assert!(res.residual <= res.tolerance);
    }
}
