mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use prs_core::global::GlobalSet;
use prs_core::{check_sign_structure, decompose, solve_global, solve_global_convex_oracle, PrsInstance};
use rand::seq::SliceRandom;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn t_star_is_the_norm_power(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let p = [3.0, 4.0, 5.5][(seed % 3) as usize];
        let inst = random_instance(&mut r, n, p);
        let sol = solve_global(&inst).unwrap();
        let x = sol.representative();
        let expected = x.norm().powf(p - 2.0);
        prop_assert!((sol.t_star - expected).abs() <= 1e-9 * expected.max(1e-300));
        prop_assert!((inst.objective(&x) - sol.value).abs() <= 1e-12 * (1.0 + sol.value.abs()));
    }

    #[test]
    fn permuting_coordinates_permutes_the_solution(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n, 4.0);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let pm = DMatrix::from_fn(n, n, |i, j| if perm[i] == j { 1.0 } else { 0.0 });
        let permuted = PrsInstance::new(
            &pm * inst.h() * pm.transpose(),
            &pm * inst.c(),
            inst.sigma(),
            inst.p(),
        )
        .unwrap();
        let a = solve_global(&inst).unwrap();
        let b = solve_global(&permuted).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-10 * (1.0 + a.value.abs()));
        let xa = &pm * a.representative();
        prop_assert!((xa - b.representative()).norm() <= 1e-8 * (1.0 + a.representative().norm()));
    }

    #[test]
    fn every_minimizer_has_the_same_norm(seed in any::<u64>(), n in 3usize..=6, k in 2usize..=3, ratio in 0.05f64..0.9) {
        prop_assume!(k < n);
        let mut r = rng(seed);
        let p = [3.0, 4.0, 5.5][(seed % 3) as usize];
        let inst = hard_case_instance(&mut r, n, k, p, ratio);
        let sol = solve_global(&inst).unwrap();
        prop_assert!(sol.is_sphere());
        let target = sol.t_star.powf(1.0 / (p - 2.0));
        for _ in 0..20 {
            let u = gaussian_vector(&mut r, k);
            let x = sol.sphere_point(&u);
            prop_assert!((x.norm() - target).abs() <= 1e-9 * target);
        }
    }
}

#[test]
fn solution_beats_random_probes() {
    let mut r = rng(21);
    for inst in global_ensemble(0x91, 40) {
        let sol = solve_global(&inst).unwrap();
        let x = sol.representative();
        for _ in 0..2000 {
            let y = &x + uniform_in_ball(&mut r, inst.dim(), 0.5);
            assert!(inst.objective(&y) >= sol.value - 1e-12 * (1.0 + sol.value.abs()));
        }
    }
}

#[test]
fn sign_structure_on_every_solution() {
    for inst in global_ensemble(0x92, 100) {
        let spec = decompose(&inst).unwrap();
        let y = spec.to_rotated(&solve_global(&inst).unwrap().representative()).unwrap();
        assert!(check_sign_structure(&spec, &y));
    }
}

#[test]
fn convex_oracle_agrees_on_a_random_3x3() {
    let mut r = rng(0x33);
    for _ in 0..20 {
        let inst = random_instance(&mut r, 3, 4.0);
        let v = solve_global(&inst).unwrap().value;
        let w = solve_global_convex_oracle(&inst).unwrap();
        assert!((v - w).abs() <= 1e-6 * v.abs().max(1e-12));
    }
}

#[test]
fn hard_case_diagonal_example() {
    let inst = PrsInstance::diagonal(&[-1.0, -1.0, 1.0], &[0.0, 0.0, 0.0], 1.0, 4.0).unwrap();
    let sol = solve_global(&inst).unwrap();
    match &sol.set {
        GlobalSet::Sphere { center, radius, basis } => {
            assert!(center.norm() < 1e-14);
            assert!((radius - 1.0).abs() < 1e-12);
            assert_eq!(basis.ncols(), 2);
            assert!(basis.row(2).norm() < 1e-14);
        }
        GlobalSet::Point(_) => panic!("expected a sphere"),
    }
    assert!((sol.value + 0.25).abs() < 1e-12);
    assert!((sol.t_star - 1.0).abs() < 1e-12);
}

#[test]
fn convex_homogeneous_is_the_origin() {
    let inst = PrsInstance::diagonal(&[0.0, 2.0], &[0.0, 0.0], 1.0, 3.0).unwrap();
    let sol = solve_global(&inst).unwrap();
    assert_eq!(sol.set, GlobalSet::Point(DVector::zeros(2)));
    assert_eq!(sol.value, 0.0);
    assert_eq!(sol.t_star, 0.0);
}
