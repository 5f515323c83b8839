mod common;

use common::*;
use nalgebra::DVector;
use prs_core::local::{enumerate_critical_points_p4, local_nonglobal_points, CriticalKind};
use prs_core::{check_local_sign_structure, decompose, solve_global, solve_local_nonglobal, PrsInstance};
use rand::Rng;

#[test]
fn local_minimizer_survives_small_perturbations() {
    let mut r = rng(0x10c);
    let mut checked = 0;
    for inst in quartic_ensemble(0x10c, 300) {
        let Some(m) = solve_local_nonglobal(&inst).unwrap().minimizer else {
            continue;
        };
        checked += 1;
        let radius = 1e-3 * (1.0 + m.point.norm());
        for _ in 0..500 {
            let y = &m.point + uniform_in_ball(&mut r, inst.dim(), radius);
            assert!(inst.objective(&y) >= m.value - 1e-12 * (1.0 + m.value.abs()));
        }
    }
    assert!(checked > 20, "only {checked} instances had a local-nonglobal minimizer");
}

#[test]
fn certificates_hold_whenever_found() {
    for (i, inst) in global_ensemble(0x10d, 200).into_iter().enumerate() {
        let Some(m) = solve_local_nonglobal(&inst).unwrap().minimizer else {
            continue;
        };
        let spec = decompose(&inst).unwrap();
        let sigma = inst.sigma();
        let left = if inst.dim() > 1 { (-spec.alphas[1] / sigma).max(0.0) } else { 0.0 };
        let right = -spec.alphas[0] / sigma;
        assert!(m.t_val > left && m.t_val < right, "instance {i}");
        assert!(m.hess_min_eig > 0.0);
        assert!(stationarity(&inst, &m.point) <= 1e-8 * (1.0 + inst.c().norm()));
        let global = solve_global(&inst).unwrap().value;
        assert!(m.value > global - 1e-10);
        assert!(check_local_sign_structure(&spec, &m.point_rot));
    }
}

#[test]
fn at_most_one_local_nonglobal_in_random_3d() {
    let mut r = rng(0x3d);
    for _ in 0..100 {
        let inst = random_instance(&mut r, 3, 4.0);
        let points = enumerate_critical_points_p4(&inst).unwrap();
        assert!(local_nonglobal_points(&points, 1e-10).len() <= 1);
        for p in &points {
            assert!(stationarity(&inst, &p.point) <= 1e-8 * (1.0 + inst.c().norm()));
        }
    }
}

#[test]
fn double_well_classification() {
    let inst = PrsInstance::diagonal(&[-3.0], &[1.0], 1.0, 4.0).unwrap();
    let points = enumerate_critical_points_p4(&inst).unwrap();
    assert_eq!(points.len(), 3);
    for p in &points {
        let x = p.point[0];
        assert!((x.powi(3) - 3.0 * x + 1.0).abs() < 1e-10);
        let second = 3.0 * x * x - 3.0;
        assert_eq!(p.kind == CriticalKind::LocalMin, second > 0.0);
    }
    let local = solve_local_nonglobal(&inst).unwrap().minimizer.unwrap();
    let oracle = local_nonglobal_points(&points, 1e-10);
    assert_eq!(oracle.len(), 1);
    assert!((local.point[0] - oracle[0].point[0]).abs() < 1e-10);
    assert!(local.point[0] > 1.0);
}

#[test]
fn single_root_instance_is_global() {
    let inst = PrsInstance::diagonal(&[1.0], &[2.0], 1.0, 4.0).unwrap();
    let points = enumerate_critical_points_p4(&inst).unwrap();
    assert_eq!(points.len(), 1);
    assert!((points[0].t - 1.0).abs() < 1e-10);
    assert!((points[0].value + 1.25).abs() < 1e-10);
}

#[test]
fn random_cubic_and_high_p_instances_are_consistent() {
    let mut r = rng(0xc0b);
    for _ in 0..200 {
        let n = r.random_range(1..=5);
        let p = [3.0, 5.5][r.random_range(0..2)];
        let inst = random_instance(&mut r, n, p);
        let local = solve_local_nonglobal(&inst).unwrap();
        if let Some(m) = &local.minimizer {
            let g = inst.gradient(&m.point);
            assert!(g.norm() <= 1e-8 * (1.0 + inst.c().norm()));
            let probe = &m.point + DVector::from_element(n, 1e-4);
            assert!(inst.objective(&probe) > m.value);
        } else {
            assert!(!local.verdict.reason().is_empty());
        }
    }
}
