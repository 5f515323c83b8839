mod common;

use common::*;
use nalgebra::DVector;
use prs_core::oracles::{fd_gradient, fd_hessian, grid_minimize, grid_minimize_linear, GridSpec};
use prs_core::{solve_global, PrsError, PrsInstance, SlabConstraints};

#[test]
fn grid_oracle_recovers_unconstrained_minima() {
    let mut r = rng(0x0a);
    for n in 1..=2 {
        for _ in 0..10 {
            let inst = random_instance(&mut r, n, 4.0);
            let sol = solve_global(&inst).unwrap();
            let half = 3.0 * sol.representative().norm().max(1.0);
            let grid = GridSpec::new(DVector::zeros(n), half, 201).unwrap();
            let (_, v) = grid_minimize(|x| inst.objective(x), &grid, |_| true).unwrap();
            assert!((v - sol.value).abs() <= 1e-9 * (1.0 + sol.value.abs()), "{v} vs {}", sol.value);
        }
    }
}

#[test]
fn linear_grid_oracle_slides_along_an_edge() {
    // minimize a linear tilt over a wedge: the optimum is the wedge's apex
    let cons = SlabConstraints::new(
        nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]),
        DVector::from_vec(vec![1.0, -1.0]),
        DVector::from_vec(vec![10.0, 1.0]),
    )
    .unwrap();
    let grid = GridSpec::new(DVector::zeros(2), 3.0, 31).unwrap();
    let (x, v) = grid_minimize_linear(|x| x[0] + 1e-3 * x[1] * x[1], &grid, &cons).unwrap();
    assert!(cons.is_feasible(&x));
    assert!((v - 0.001).abs() <= 1e-6, "{v} at {x}");
}

#[test]
fn grid_rejects_large_dimensions() {
    let grid = GridSpec::new(DVector::zeros(5), 1.0, 3).unwrap();
    assert!(matches!(grid_minimize(|_| 0.0, &grid, |_| true), Err(PrsError::TooLarge { .. })));
    assert!(GridSpec::new(DVector::zeros(1), 1.0, 2).is_err());
}

#[test]
fn finite_differences_match_analytic_derivatives() {
    let mut r = rng(0x0f);
    for p in [3.0, 4.0, 5.5] {
        for _ in 0..20 {
            let inst = random_instance(&mut r, 3, p);
            let x = gaussian_vector(&mut r, 3);
            let f = |y: &DVector<f64>| inst.objective(y);
            let g = inst.gradient(&x);
            assert!((fd_gradient(f, &x, 1e-5) - &g).norm() <= 1e-5 * g.norm().max(1.0));
            let h = inst.hessian(&x);
            assert!((fd_hessian(f, &x, 1e-4) - &h).norm() <= 1e-4 * h.norm().max(1.0));
        }
    }
}

#[test]
fn quartic_hessian_at_unit_vector() {
    let inst = PrsInstance::diagonal(&[-1.0, 2.0], &[0.5, 0.0], 2.0, 4.0).unwrap();
    let x = DVector::from_vec(vec![1.0, 0.0]);
    let h = inst.hessian(&x);
    // H + σI + 2σ e₁e₁ᵀ
    assert!((h[(0, 0)] - (-1.0 + 2.0 + 4.0)).abs() < 1e-14);
    assert!((h[(1, 1)] - (2.0 + 2.0)).abs() < 1e-14);
    assert!(h[(0, 1)].abs() < 1e-14);
}
