//! Seeded random instance generators shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use prs_core::{KdspInstance, PrsInstance, SlabConstraints};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Haar-ish random orthogonal matrix from the QR factorization of a
/// Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let neg = -q.column(j);
            q.set_column(j, &neg);
        }
    }
    q
}

pub fn from_eigen(u: &DMatrix<f64>, alphas: &[f64]) -> DMatrix<f64> {
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(alphas));
    let h = u * d * u.transpose();
    (&h + h.transpose()) * 0.5
}

/// Dense instance with eigenvalues uniform in `[-3, 3]`, Gaussian `c` and
/// `σ ∈ [0.5, 2]`.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, p: f64) -> PrsInstance {
    let u = random_orthogonal(rng, n);
    let alphas: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let c = gaussian_vector(rng, n);
    let sigma = rng.random_range(0.5..2.0);
    PrsInstance::new(from_eigen(&u, &alphas), c, sigma, p).unwrap()
}

/// The ensemble shared by the global-solver checks: `count` instances with
/// `n ∈ {1..=6}` and `p` cycling through 3, 4, 5.5.
pub fn global_ensemble(seed: u64, count: usize) -> Vec<PrsInstance> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let n = r.random_range(1..=6);
            let p = [3.0, 4.0, 5.5][i % 3];
            random_instance(&mut r, n, p)
        })
        .collect()
}

/// Quartic instances with `n ∈ {1..=5}` for the local-nonglobal checks.
pub fn quartic_ensemble(seed: u64, count: usize) -> Vec<PrsInstance> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(1..=5);
            random_instance(&mut r, n, 4.0)
        })
        .collect()
}

/// Hard-case instance: `α₁ < 0` repeated `k` times, `c` orthogonal to its
/// eigenspace, and `Σ_{i>k} c̃ᵢ²/(αᵢ−α₁)² = ratio · (−α₁/σ)^{2/(p−2)}`.
/// `ratio < 1` gives a sphere, `ratio = 1` the degenerate boundary.
pub fn hard_case_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    k: usize,
    p: f64,
    ratio: f64,
) -> PrsInstance {
    assert!(n > k);
    let sigma: f64 = rng.random_range(0.5..2.0);
    let alpha1: f64 = rng.random_range(-3.0..-0.5);
    let mut alphas = vec![alpha1; k];
    for _ in k..n {
        alphas.push(alpha1 + rng.random_range(0.5..4.0));
    }
    let mut c_rot = DVector::zeros(n);
    for i in k..n {
        c_rot[i] = rng.sample::<f64, _>(StandardNormal);
    }
    let t_b = -alpha1 / sigma;
    let budget = t_b.powf(2.0 / (p - 2.0));
    let weighted: f64 = (k..n)
        .map(|i| (c_rot[i] / (alphas[i] - alpha1)).powi(2))
        .sum();
    c_rot *= (ratio * budget / weighted).sqrt();
    let u = random_orthogonal(rng, n);
    PrsInstance::new(from_eigen(&u, &alphas), &u * c_rot, sigma, p).unwrap()
}

/// Random slabs `aᵢᵀx₀ − wₗ ≤ aᵢᵀx ≤ aᵢᵀx₀ + wᵤ` around a random point, so
/// the region always has interior.
pub fn random_slabs(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SlabConstraints {
    let x0 = gaussian_vector(rng, n);
    let rows = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let ax = &rows * &x0;
    let lower = DVector::from_fn(m, |i, _| ax[i] - rng.random_range(0.1..1.5));
    let upper = DVector::from_fn(m, |i, _| ax[i] + rng.random_range(0.1..1.5));
    SlabConstraints::new(rows, lower, upper).unwrap()
}

pub fn random_kdsp(rng: &mut ChaCha8Rng, n: usize, k: usize) -> KdspInstance {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v: i64 = rng.random_range(0..=9);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    KdspInstance::new(d, k).unwrap()
}

/// Uniform point in the ball of radius `radius` in `ℝⁿ`.
pub fn uniform_in_ball(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> DVector<f64> {
    let dir = gaussian_vector(rng, n).normalize();
    let r: f64 = rng.random_range(0.0f64..1.0).powf(1.0 / n as f64);
    dir * (radius * r)
}

/// `‖(H + σ‖x‖^{p−2}I)x + c‖`.
pub fn stationarity(inst: &PrsInstance, x: &DVector<f64>) -> f64 {
    inst.gradient(x).norm()
}

pub fn spectral_scale(inst: &PrsInstance) -> f64 {
    let e = inst.h().clone().symmetric_eigenvalues();
    1f64.max(e.min().abs()).max(e.max().abs())
}
