//! The k-dispersion-sum problem as a constrained quartic model.
//!
//! Choosing `k` of `n` sites to maximize the summed pairwise distance,
//! `min −xᵀDx` over `eᵀx = k, x ∈ {0,1}ⁿ`, is relaxed to the box with the
//! penalty `λ(k − xᵀx) + θ(k − xᵀx)²`. On the feasible box `k − xᵀx` equals
//! `Σ xᵢ(1 − xᵢ) ≥ 0` and vanishes exactly on 0/1 points.
//!
//! The squared term alone does not make the relaxation exact: next to a
//! binary point it grows like the square of the distance while `−xᵀDx` can
//! fall linearly, so a fractional point beats `d*` whatever `θ` is (the path
//! `0 – 1 – 2` with `k = 1` already shows it). The linear term fixes that.
//! With `λ ≥ −λ_min(D)` the function `−xᵀDx + λ(k − xᵀx)` is concave, so its
//! minimum over the polytope `{eᵀx = k, 0 ≤ x ≤ 1}` sits at a vertex, and
//! those vertices are exactly the 0/1 points. The quartic term is
//! nonnegative and zero there, so the relaxation value is `d*`.
//!
//! Expanding gives `−xᵀ(D + (λ + 2θk) I)x + θ‖x‖⁴ + λk + θk²`, a quartic
//! model with `n + 1` slab constraints.

use nalgebra::{DMatrix, DVector};

use crate::error::{PrsError, Result};
use crate::instance::PrsInstance;
use crate::polyhedron::SlabConstraints;

/// Largest `n` accepted by [`kdsp_brute`].
pub const BRUTE_MAX_N: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KdspInstance {
    d: DMatrix<i64>,
    k: usize,
}

impl KdspInstance {
    pub fn new(d: DMatrix<i64>, k: usize) -> Result<Self> {
        let n = d.nrows();
        if d.ncols() != n {
            return Err(PrsError::DimensionMismatch {
                expected: n,
                got: d.ncols(),
            });
        }
        if k == 0 || k > n {
            return Err(PrsError::InvalidK { k, n });
        }
        for i in 0..n {
            if d[(i, i)] != 0 {
                return Err(PrsError::InvalidInstance(format!("D[{i},{i}] must be zero")));
            }
            for j in 0..i {
                if d[(i, j)] != d[(j, i)] {
                    return Err(PrsError::InvalidInstance(format!(
                        "D is not symmetric at ({i}, {j})"
                    )));
                }
                if d[(i, j)] < 0 {
                    return Err(PrsError::InvalidInstance(format!(
                        "D[{i},{j}] is negative"
                    )));
                }
            }
        }
        Ok(Self { d, k })
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn distances(&self) -> &DMatrix<i64> {
        &self.d
    }

    fn max_distance(&self) -> i64 {
        self.d.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// `8k² · max|D| + 1`. Any positive value keeps the reduction exact once
    /// the linear weight is large enough; this one also dominates
    /// `4(d* − d^c)`, since both values lie in `[−k² max|D|, 0]`.
    pub fn default_theta(&self) -> f64 {
        let k = self.k as f64;
        8.0 * k * k * self.max_distance() as f64 + 1.0
    }

    /// Largest absolute row sum of `D`, a Gershgorin bound on `−λ_min(D)`.
    pub fn default_linear_weight(&self) -> f64 {
        self.d
            .row_iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<i64>())
            .max()
            .unwrap_or(0) as f64
    }

    /// `−xᵀDx + λ(k − xᵀx) + θ(k − xᵀx)²`.
    pub fn penalized_objective(&self, theta: f64, linear: f64, x: &DVector<f64>) -> f64 {
        let d = self.d.map(|v| v as f64);
        let gap = self.k as f64 - x.norm_squared();
        -x.dot(&(d * x)) + linear * gap + theta * gap * gap
    }
}

/// The quartic model and constraints produced from a KDSP instance.
#[derive(Debug, Clone, PartialEq)]
pub struct KdspReduction {
    pub instance: PrsInstance,
    pub constraints: SlabConstraints,
    pub theta: f64,
    /// Weight `λ` of the linear penalty.
    pub linear: f64,
    /// `λk + θk²`, to be added to the model's value.
    pub constant: f64,
}

/// Reduction with `λ` = [`KdspInstance::default_linear_weight`].
pub fn kdsp_reduce(kd: &KdspInstance, theta: f64) -> Result<KdspReduction> {
    kdsp_reduce_with(kd, theta, kd.default_linear_weight())
}

/// `H = −2(D + (λ + 2θk) I)`, `c = 0`, `σ = 4θ`, `p = 4`, with the box
/// `[0, 1]ⁿ` and the equality slab `eᵀx = k`. With `λ = 0` this is the pure
/// quartic penalty, which is a lower bound on `d*` but not always equal to it.
pub fn kdsp_reduce_with(kd: &KdspInstance, theta: f64, linear: f64) -> Result<KdspReduction> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(PrsError::InvalidInstance(format!("theta must be positive, got {theta}")));
    }
    if !(linear.is_finite() && linear >= 0.0) {
        return Err(PrsError::InvalidInstance(format!(
            "linear weight must be nonnegative, got {linear}"
        )));
    }
    let n = kd.n();
    let k = kd.k() as f64;
    let d = kd.distances().map(|v| v as f64);
    let h = (d + DMatrix::identity(n, n) * (linear + 2.0 * theta * k)) * -2.0;
    let instance = PrsInstance::new(h, DVector::zeros(n), 4.0 * theta, 4.0)?;

    let mut rows = DMatrix::zeros(n + 1, n);
    rows.view_mut((0, 0), (n, n)).fill_with_identity();
    rows.row_mut(n).fill(1.0);
    let mut lower = DVector::zeros(n + 1);
    let mut upper = DVector::from_element(n + 1, 1.0);
    lower[n] = k;
    upper[n] = k;
    let constraints = SlabConstraints::new(rows, lower, upper)?;
    Ok(KdspReduction {
        instance,
        constraints,
        theta,
        linear,
        constant: linear * k + theta * k * k,
    })
}

/// `d* = min −xᵀDx` over 0/1 vectors with `k` ones, by enumeration.
pub fn kdsp_brute(kd: &KdspInstance) -> Result<f64> {
    let n = kd.n();
    if n > BRUTE_MAX_N {
        return Err(PrsError::TooLarge {
            n,
            cap: BRUTE_MAX_N,
        });
    }
    let d = kd.distances();
    let mut best = i64::MAX;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != kd.k() {
            continue;
        }
        let chosen: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let total: i64 = chosen
            .iter()
            .flat_map(|&i| chosen.iter().map(move |&j| d[(i, j)]))
            .sum();
        best = best.min(-total);
    }
    Ok(best as f64)
}

/// Lower bound on `xᵀ(e − x)` at a fractional vertex of an integer system:
/// `(a − 1)/a²` with `a = maxⱼ‖aⱼ‖_∞`, or `½` when `a = 1`.
pub fn vertex_gap_bound(rows: &DMatrix<i64>) -> f64 {
    let a = rows.iter().map(|v| v.abs()).max().unwrap_or(0);
    if a >= 2 {
        let a = a as f64;
        (a - 1.0) / (a * a)
    } else {
        0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> DMatrix<i64> {
        DMatrix::from_row_slice(2, 2, &[0, 1, 1, 0])
    }

    #[test]
    fn reduction_formulas() {
        let kd = KdspInstance::new(pair(), 1).unwrap();
        let red = kdsp_reduce_with(&kd, 9.0, 0.0).unwrap();
        let expected = (DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
            + DMatrix::identity(2, 2) * 18.0)
            * -2.0;
        assert_eq!(*red.instance.h(), expected);
        assert_eq!(red.instance.sigma(), 36.0);
        assert_eq!(red.instance.c().norm(), 0.0);
        assert_eq!(red.constant, 9.0);
        assert_eq!(red.constraints.m(), 3);
        assert!(red.constraints.is_equality(2));
        assert!(!red.constraints.is_equality(0));

        let red = kdsp_reduce(&kd, 9.0).unwrap();
        assert_eq!(red.linear, 1.0);
        assert_eq!(red.instance.h()[(0, 0)], -38.0);
        assert_eq!(red.constant, 10.0);
    }

    #[test]
    fn reduced_objective_matches_penalty() {
        let kd = KdspInstance::new(DMatrix::from_row_slice(3, 3, &[0, 2, 5, 2, 0, 1, 5, 1, 0]), 2)
            .unwrap();
        let theta = kd.default_theta();
        let red = kdsp_reduce(&kd, theta).unwrap();
        let x = DVector::from_vec(vec![0.3, 0.9, 0.8]);
        let lhs = red.instance.objective(&x) + red.constant;
        let rhs = kd.penalized_objective(theta, red.linear, &x);
        assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn brute_force_values() {
        assert_eq!(kdsp_brute(&KdspInstance::new(pair(), 2).unwrap()).unwrap(), -2.0);
        let d = DMatrix::from_row_slice(3, 3, &[0, 4, 7, 4, 0, 2, 7, 2, 0]);
        assert_eq!(kdsp_brute(&KdspInstance::new(d.clone(), 1).unwrap()).unwrap(), 0.0);
        assert_eq!(kdsp_brute(&KdspInstance::new(d, 2).unwrap()).unwrap(), -14.0);
        let big = KdspInstance::new(DMatrix::zeros(21, 21), 2).unwrap();
        assert!(matches!(kdsp_brute(&big), Err(PrsError::TooLarge { .. })));
    }

    #[test]
    fn invalid_k() {
        assert_eq!(
            KdspInstance::new(pair(), 3),
            Err(PrsError::InvalidK { k: 3, n: 2 })
        );
        assert!(KdspInstance::new(pair(), 0).is_err());
    }

    #[test]
    fn vertex_gap_bound_branches() {
        assert_eq!(vertex_gap_bound(&DMatrix::from_row_slice(1, 3, &[1, -1, 1])), 0.5);
        assert_eq!(vertex_gap_bound(&DMatrix::from_row_slice(1, 2, &[2, 1])), 0.25);
        assert_eq!(vertex_gap_bound(&DMatrix::from_row_slice(1, 2, &[-3, 1])), 2.0 / 9.0);
    }
}
