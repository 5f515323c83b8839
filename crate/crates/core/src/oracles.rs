//! Brute-force and finite-difference oracles used to cross-check the
//! solvers. Nothing in the solvers depends on this module.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{PrsError, Result};
use crate::polyhedron::SlabConstraints;

/// Largest dimension accepted for full tensor grids.
pub const GRID_MAX_DIM: usize = 4;

/// Uniform tensor grid on the box `center ± halfwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub center: DVector<f64>,
    pub halfwidth: f64,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(center: DVector<f64>, halfwidth: f64, points_per_axis: usize) -> Result<Self> {
        if points_per_axis < 3 || !(halfwidth > 0.0) {
            return Err(PrsError::InvalidInstance(
                "grid needs at least 3 points per axis and a positive halfwidth".into(),
            ));
        }
        Ok(Self {
            center,
            halfwidth,
            points_per_axis,
        })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.halfwidth / (self.points_per_axis - 1) as f64
    }

    fn fill(&self, mut index: usize, out: &mut DVector<f64>) {
        let (ppa, step) = (self.points_per_axis, self.step());
        for axis in 0..out.len() {
            let i = index % ppa;
            index /= ppa;
            out[axis] = self.center[axis] - self.halfwidth + step * i as f64;
        }
    }
}

/// Best feasible grid point, then compass-search polish (step halving to
/// `1e-8`) over the coordinate directions and the diagonals of the
/// `{−2,…,2}ⁿ` stencil.
pub fn grid_minimize<F, P>(objective: F, grid: &GridSpec, feasible: P) -> Result<(DVector<f64>, f64)>
where
    F: Fn(&DVector<f64>) -> f64 + Sync,
    P: Fn(&DVector<f64>) -> bool + Sync,
{
    let ppa = grid.points_per_axis;
    let (x0, _) = best_grid_point(&objective, grid, &feasible, |_| (0, ppa - 1))?;
    let dirs = stencil_directions(grid.center.len());
    Ok(compass_polish(&objective, x0, grid.step(), |_| dirs.clone(), &feasible))
}

/// Same grid search for a region given by slab constraints. The polish adds
/// generators of the tangent cone of the nearly active constraints, which
/// lets it slide along slanted faces.
pub fn grid_minimize_linear<F>(
    objective: F,
    grid: &GridSpec,
    cons: &SlabConstraints,
) -> Result<(DVector<f64>, f64)>
where
    F: Fn(&DVector<f64>) -> f64 + Sync,
{
    let strict = |x: &DVector<f64>| cons.is_feasible_within(x, 1e-12 * (1.0 + x.norm()) * cons.max_row_norm());
    let (x0, _) = best_grid_point(&objective, grid, &strict, |x| first_axis_range(grid, cons, x))?;
    let base = stencil_directions(grid.center.len());
    let dirs = |(x, step): (&DVector<f64>, f64)| {
        let mut d = base.clone();
        d.extend(tangent_generators(cons, x, 2.0 * step));
        d
    };
    Ok(compass_polish_with(&objective, x0, grid.step(), dirs, &strict))
}

/// Grid indices along axis 0 outside which some constraint fails for every
/// point, given the other coordinates of `x`. Conservative by one index; the
/// points inside are still tested individually.
fn first_axis_range(grid: &GridSpec, cons: &SlabConstraints, x: &DVector<f64>) -> (usize, usize) {
    let n = x.len();
    let last = grid.points_per_axis - 1;
    let reach = grid.center.norm() + grid.halfwidth * (n as f64).sqrt();
    let slack = 1e-12 * (1.0 + reach) * cons.max_row_norm();
    let origin = grid.center[0] - grid.halfwidth;
    let step = grid.step();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..cons.m() {
        let row = cons.rows().row(i);
        let rest: f64 = (1..n).map(|j| row[j] * x[j]).sum();
        let (l, u) = (cons.lower()[i] - slack - rest, cons.upper()[i] + slack - rest);
        let a = row[0];
        if a == 0.0 {
            if l > 0.0 || u < 0.0 {
                return (1, 0);
            }
            continue;
        }
        let (from, to) = if a > 0.0 { (l / a, u / a) } else { (u / a, l / a) };
        lo = lo.max(from);
        hi = hi.min(to);
    }
    let lo_idx = ((lo - origin) / step).floor() - 1.0;
    let hi_idx = ((hi - origin) / step).ceil() + 1.0;
    if hi_idx < 0.0 || lo_idx > last as f64 || lo_idx > hi_idx {
        return (1, 0);
    }
    (lo_idx.max(0.0) as usize, hi_idx.min(last as f64) as usize)
}

/// Scans the grid with axis 0 innermost. `range` narrows the axis-0 indices
/// worth visiting for the current values of the other axes.
fn best_grid_point<F, P, R>(
    objective: &F,
    grid: &GridSpec,
    feasible: &P,
    range: R,
) -> Result<(DVector<f64>, f64)>
where
    F: Fn(&DVector<f64>) -> f64 + Sync,
    P: Fn(&DVector<f64>) -> bool + Sync,
    R: Fn(&DVector<f64>) -> (usize, usize) + Sync,
{
    let n = grid.center.len();
    if n > GRID_MAX_DIM {
        return Err(PrsError::TooLarge {
            n,
            cap: GRID_MAX_DIM,
        });
    }
    let ppa = grid.points_per_axis;
    let outer = ppa.pow(n as u32 - 1);
    let best = (0..outer)
        .into_par_iter()
        .map_init(
            || DVector::zeros(n),
            |x, rest| {
                grid.fill(rest * ppa, x);
                let (lo, hi) = range(x);
                let mut best = (f64::INFINITY, usize::MAX);
                for i in lo..=hi {
                    let idx = rest * ppa + i;
                    grid.fill(idx, x);
                    if feasible(x) {
                        let v = objective(x);
                        if v < best.0 {
                            best = (v, idx);
                        }
                    }
                }
                best
            },
        )
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    if best.1 == usize::MAX {
        return Err(PrsError::NoFeasibleGridPoint);
    }
    let mut x = DVector::zeros(n);
    grid.fill(best.1, &mut x);
    Ok((x, best.0))
}

/// Normalized nonzero vectors of `{−2,…,2}ⁿ` (`{−1,0,1}ⁿ` for `n > 3`),
/// coordinate directions first.
fn stencil_directions(n: usize) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(n);
            e[i] = s;
            out.push(e);
        }
    }
    let reach: i32 = if n <= 3 { 2 } else { 1 };
    let width = (2 * reach + 1) as usize;
    for mut idx in 0..width.pow(n as u32) {
        let mut v = DVector::zeros(n);
        for axis in 0..n {
            v[axis] = (idx % width) as f64 - reach as f64;
            idx /= width;
        }
        let norm = v.norm();
        if norm == 0.0 {
            continue;
        }
        v /= norm;
        if !out.iter().any(|w| (w - &v).norm() < 1e-12) {
            out.push(v);
        }
    }
    out
}

/// Directions that stay on or move inward from every constraint within
/// `eps` of a bound: null-space directions of each independent subset of the
/// nearly active rows, and the columns of its pseudo-inverse.
fn tangent_generators(cons: &SlabConstraints, x: &DVector<f64>, eps: f64) -> Vec<DVector<f64>> {
    let n = x.len();
    let mut active: Vec<DVector<f64>> = Vec::new();
    for i in 0..cons.m() {
        let a = cons.rows().row(i).transpose();
        let scale = a.norm();
        let v = a.dot(x);
        if v - cons.lower()[i] <= eps * scale {
            active.push(a.clone());
        }
        if cons.upper()[i] - v <= eps * scale {
            active.push(-a);
        }
    }
    let mut out = Vec::new();
    let count = active.len().min(12);
    for mask in 1u32..(1u32 << count) {
        let rows: Vec<&DVector<f64>> = (0..count).filter(|&i| mask >> i & 1 == 1).map(|i| &active[i]).collect();
        if rows.len() > n {
            continue;
        }
        let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
        let gram = &a * a.transpose();
        let Some(inv) = gram.clone().try_inverse() else {
            continue;
        };
        if gram.symmetric_eigenvalues().min() <= 1e-12 * a.norm_squared() {
            continue;
        }
        let pinv = a.transpose() * inv;
        for c in 0..pinv.ncols() {
            let d = pinv.column(c).into_owned();
            let norm = d.norm();
            if norm > 0.0 {
                out.push(d / norm);
            }
        }
        let (_, null) = crate::polyhedron::rank_and_null_space(&a);
        for c in 0..null.ncols() {
            let d = null.column(c).into_owned();
            out.push(-&d);
            out.push(d);
        }
    }
    out
}

fn compass_polish<F, P, D>(objective: &F, x: DVector<f64>, step: f64, dirs: D, feasible: &P) -> (DVector<f64>, f64)
where
    F: Fn(&DVector<f64>) -> f64,
    P: Fn(&DVector<f64>) -> bool,
    D: Fn(&DVector<f64>) -> Vec<DVector<f64>>,
{
    compass_polish_with(objective, x, step, |(x, _)| dirs(x), feasible)
}

fn compass_polish_with<F, P, D>(
    objective: &F,
    mut x: DVector<f64>,
    mut step: f64,
    dirs: D,
    feasible: &P,
) -> (DVector<f64>, f64)
where
    F: Fn(&DVector<f64>) -> f64,
    P: Fn(&DVector<f64>) -> bool,
    D: Fn((&DVector<f64>, f64)) -> Vec<DVector<f64>>,
{
    let mut fx = objective(&x);
    while step >= 1e-8 {
        let mut improved = false;
        for d in dirs((&x, step)) {
            let trial = &x + &d * step;
            if !feasible(&trial) {
                continue;
            }
            let ft = objective(&trial);
            if ft < fx {
                x = trial;
                fx = ft;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Central-difference gradient.
pub fn fd_gradient<F>(objective: F, x: &DVector<f64>, step: f64) -> DVector<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let n = x.len();
    let mut g = DVector::zeros(n);
    let mut probe = x.clone();
    for i in 0..n {
        probe[i] = x[i] + step;
        let fp = objective(&probe);
        probe[i] = x[i] - step;
        let fm = objective(&probe);
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    g
}

/// Central-difference Hessian from the four-point mixed stencil.
pub fn fd_hessian<F>(objective: F, x: &DVector<f64>, step: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    let mut probe = x.clone();
    let at = |probe: &mut DVector<f64>, i: usize, si: f64, j: usize, sj: f64| -> f64 {
        probe[i] += si * step;
        probe[j] += sj * step;
        let f = objective(probe);
        probe[i] = x[i];
        probe[j] = x[j];
        f
    };
    for i in 0..n {
        for j in i..n {
            let v = (at(&mut probe, i, 1.0, j, 1.0) - at(&mut probe, i, 1.0, j, -1.0)
                - at(&mut probe, i, -1.0, j, 1.0)
                + at(&mut probe, i, -1.0, j, -1.0))
                / (4.0 * step * step);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}
