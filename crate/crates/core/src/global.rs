//! Global minimizers of the regularized model.
//!
//! A point `x*` is a global minimizer exactly when
//! `(H + σ‖x*‖^{p−2} I) x* = −c` and `H + σ‖x*‖^{p−2} I ⪰ 0`. Every global
//! minimizer has the same norm, so the solution set is either a single point
//! or, in the hard case, a sphere inside the eigenspace of the smallest
//! eigenvalue.

use nalgebra::{DMatrix, DVector};

use crate::error::{PrsError, Result};
use crate::instance::PrsInstance;
use crate::secular::SecularContext;
use crate::spectra::{decompose_with, Spectrum};
use crate::tolerances::Tolerances;

/// Shape of the global solution set.
#[derive(Debug, Clone, PartialEq)]
pub enum GlobalSet {
    /// The unique global minimizer.
    Point(DVector<f64>),
    /// `{center + radius · basis · u : ‖u‖ = 1}`.
    Sphere {
        center: DVector<f64>,
        radius: f64,
        /// Orthonormal columns spanning the eigenspace of `α₁`.
        basis: DMatrix<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSolution {
    pub set: GlobalSet,
    /// `‖x*‖^{p−2}`.
    pub t_star: f64,
    /// Common objective value of every global minimizer.
    pub value: f64,
}

impl GlobalSolution {
    pub fn is_sphere(&self) -> bool {
        matches!(self.set, GlobalSet::Sphere { .. })
    }

    /// One concrete global minimizer.
    pub fn representative(&self) -> DVector<f64> {
        match &self.set {
            GlobalSet::Point(x) => x.clone(),
            GlobalSet::Sphere {
                center,
                radius,
                basis,
            } => center + basis.column(0) * *radius,
        }
    }

    /// Point of the solution set in direction `u` (ignored for a unique
    /// minimizer). `u` is normalized; a zero `u` maps to the representative.
    pub fn sphere_point(&self, u: &DVector<f64>) -> DVector<f64> {
        match &self.set {
            GlobalSet::Point(x) => x.clone(),
            GlobalSet::Sphere {
                center,
                radius,
                basis,
            } => {
                let norm = u.norm();
                if norm == 0.0 {
                    self.representative()
                } else {
                    center + basis * u * (*radius / norm)
                }
            }
        }
    }
}

/// Global solution set with default tolerances.
pub fn solve_global(inst: &PrsInstance) -> Result<GlobalSolution> {
    solve_global_with(inst, &Tolerances::default())
}

pub fn solve_global_with(inst: &PrsInstance, tol: &Tolerances) -> Result<GlobalSolution> {
    let spec = decompose_with(inst, tol)?;
    let (sol, _) = solve_global_in_frame(inst, &spec, tol)?;
    Ok(sol)
}

/// Solves in the eigen frame of `spec`; also returns the representative in
/// that frame.
pub(crate) fn solve_global_in_frame(
    inst: &PrsInstance,
    spec: &Spectrum,
    tol: &Tolerances,
) -> Result<(GlobalSolution, DVector<f64>)> {
    let n = spec.dim();
    let k = spec.multiplicity_k;
    let ctx = SecularContext::from_spectrum(spec, tol);
    let sigma = spec.sigma;

    let point_from_root = |ctx: &SecularContext, t: f64| -> DVector<f64> {
        DVector::from_iterator(
            n,
            ctx.alphas
                .iter()
                .zip(ctx.c_rot.iter())
                .map(|(a, c)| if *c == 0.0 { 0.0 } else { -c / (sigma * t + a) }),
        )
    };
    let unique = |y: DVector<f64>, t: f64| -> Result<(GlobalSolution, DVector<f64>)> {
        let x = spec.to_original(&y)?;
        let value = inst.objective(&x);
        Ok((
            GlobalSolution {
                set: GlobalSet::Point(x),
                t_star: t,
                value,
            },
            y,
        ))
    };

    if spec.leading_block_norm() > ctx.coeff_cut {
        let t = ctx.global_root()?;
        return unique(point_from_root(&ctx, t), t);
    }

    // c is orthogonal to the leading eigenspace: the reduced secular function
    let reduced = ctx.without_leading(k);
    let alpha1 = spec.alpha_min();
    let boundary = (-alpha1 / sigma).max(0.0);
    let hard = if alpha1 > 0.0 {
        None
    } else {
        let h_b = reduced.eval_h(boundary)?;
        (h_b <= 0.0).then_some(h_b)
    };

    match hard {
        None => match reduced.global_root() {
            Ok(t) => unique(point_from_root(&reduced, t), t),
            // α₁ > 0 with h(0) ≤ 0: c vanishes and the origin is optimal
            Err(PrsError::NoRoot) => unique(point_from_root(&reduced, 0.0), 0.0),
            Err(e) => Err(e),
        },
        Some(h_b) => {
            // hard case: t* = −α₁/σ and the leading block is free on a sphere
            let t = boundary;
            let mut y = DVector::zeros(n);
            for i in k..n {
                let c = reduced.c_rot[i];
                if c != 0.0 {
                    y[i] = -c / (spec.alphas[i] - alpha1);
                }
            }
            let radius_sq = -h_b;
            if radius_sq <= 1e-12 * reduced.t_power(t).max(1.0) {
                return unique(y, t);
            }
            let radius = radius_sq.max(0.0).sqrt();
            let center = spec.to_original(&y)?;
            let basis = spec.leading_basis();
            let sol = GlobalSolution {
                set: GlobalSet::Sphere {
                    center,
                    radius,
                    basis,
                },
                t_star: t,
                value: 0.0,
            };
            let rep = sol.representative();
            let value = inst.objective(&rep);
            let mut y_rep = y;
            y_rep[0] = radius;
            Ok((GlobalSolution { value, ..sol }, y_rep))
        }
    }
}

/// `c̃ᵢ xᵢ ≤ 0` for all `i` (with slack `τ_sign ‖c‖ ‖x‖`): the sign pattern
/// every global minimizer has in the eigen frame.
pub fn check_sign_structure(spec: &Spectrum, x_rot: &DVector<f64>) -> bool {
    check_sign_structure_with(spec, x_rot, &Tolerances::default())
}

pub fn check_sign_structure_with(spec: &Spectrum, x_rot: &DVector<f64>, tol: &Tolerances) -> bool {
    let slack = tol.sign * spec.c_rot.norm() * x_rot.norm();
    spec.c_rot
        .iter()
        .zip(x_rot.iter())
        .all(|(c, x)| c * x <= slack)
}

const ORACLE_MAX_SWEEPS: usize = 1_000_000;

/// Optimal value through the convex reformulation in `zᵢ = xᵢ²`:
///
/// ```text
/// minimize  −Σ |c̃ᵢ| √zᵢ + ½ Σ αᵢ zᵢ + (σ/p)(Σ zᵢ)^{p/2}   over z ≥ 0
/// ```
///
/// solved by cyclic coordinate descent with exact one-dimensional steps.
/// Intended only as an independent cross-check of [`solve_global`].
pub fn solve_global_convex_oracle(inst: &PrsInstance) -> Result<f64> {
    let spec = decompose_with(inst, &Tolerances::default())?;
    let n = spec.dim();
    let a: Vec<f64> = spec.c_rot.iter().map(|c| c.abs()).collect();
    let alphas = spec.alphas.as_slice();
    let (sigma, p) = (spec.sigma, spec.p);
    let m = 0.5 * p - 1.0;

    let objective = |z: &[f64]| -> f64 {
        let s: f64 = z.iter().sum();
        let mut f = sigma / p * s.powf(0.5 * p);
        for i in 0..n {
            f += -a[i] * z[i].sqrt() + 0.5 * alphas[i] * z[i];
        }
        f
    };

    let mut z = vec![0.0; n];
    let mut total: f64 = 0.0;
    let mut f_prev = objective(&z);
    for _ in 0..ORACLE_MAX_SWEEPS {
        let mut max_change: f64 = 0.0;
        for i in 0..n {
            let rest = (total - z[i]).max(0.0);
            let zi = coordinate_minimizer(a[i], alphas[i], sigma, m, rest);
            max_change = max_change.max((zi - z[i]).abs());
            total = rest + zi;
            z[i] = zi;
        }
        total = z.iter().sum();
        let f = objective(&z);
        let settled = max_change <= 1e-15 * total.max(1e-300)
            || (f_prev - f).abs() <= 1e-16 * f.abs().max(1e-300);
        f_prev = f;
        if settled {
            return Ok(f);
        }
    }
    Err(PrsError::ConvergenceFailure {
        sweeps: ORACLE_MAX_SWEEPS,
    })
}

/// Minimizer over `z ≥ 0` of `−a√z + ½αz + (σ/p)(rest + z)^{p/2}`.
///
/// With `r = √z` the stationarity condition is
/// `F(r) = −a + r(α + σ(rest + r²)^m) = 0`, and `F` changes sign exactly once
/// on `r > 0` because the objective is convex in `z`.
fn coordinate_minimizer(a: f64, alpha: f64, sigma: f64, m: f64, rest: f64) -> f64 {
    let slope = |r: f64| -> f64 { -a + r * (alpha + sigma * (rest + r * r).powf(m)) };
    if a == 0.0 {
        // stationary in z: α + σ(rest + z)^m = 0
        let edge = alpha + sigma * rest.powf(m);
        if edge >= 0.0 {
            return 0.0;
        }
        return ((-alpha / sigma).powf(1.0 / m) - rest).max(0.0);
    }
    let mut hi: f64 = 1.0;
    while slope(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    // bisection to the last representable bit
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    r * r
}
