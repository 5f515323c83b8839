//! The local-nonglobal minimizer.
//!
//! A local minimizer that is not global exists only if `α₁ < 0` is a simple
//! eigenvalue and `c` has a component along its eigenvector. It is then given
//! by a root `t̄` of the secular function on `(max{−α₂/σ, 0}, −α₁/σ)` with
//! `h′(t̄) > 0`, and there is at most one such root.

use nalgebra::DVector;

use crate::error::{PrsError, Result};
use crate::instance::{min_eigenvalue, PrsInstance};
use crate::polynomial::Poly;
use crate::secular::SecularContext;
use crate::spectra::{decompose_with, Spectrum};
use crate::tolerances::Tolerances;

/// Outcome of the local-nonglobal search, including which test rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalVerdict {
    Found,
    /// `α₁ ≥ 0`: every local minimizer is global.
    PositiveSemidefinite,
    /// `α₁ = α₂`.
    RepeatedSmallestEigenvalue,
    /// `c` is orthogonal to the eigenspace of `α₁`.
    OrthogonalToLeadingEigenspace,
    /// No secular root on the interval has `h′ > 0`.
    NoQualifyingRoot,
    /// A root exists but `h′` is zero to within tolerance.
    DegenerateRoot,
}

impl LocalVerdict {
    /// Rejected by the eigenvalue and gradient tests alone, before any root
    /// finding.
    pub fn is_fast_rejection(self) -> bool {
        matches!(
            self,
            Self::PositiveSemidefinite
                | Self::RepeatedSmallestEigenvalue
                | Self::OrthogonalToLeadingEigenspace
        )
    }

    pub fn reason(self) -> &'static str {
        match self {
            Self::Found => "found",
            Self::PositiveSemidefinite => "smallest eigenvalue is nonnegative",
            Self::RepeatedSmallestEigenvalue => "smallest eigenvalue is repeated",
            Self::OrthogonalToLeadingEigenspace => {
                "c is orthogonal to the smallest eigenvalue's eigenspace"
            }
            Self::NoQualifyingRoot => "no secular root with positive derivative",
            Self::DegenerateRoot => "secular root with vanishing derivative",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalMinimizer {
    /// The minimizer in original coordinates.
    pub point: DVector<f64>,
    /// The minimizer in the eigen frame.
    pub point_rot: DVector<f64>,
    /// `t̄ = ‖x̄‖^{p−2}`.
    pub t_val: f64,
    pub value: f64,
    /// Smallest eigenvalue of `∇²g(x̄)`.
    pub hess_min_eig: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalNonglobal {
    pub verdict: LocalVerdict,
    pub minimizer: Option<LocalMinimizer>,
}

impl LocalNonglobal {
    pub fn exists(&self) -> bool {
        self.minimizer.is_some()
    }

    fn rejected(verdict: LocalVerdict) -> Self {
        Self {
            verdict,
            minimizer: None,
        }
    }
}

pub fn solve_local_nonglobal(inst: &PrsInstance) -> Result<LocalNonglobal> {
    solve_local_nonglobal_with(inst, &Tolerances::default())
}

pub fn solve_local_nonglobal_with(inst: &PrsInstance, tol: &Tolerances) -> Result<LocalNonglobal> {
    let spec = decompose_with(inst, tol)?;
    solve_local_in_frame(inst, &spec, tol)
}

pub(crate) fn solve_local_in_frame(
    inst: &PrsInstance,
    spec: &Spectrum,
    tol: &Tolerances,
) -> Result<LocalNonglobal> {
    let ctx = SecularContext::from_spectrum(spec, tol);
    if spec.alpha_min() >= -tol.psd * spec.scale() {
        return Ok(LocalNonglobal::rejected(LocalVerdict::PositiveSemidefinite));
    }
    if spec.multiplicity_k > 1 {
        return Ok(LocalNonglobal::rejected(
            LocalVerdict::RepeatedSmallestEigenvalue,
        ));
    }
    if spec.leading_block_norm() <= ctx.coeff_cut {
        return Ok(LocalNonglobal::rejected(
            LocalVerdict::OrthogonalToLeadingEigenspace,
        ));
    }

    let roots = ctx.local_roots()?;
    let qualifying = roots
        .iter()
        .find(|r| r.h_prime > tol.deriv * (1.0 + r.t.abs()));
    let Some(root) = qualifying else {
        let degenerate = roots.iter().any(|r| r.h_prime >= 0.0);
        return Ok(LocalNonglobal::rejected(if degenerate {
            LocalVerdict::DegenerateRoot
        } else {
            LocalVerdict::NoQualifyingRoot
        }));
    };

    let t = root.t;
    let y = DVector::from_iterator(
        spec.dim(),
        spec.alphas
            .iter()
            .zip(spec.c_rot.iter())
            .map(|(a, c)| -c / (spec.sigma * t + a)),
    );
    let x = spec.to_original(&y)?;
    let hess_min_eig = min_eigenvalue(&inst.hessian(&x));
    if hess_min_eig <= 0.0 {
        return Err(PrsError::CertificateFailure {
            min_eig: hess_min_eig,
        });
    }
    Ok(LocalNonglobal {
        verdict: LocalVerdict::Found,
        minimizer: Some(LocalMinimizer {
            value: inst.objective(&x),
            point: x,
            point_rot: y,
            t_val: t,
            hess_min_eig,
        }),
    })
}

/// `c̃₁x̄₁ > 0` and `c̃ᵢx̄ᵢ ≤ 0` for `i ≥ 2`: the sign pattern of a
/// local-nonglobal minimizer in the eigen frame (simple `α₁`).
pub fn check_local_sign_structure(spec: &Spectrum, x_rot: &DVector<f64>) -> bool {
    let slack = Tolerances::default().sign * spec.c_rot.norm() * x_rot.norm();
    spec.c_rot[0] * x_rot[0] > 0.0
        && spec
            .c_rot
            .iter()
            .zip(x_rot.iter())
            .skip(1)
            .all(|(c, x)| c * x <= slack)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    /// Positive definite Hessian.
    LocalMin,
    /// Anything else (saddle or local maximum).
    Saddle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub point: DVector<f64>,
    pub t: f64,
    pub value: f64,
    pub hess_min_eig: f64,
    /// `h′(t)`, from the enumeration's own evaluation.
    pub h_prime: f64,
    pub kind: CriticalKind,
}

const ENUMERATION_MAX_DIM: usize = 8;

/// Every critical point of a generic quartic (`p = 4`) instance.
///
/// With `p = 4` the secular equation clears to the degree-`2n+1` polynomial
/// `t·Π(σt+αᵢ)² − Σⱼ c̃ⱼ² Π_{i≠j}(σt+αᵢ)²`, whose positive real roots are
/// found from its companion matrix and each classified by the smallest
/// eigenvalue of `∇²g`. Points come back sorted by objective value.
pub fn enumerate_critical_points_p4(inst: &PrsInstance) -> Result<Vec<CriticalPoint>> {
    let tol = Tolerances::default();
    if inst.p() != 4.0 {
        return Err(PrsError::RequiresQuartic(inst.p()));
    }
    let n = inst.dim();
    if n > ENUMERATION_MAX_DIM {
        return Err(PrsError::GenericityViolated(format!(
            "dimension {n} exceeds {ENUMERATION_MAX_DIM}"
        )));
    }
    let spec = decompose_with(inst, &tol)?;
    let sigma = spec.sigma;
    let alphas = spec.alphas.as_slice();
    let c = spec.c_rot.as_slice();
    let gap = tol.tie * spec.scale();
    if alphas.windows(2).any(|w| w[1] - w[0] <= gap) {
        return Err(PrsError::GenericityViolated("repeated eigenvalue".into()));
    }
    let cut = tol.coeff * spec.c_rot.norm();
    if c.iter().any(|ci| ci.abs() <= cut) || spec.c_rot.norm() == 0.0 {
        return Err(PrsError::GenericityViolated(
            "zero gradient component in the eigen frame".into(),
        ));
    }

    let factor = |i: usize| Poly::linear(alphas[i], sigma);
    let mut all = Poly::constant(1.0);
    for i in 0..n {
        all = all.mul(&factor(i)).mul(&factor(i));
    }
    let mut cleared = Poly::linear(0.0, 1.0).mul(&all);
    for j in 0..n {
        let mut others = Poly::constant(1.0);
        for i in (0..n).filter(|&i| i != j) {
            others = others.mul(&factor(i)).mul(&factor(i));
        }
        cleared = cleared.add(&others.scale(-c[j] * c[j]));
    }

    // direct evaluation of h and h′ for p = 4
    let h = |t: f64| -> (f64, f64) {
        let mut f = -t;
        let mut df = -1.0;
        for i in 0..n {
            let d = sigma * t + alphas[i];
            f += c[i] * c[i] / (d * d);
            df -= 2.0 * sigma * c[i] * c[i] / (d * d * d);
        }
        (f, df)
    };

    let mut ts: Vec<f64> = Vec::new();
    for t0 in cleared.real_roots(1e-6) {
        if t0 <= 0.0 {
            continue;
        }
        let mut t = t0;
        let (mut best_f, _) = h(t);
        for _ in 0..50 {
            let (f, df) = h(t);
            if df == 0.0 || !f.is_finite() {
                break;
            }
            let next = t - f / df;
            if !(next > 0.0) {
                break;
            }
            let (f_next, _) = h(next);
            if f_next.abs() >= best_f.abs() {
                break;
            }
            best_f = f_next;
            t = next;
        }
        if !ts.iter().any(|&s| (s - t).abs() <= 1e-9 * (1.0 + t)) {
            ts.push(t);
        }
    }

    let mut points = Vec::with_capacity(ts.len());
    for t in ts {
        let y = DVector::from_iterator(n, (0..n).map(|i| -c[i] / (sigma * t + alphas[i])));
        let x = spec.to_original(&y)?;
        let hess_min_eig = min_eigenvalue(&inst.hessian(&x));
        points.push(CriticalPoint {
            value: inst.objective(&x),
            point: x,
            t,
            hess_min_eig,
            h_prime: h(t).1,
            kind: if hess_min_eig > 0.0 {
                CriticalKind::LocalMin
            } else {
                CriticalKind::Saddle
            },
        });
    }
    points.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(points)
}

/// Local minimizers among `points` whose value exceeds the lowest local
/// minimum by more than `slack · (1 + |v|)`.
pub fn local_nonglobal_points(points: &[CriticalPoint], slack: f64) -> Vec<&CriticalPoint> {
    let best = points
        .iter()
        .filter(|p| p.kind == CriticalKind::LocalMin)
        .map(|p| p.value)
        .fold(f64::INFINITY, f64::min);
    points
        .iter()
        .filter(|p| p.kind == CriticalKind::LocalMin && p.value > best + slack * (1.0 + best.abs()))
        .collect()
}
