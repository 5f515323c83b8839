//! Global minimization of the quartic model (`p = 4`) under a few two-sided
//! linear constraints.
//!
//! The minimum over `{l ≤ Ax ≤ u}` is attained either in the relative
//! interior of the region, where it must be an unconstrained local minimizer
//! (a global one, or the local-nonglobal one), or on a facet `aⱼᵀx = lⱼ` or
//! `aⱼᵀx = uⱼ`. On a facet the substitution `x = x̂ + Pz` gives a quartic
//! model of the same form in one dimension less, so the same test recurses
//! until no constraint is left or the facet is a single point.
//!
//! Subproblems are identified by the set of fixed facets, so a face reached
//! along several orders is solved once. Each level of the recursion is
//! evaluated in parallel and reduced with a plain minimum.

use std::collections::HashSet;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{PrsError, Result};
use crate::global::{solve_global_in_frame, GlobalSet, GlobalSolution};
use crate::instance::PrsInstance;
use crate::local::solve_local_in_frame;
use crate::polyhedron::{rank_and_null_space, SlabConstraints, RANK_TOL};
use crate::spectra::decompose_with;
use crate::tolerances::Tolerances;

/// Largest number of constraints accepted.
pub const MAX_CONSTRAINTS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FacetSide {
    Lower,
    Upper,
}

impl FacetSide {
    pub fn as_str(self) -> &'static str {
        match self {
            FacetSide::Lower => "lower",
            FacetSide::Upper => "upper",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedSolution {
    pub point: DVector<f64>,
    pub value: f64,
    /// Facets fixed on the branch that produced `point`, as
    /// `(constraint index, side)`, sorted by index.
    pub facet_trace: Vec<(usize, FacetSide)>,
    /// Number of facet subproblems solved.
    pub subproblems: usize,
}

/// A facet `aⱼᵀx = b` parametrized as `x = shift + basis · z`.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetReduction {
    /// The quartic model in `z`; `None` when the facet is a single point.
    pub instance: Option<PrsInstance>,
    /// Remaining constraints in `z`. Rows that became constant and are
    /// satisfied are dropped.
    pub constraints: SlabConstraints,
    /// Index (into the input constraints) of each remaining row.
    pub kept: Vec<usize>,
    pub shift: DVector<f64>,
    pub basis: DMatrix<f64>,
    /// `g(shift)`, the constant dropped from the reduced objective.
    pub offset: f64,
}

impl FacetReduction {
    pub fn back_map(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.shift + &self.basis * z
    }

    /// Reduced objective plus the recorded constant.
    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        self.offset + self.instance.as_ref().map_or(0.0, |i| i.objective(z))
    }
}

/// Restricts the quartic model to the facet `aⱼᵀx = lⱼ` (or `uⱼ`).
///
/// With `x̂ = b aⱼ/‖aⱼ‖²` and `P` an orthonormal basis of `aⱼ^⊥`, and
/// `w = ‖x̂‖²`, the model becomes
/// `½ zᵀ(PᵀHP + σwI)z + (Pᵀ(Hx̂ + c))ᵀz + (σ/4)‖z‖⁴ + g(x̂)`.
pub fn null_space_reduce(
    inst: &PrsInstance,
    cons: &SlabConstraints,
    j: usize,
    side: FacetSide,
) -> Result<FacetReduction> {
    if inst.p() != 4.0 {
        return Err(PrsError::RequiresQuartic(inst.p()));
    }
    let n = inst.dim();
    let a = cons.rows().row(j).transpose();
    let a_norm = a.norm();
    if a_norm <= RANK_TOL * cons.max_row_norm() || a_norm == 0.0 {
        return Err(PrsError::DegenerateRow(j));
    }
    let b = match side {
        FacetSide::Lower => cons.lower()[j],
        FacetSide::Upper => cons.upper()[j],
    };
    let shift = &a * (b / (a_norm * a_norm));
    let basis = orthogonal_complement(&a);
    let w = shift.norm_squared();
    let sigma = inst.sigma();

    let mut kept = Vec::new();
    for i in (0..cons.m()).filter(|&i| i != j) {
        let row = cons.rows().row(i);
        let reduced = &row * &basis;
        let row_norm = row.norm();
        if reduced.norm() <= RANK_TOL * row_norm {
            // parallel to aⱼ: constant on the facet
            let v = (row * &shift)[0];
            let slack = 1e-8 * (1.0 + shift.norm()) * row_norm;
            if v < cons.lower()[i] - slack || v > cons.upper()[i] + slack {
                return Err(PrsError::Infeasible);
            }
        } else {
            kept.push(i);
        }
    }
    let m = kept.len();
    let rows = DMatrix::from_fn(m, n - 1, |r, c| (cons.rows().row(kept[r]) * basis.column(c))[0]);
    let offsets = DVector::from_fn(m, |r, _| (cons.rows().row(kept[r]) * &shift)[0]);
    let lower = DVector::from_fn(m, |r, _| cons.lower()[kept[r]] - offsets[r]);
    let upper = DVector::from_fn(m, |r, _| cons.upper()[kept[r]] - offsets[r]);
    let constraints = SlabConstraints::from_parts(rows, lower, upper);

    let offset = inst.objective(&shift);
    let instance = if n > 1 {
        let h = basis.transpose() * inst.h() * &basis
            + DMatrix::identity(n - 1, n - 1) * (sigma * w);
        let c = basis.transpose() * (inst.h() * &shift + inst.c());
        Some(PrsInstance::new(h, c, sigma, 4.0)?)
    } else {
        None
    };
    Ok(FacetReduction {
        instance,
        constraints,
        kept,
        shift,
        basis,
        offset,
    })
}

/// Orthonormal basis of the complement of `a` from a Householder reflector.
fn orthogonal_complement(a: &DVector<f64>) -> DMatrix<f64> {
    let n = a.len();
    let mut v = a.clone();
    let alpha = if a[0] >= 0.0 { a.norm() } else { -a.norm() };
    v[0] += alpha;
    let vv = v.norm_squared();
    let q = DMatrix::identity(n, n) - &v * v.transpose() * (2.0 / vv);
    q.columns(1, n - 1).into_owned()
}

/// A point of the global solution set satisfying `cons`, if any.
///
/// For a sphere `center + B y`, `‖y‖ = ρ`, the constraints become a
/// polyhedron in `y`; the sphere meets it iff `min ‖y‖² ≤ ρ² ≤ max ‖y‖²`
/// over the polyhedron, and the witness is where the segment from the
/// minimum-norm point to a maximum-norm vertex (or a recession ray) crosses
/// the sphere.
pub fn intersect_global_set(sol: &GlobalSolution, cons: &SlabConstraints) -> Option<DVector<f64>> {
    match &sol.set {
        GlobalSet::Point(x) => cons.is_feasible(x).then(|| x.clone()),
        GlobalSet::Sphere {
            center,
            radius,
            basis,
        } => {
            let rho2 = radius * radius;
            let projected = cons.rows() * basis;
            let shifts = cons.rows() * center;
            let mut keep = Vec::new();
            for i in 0..cons.m() {
                let row_norm = cons.rows().row(i).norm();
                if projected.row(i).norm() <= RANK_TOL * row_norm {
                    let slack = 1e-8 * (1.0 + center.norm()) * row_norm;
                    if shifts[i] < cons.lower()[i] - slack || shifts[i] > cons.upper()[i] + slack {
                        return None;
                    }
                } else {
                    keep.push(i);
                }
            }
            let k = basis.ncols();
            let sub = SlabConstraints::from_parts(
                DMatrix::from_fn(keep.len(), k, |r, c| projected[(keep[r], c)]),
                DVector::from_fn(keep.len(), |r, _| cons.lower()[keep[r]] - shifts[keep[r]]),
                DVector::from_fn(keep.len(), |r, _| cons.upper()[keep[r]] - shifts[keep[r]]),
            );
            let y_min = sub.min_norm_point()?;
            let near = 1e-12 * rho2.max(1.0);
            if y_min.norm_squared() > rho2 + near {
                return None;
            }
            let (rank, null) = rank_and_null_space(sub.rows());
            let y = if rank < k {
                // unbounded along d: solve ‖y_min + s d‖² = ρ², s ≥ 0
                let d = null.column(0).into_owned();
                let yd = y_min.dot(&d);
                let s = -yd + (yd * yd - (y_min.norm_squared() - rho2)).max(0.0).sqrt();
                &y_min + d * s
            } else {
                let far = sub
                    .vertices()
                    .into_iter()
                    .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))?;
                if far.norm_squared() < rho2 - near {
                    return None;
                }
                segment_crossing(&y_min, &far, rho2)
            };
            let x = center + basis * y;
            cons.is_feasible(&x).then_some(x)
        }
    }
}

/// Point on `[from, to]` with squared norm `rho2`, assuming
/// `‖from‖² ≤ rho2 ≤ ‖to‖²`.
fn segment_crossing(from: &DVector<f64>, to: &DVector<f64>, rho2: f64) -> DVector<f64> {
    let d = to - from;
    let a = d.norm_squared();
    if a == 0.0 {
        return from.clone();
    }
    let b = from.dot(&d);
    let c = from.norm_squared() - rho2;
    let s = ((-b + (b * b - a * c).max(0.0).sqrt()) / a).clamp(0.0, 1.0);
    from + d * s
}

/// A subproblem: the model restricted to the face where the facets in
/// `trace` are active, parametrized as `x = shift + map · z`.
struct Face {
    trace: Vec<(usize, FacetSide)>,
    instance: Option<PrsInstance>,
    constraints: SlabConstraints,
    original: Vec<usize>,
    shift: DVector<f64>,
    map: DMatrix<f64>,
}

struct Pending {
    parent: Arc<Face>,
    row: usize,
    side: FacetSide,
    trace: Vec<(usize, FacetSide)>,
}

struct Candidate {
    point: DVector<f64>,
    value: f64,
    trace: Vec<(usize, FacetSide)>,
}

/// Global minimizer of a quartic model over `l ≤ Ax ≤ u`.
pub fn solve_constrained(inst: &PrsInstance, cons: &SlabConstraints) -> Result<ConstrainedSolution> {
    solve_constrained_with(inst, cons, &Tolerances::default())
}

pub fn solve_constrained_with(
    inst: &PrsInstance,
    cons: &SlabConstraints,
    tol: &Tolerances,
) -> Result<ConstrainedSolution> {
    if inst.p() != 4.0 {
        return Err(PrsError::RequiresQuartic(inst.p()));
    }
    if cons.dim() != inst.dim() {
        return Err(PrsError::DimensionMismatch {
            expected: inst.dim(),
            got: cons.dim(),
        });
    }
    if cons.m() > MAX_CONSTRAINTS {
        return Err(PrsError::CapExceeded {
            m: cons.m(),
            cap: MAX_CONSTRAINTS,
        });
    }
    if cons.feasible_point().is_none() {
        return Err(PrsError::Infeasible);
    }

    let n = inst.dim();
    let root = Arc::new(Face {
        trace: Vec::new(),
        instance: Some(inst.clone()),
        constraints: cons.clone(),
        original: (0..cons.m()).collect(),
        shift: DVector::zeros(n),
        map: DMatrix::identity(n, n),
    });

    let mut candidates: Vec<Candidate> = Vec::new();
    let mut subproblems = 0usize;
    let (cand, expand) = evaluate_face(&root, inst, cons, tol)?;
    candidates.extend(cand);
    let mut seen: HashSet<Vec<(usize, FacetSide)>> = HashSet::new();
    let mut level = if expand { children(&root, &mut seen) } else { Vec::new() };

    while !level.is_empty() {
        subproblems += level.len();
        let results: Vec<Result<Option<(Arc<Face>, Option<Candidate>, bool)>>> = level
            .into_par_iter()
            .map(|pending| {
                let face = match build_face(&pending) {
                    Ok(face) => Arc::new(face),
                    Err(PrsError::Infeasible) => return Ok(None),
                    Err(e) => return Err(e),
                };
                let (cand, expand) = evaluate_face(&face, inst, cons, tol)?;
                Ok(Some((face, cand, expand)))
            })
            .collect();
        let mut next = Vec::new();
        for r in results {
            let Some((face, cand, expand)) = r? else {
                continue;
            };
            candidates.extend(cand);
            if expand {
                next.extend(children(&face, &mut seen));
            }
        }
        level = next;
    }

    let best = merge_candidates(candidates)
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or(PrsError::NoCandidate)?;
    Ok(ConstrainedSolution {
        point: best.point,
        value: best.value,
        facet_trace: best.trace,
        subproblems,
    })
}

/// Drops candidates within `1e-8` in value and `1e-6` in position of an
/// earlier one.
fn merge_candidates(candidates: Vec<Candidate>) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = Vec::with_capacity(candidates.len());
    for c in candidates {
        let dup = out.iter().any(|o| {
            (o.value - c.value).abs() <= 1e-8 && (&o.point - &c.point).norm() <= 1e-6
        });
        if !dup {
            out.push(c);
        }
    }
    out
}

fn children(face: &Arc<Face>, seen: &mut HashSet<Vec<(usize, FacetSide)>>) -> Vec<Pending> {
    let mut out = Vec::new();
    if face.instance.is_none() {
        return out;
    }
    for row in 0..face.constraints.m() {
        let sides: &[FacetSide] = if face.constraints.is_equality(row) {
            &[FacetSide::Lower]
        } else {
            &[FacetSide::Lower, FacetSide::Upper]
        };
        for &side in sides {
            let bound = match side {
                FacetSide::Lower => face.constraints.lower()[row],
                FacetSide::Upper => face.constraints.upper()[row],
            };
            if !bound.is_finite() {
                continue;
            }
            let mut trace = face.trace.clone();
            trace.push((face.original[row], side));
            trace.sort();
            if seen.insert(trace.clone()) {
                out.push(Pending {
                    parent: Arc::clone(face),
                    row,
                    side,
                    trace,
                });
            }
        }
    }
    out
}

fn build_face(pending: &Pending) -> Result<Face> {
    let parent = &pending.parent;
    let inst = parent
        .instance
        .as_ref()
        .expect("children are only generated for faces of positive dimension");
    let red = match null_space_reduce(inst, &parent.constraints, pending.row, pending.side) {
        Ok(red) => red,
        // a row that became zero after earlier reductions fixes nothing new
        Err(PrsError::DegenerateRow(_)) => return Err(PrsError::Infeasible),
        Err(e) => return Err(e),
    };
    Ok(Face {
        trace: pending.trace.clone(),
        original: red.kept.iter().map(|&i| parent.original[i]).collect(),
        shift: &parent.shift + &parent.map * &red.shift,
        map: &parent.map * &red.basis,
        instance: red.instance,
        constraints: red.constraints,
    })
}

/// Candidate contributed by a face and whether its sub-faces still need to
/// be searched.
fn evaluate_face(
    face: &Face,
    inst: &PrsInstance,
    cons: &SlabConstraints,
    tol: &Tolerances,
) -> Result<(Option<Candidate>, bool)> {
    let candidate = |x: DVector<f64>| -> Option<Candidate> {
        cons.is_feasible(&x).then(|| Candidate {
            value: inst.objective(&x),
            point: x,
            trace: face.trace.clone(),
        })
    };
    let Some(reduced) = face.instance.as_ref() else {
        return Ok((candidate(face.shift.clone()), false));
    };

    let spec = decompose_with(reduced, tol)?;
    let (global, _) = solve_global_in_frame(reduced, &spec, tol)?;
    if let Some(z) = intersect_global_set(&global, &face.constraints) {
        let x = &face.shift + &face.map * z;
        if let Some(c) = candidate(x) {
            // the face's global minimum is feasible: nothing below it can win
            return Ok((Some(c), false));
        }
    }

    let local = match solve_local_in_frame(reduced, &spec, tol) {
        Ok(l) => l.minimizer,
        Err(PrsError::CertificateFailure { .. }) => None,
        Err(e) => return Err(e),
    };
    let interior = local.and_then(|m| {
        let margin = 1e-10 * (1.0 + m.point.norm());
        face.constraints
            .is_strictly_interior(&m.point, margin)
            .then(|| &face.shift + &face.map * &m.point)
    });
    Ok((interior.and_then(candidate), true))
}

/// `Π_{j<m} (2m − 2j)`, the bound on the number of facet subproblems.
pub fn facet_bound(m: usize) -> usize {
    (0..m).map(|j| 2 * m - 2 * j).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_dim(lower: f64, upper: f64) -> SlabConstraints {
        SlabConstraints::new(
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, lower),
            DVector::from_element(1, upper),
        )
        .unwrap()
    }

    #[test]
    fn feasible_global_minimizer_is_returned() {
        let inst = PrsInstance::diagonal(&[-2.0], &[0.0], 1.0, 4.0).unwrap();
        let sol = solve_constrained(&inst, &one_dim(0.5, 3.0)).unwrap();
        assert!((sol.point[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!((sol.value + 1.0).abs() < 1e-12);
        assert!(sol.facet_trace.is_empty());
    }

    #[test]
    fn facet_minimum_when_global_set_is_cut_off() {
        let inst = PrsInstance::diagonal(&[-2.0], &[0.0], 1.0, 4.0).unwrap();
        let sol = solve_constrained(&inst, &one_dim(2.0, 3.0)).unwrap();
        assert!((sol.point[0] - 2.0).abs() < 1e-12);
        assert!(sol.value.abs() < 1e-12);
        assert_eq!(sol.facet_trace, vec![(0, FacetSide::Lower)]);
        assert!(sol.subproblems <= facet_bound(1));
    }

    #[test]
    fn infeasible_and_cap() {
        let inst = PrsInstance::diagonal(&[1.0, 1.0], &[0.0, 0.0], 1.0, 4.0).unwrap();
        let cons = SlabConstraints::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]),
            DVector::from_vec(vec![0.0, 2.0]),
            DVector::from_vec(vec![1.0, 3.0]),
        )
        .unwrap();
        assert_eq!(solve_constrained(&inst, &cons), Err(PrsError::Infeasible));
        let big = SlabConstraints::new(
            DMatrix::from_element(13, 2, 1.0),
            DVector::zeros(13),
            DVector::from_element(13, 1.0),
        )
        .unwrap();
        assert!(matches!(
            solve_constrained(&inst, &big),
            Err(PrsError::CapExceeded { m: 13, .. })
        ));
    }

    #[test]
    fn reduction_of_a_coordinate_facet() {
        let inst = PrsInstance::diagonal(&[2.0, 4.0], &[0.0, 0.0], 1.0, 4.0).unwrap();
        let cons = SlabConstraints::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::from_element(1, 1.0),
            DVector::from_element(1, 2.0),
        )
        .unwrap();
        let red = null_space_reduce(&inst, &cons, 0, FacetSide::Lower).unwrap();
        let r = red.instance.as_ref().unwrap();
        assert!((r.h()[(0, 0)] - 5.0).abs() < 1e-14);
        assert!(r.c()[0].abs() < 1e-14);
        assert!((red.shift - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-14);
        assert!((red.offset - 1.25).abs() < 1e-14);
        assert!(red.basis[(0, 0)].abs() < 1e-14 && (red.basis[(1, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn homogeneous_facet() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0]);
        let inst = PrsInstance::new(h, DVector::from_vec(vec![0.3, -0.7]), 2.0, 4.0).unwrap();
        let cons = SlabConstraints::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DVector::from_element(1, 0.0),
            DVector::from_element(1, 1.0),
        )
        .unwrap();
        let red = null_space_reduce(&inst, &cons, 0, FacetSide::Lower).unwrap();
        assert_eq!(red.shift.norm(), 0.0);
        let r = red.instance.unwrap();
        let p = &red.basis;
        assert!((r.h() - p.transpose() * inst.h() * p).norm() < 1e-14);
        assert!((r.c() - p.transpose() * inst.c()).norm() < 1e-14);
    }

    #[test]
    fn sphere_intersection_examples() {
        let sphere = GlobalSolution {
            set: GlobalSet::Sphere {
                center: DVector::zeros(2),
                radius: 1.0,
                basis: DMatrix::identity(2, 2),
            },
            t_star: 1.0,
            value: -0.25,
        };
        let row = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let slab = |l: f64, u: f64| {
            SlabConstraints::new(row.clone(), DVector::from_element(1, l), DVector::from_element(1, u))
                .unwrap()
        };
        let w = intersect_global_set(&sphere, &slab(-2.0, 2.0)).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-12);
        assert!(intersect_global_set(&sphere, &slab(2.0, 3.0)).is_none());
        let w = intersect_global_set(&sphere, &slab(0.5, 0.5)).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12);
        assert!((w[1].abs() - 0.75f64.sqrt()).abs() < 1e-12);
    }
}
