//! Exact solvers for the p-regularized quadratic subproblem
//!
//! ```text
//! minimize  g(x) = ½ xᵀHx + cᵀx + (σ/p)‖x‖ᵖ,   σ > 0, p > 2
//! ```
//!
//! The crate computes the full set of global minimizers (a single point or a
//! sphere inside the eigenspace of the smallest eigenvalue of `H`), the unique
//! local-nonglobal minimizer when one exists, and global minimizers of the
//! quartic (`p = 4`) problem under a small number of two-sided linear
//! constraints. A reduction from the k-dispersion-sum problem and a set of
//! brute-force oracles round it out.
//!
//! Everything operates on dense `nalgebra` matrices and is meant for small
//! to moderate dimensions.

pub mod error;
pub mod global;
pub mod constrained;
pub mod instance;
pub mod kdsp;
pub mod local;
pub mod oracles;
pub mod polyhedron;
pub mod polynomial;
pub mod secular;
pub mod spectra;
pub mod tolerances;

pub use error::{PrsError, Result};
pub use global::{
    check_sign_structure, solve_global, solve_global_convex_oracle, GlobalSolution,
};
pub use instance::PrsInstance;
pub use spectra::{decompose, Spectrum};
pub use tolerances::Tolerances;
pub use local::{
    check_local_sign_structure, enumerate_critical_points_p4, solve_local_nonglobal,
    CriticalKind, CriticalPoint, LocalNonglobal, LocalVerdict,
};
pub use constrained::{solve_constrained, ConstrainedSolution, FacetSide};
pub use polyhedron::SlabConstraints;
pub use kdsp::{kdsp_brute, kdsp_reduce, kdsp_reduce_with, KdspInstance, KdspReduction};
