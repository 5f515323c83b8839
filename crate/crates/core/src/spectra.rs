//! Eigen-frame canonicalization: `H = U·Diag(α)·Uᵀ`, `c̃ = Uᵀc`.

use nalgebra::{DMatrix, DVector};

use crate::error::{PrsError, Result};
use crate::instance::PrsInstance;
use crate::tolerances::Tolerances;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

/// An instance expressed in the eigenbasis of `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Eigenvalues in nondecreasing order.
    pub alphas: DVector<f64>,
    /// Orthogonal matrix whose columns are the matching eigenvectors.
    pub basis: DMatrix<f64>,
    /// `Uᵀc`.
    pub c_rot: DVector<f64>,
    /// Multiplicity of the smallest eigenvalue.
    pub multiplicity_k: usize,
    pub sigma: f64,
    pub p: f64,
}

/// Eigendecomposes `H` with the default tie tolerance.
pub fn decompose(inst: &PrsInstance) -> Result<Spectrum> {
    decompose_with(inst, &Tolerances::default())
}

pub fn decompose_with(inst: &PrsInstance, tol: &Tolerances) -> Result<Spectrum> {
    let n = inst.dim();
    let eig = inst
        .h()
        .clone()
        .try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER)
        .ok_or(PrsError::EigFailure)?;

    let mut order: Vec<usize> = (0..n).collect();
    // sort_by is stable, so equal eigenvalues keep the solver's order
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let alphas = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut basis = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        basis.set_column(dst, &eig.eigenvectors.column(src));
    }
    let c_rot = basis.transpose() * inst.c();

    let mut spec = Spectrum {
        alphas,
        basis,
        c_rot,
        multiplicity_k: 1,
        sigma: inst.sigma(),
        p: inst.p(),
    };
    let cut = tol.tie * spec.scale();
    spec.multiplicity_k = spec
        .alphas
        .iter()
        .take_while(|&&a| a - spec.alphas[0] <= cut)
        .count();
    Ok(spec)
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    /// `max(1, |α₁|, |αₙ|)`.
    pub fn scale(&self) -> f64 {
        let n = self.dim();
        1f64.max(self.alphas[0].abs()).max(self.alphas[n - 1].abs())
    }

    pub fn alpha_min(&self) -> f64 {
        self.alphas[0]
    }

    /// Norm of the projection of `c` onto the eigenspace of `α₁`.
    pub fn leading_block_norm(&self) -> f64 {
        self.c_rot.rows(0, self.multiplicity_k).norm()
    }

    /// Columns of `U` spanning the eigenspace of `α₁`.
    pub fn leading_basis(&self) -> DMatrix<f64> {
        self.basis.columns(0, self.multiplicity_k).into_owned()
    }

    /// Maps eigen-frame coordinates back: `x = U y`.
    pub fn to_original(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(y)?;
        Ok(&self.basis * y)
    }

    /// Maps original coordinates into the eigen frame: `y = Uᵀ x`.
    pub fn to_rotated(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x)?;
        Ok(self.basis.transpose() * x)
    }

    /// `Σ (αᵢ/2) yᵢ² + c̃ᵀy + (σ/p)‖y‖ᵖ`.
    pub fn diagonal_objective(&self, y: &DVector<f64>) -> f64 {
        let quad: f64 = self
            .alphas
            .iter()
            .zip(y.iter())
            .map(|(a, v)| 0.5 * a * v * v)
            .sum();
        quad + self.c_rot.dot(y) + self.sigma / self.p * y.norm().powf(self.p)
    }

    fn check_len(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(PrsError::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }
}
