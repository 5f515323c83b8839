//! The problem data and the objective with its derivatives.

use nalgebra::{DMatrix, DVector};

use crate::error::{PrsError, Result};

/// `minimize ½ xᵀHx + cᵀx + (σ/p)‖x‖ᵖ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrsInstance {
    h: DMatrix<f64>,
    c: DVector<f64>,
    sigma: f64,
    p: f64,
}

/// Largest absolute entry, 0 for an empty matrix.
pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

impl PrsInstance {
    /// Validates and stores an instance. `H` must be symmetric to within
    /// `1e-12 · max(1, max|H|)`; it is symmetrized exactly afterwards.
    pub fn new(h: DMatrix<f64>, c: DVector<f64>, sigma: f64, p: f64) -> Result<Self> {
        let n = c.len();
        if n == 0 {
            return Err(PrsError::InvalidInstance("dimension must be at least 1".into()));
        }
        if h.nrows() != n || h.ncols() != n {
            return Err(PrsError::DimensionMismatch {
                expected: n,
                got: if h.nrows() != n { h.nrows() } else { h.ncols() },
            });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(PrsError::InvalidInstance(format!("sigma must be positive, got {sigma}")));
        }
        if !(p.is_finite() && p > 2.0) {
            return Err(PrsError::InvalidInstance(format!("p must exceed 2, got {p}")));
        }
        if h.iter().chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(PrsError::InvalidInstance("non-finite entries".into()));
        }
        let asymmetry = max_abs(&(&h - h.transpose()));
        if asymmetry > 1e-12 * max_abs(&h).max(1.0) {
            return Err(PrsError::NonSymmetric { asymmetry });
        }
        let h = (&h + h.transpose()) * 0.5;
        Ok(Self { h, c, sigma, p })
    }

    /// Instance with a diagonal `H`.
    pub fn diagonal(diag: &[f64], c: &[f64], sigma: f64, p: f64) -> Result<Self> {
        let h = DMatrix::from_diagonal(&DVector::from_column_slice(diag));
        Self::new(h, DVector::from_column_slice(c), sigma, p)
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `g(x)`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        let n = self.dim();
        let mut quad = 0.0;
        for j in 0..n {
            let col = self.h.column(j);
            let mut hx = 0.0;
            for i in 0..n {
                hx += col[i] * x[i];
            }
            quad += hx * x[j];
        }
        let norm_sq = x.norm_squared();
        let reg = if self.p == 4.0 {
            norm_sq * norm_sq
        } else {
            norm_sq.powf(0.5 * self.p)
        };
        0.5 * quad + self.c.dot(x) + self.sigma / self.p * reg
    }

    /// `∇g(x) = (H + σ‖x‖^{p−2} I) x + c`.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let shift = self.sigma * x.norm().powf(self.p - 2.0);
        &self.h * x + x * shift + &self.c
    }

    /// `∇²g(x) = H + σ‖x‖^{p−2} I + σ(p−2)‖x‖^{p−4} xxᵀ`.
    ///
    /// The rank-one term is formed from the unit direction, so the value at
    /// `x = 0` is the limit `H` for every `p > 2`.
    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let norm = x.norm();
        let mut hess = self.h.clone();
        if norm > 0.0 {
            let r = norm.powf(self.p - 2.0);
            let u = x / norm;
            hess += DMatrix::identity(n, n) * (self.sigma * r);
            hess += &u * u.transpose() * (self.sigma * (self.p - 2.0) * r);
        }
        hess
    }

    /// Smallest eigenvalue of `H + σ‖x‖^{p−2} I`.
    pub fn shifted_min_eigenvalue(&self, x: &DVector<f64>) -> f64 {
        let n = self.dim();
        let shift = self.sigma * x.norm().powf(self.p - 2.0);
        min_eigenvalue(&(&self.h + DMatrix::identity(n, n) * shift))
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(PrsInstance::diagonal(&[1.0], &[0.0], 0.0, 4.0).is_err());
        assert!(PrsInstance::diagonal(&[1.0], &[0.0], 1.0, 2.0).is_err());
        assert!(PrsInstance::diagonal(&[], &[], 1.0, 3.0).is_err());
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.1, 0.0]);
        assert!(matches!(
            PrsInstance::new(h, DVector::zeros(2), 1.0, 3.0),
            Err(PrsError::NonSymmetric { .. })
        ));
    }

    #[test]
    fn objective_of_one_dimensional_quartic() {
        let inst = PrsInstance::diagonal(&[1.0], &[2.0], 1.0, 4.0).unwrap();
        let x = DVector::from_element(1, -1.0);
        assert!((inst.objective(&x) + 1.25).abs() < 1e-15);
        assert!(inst.gradient(&x)[0].abs() < 1e-15);
    }

    #[test]
    fn hessian_at_origin_is_h() {
        let inst = PrsInstance::diagonal(&[1.0, -2.0], &[0.0, 1.0], 1.0, 3.0).unwrap();
        let hess = inst.hessian(&DVector::zeros(2));
        assert_eq!(hess, *inst.h());
    }
}
