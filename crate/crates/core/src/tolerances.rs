//! Numerical thresholds shared by the solvers.

/// Every threshold the solvers branch on.
///
/// Relative thresholds are multiplied by the scale stated on each field when
/// they are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalue tie tolerance, times `max(1, |α₁|, |αₙ|)`.
    pub tie: f64,
    /// A rotated gradient coefficient counts as zero below `coeff · ‖c‖`.
    pub coeff: f64,
    /// Secular root acceptance, `|h(t)| ≤ root · (1 + t)`.
    pub root: f64,
    /// Stationarity, `‖∇g‖ ≤ kkt · (1 + ‖c‖)`.
    pub kkt: f64,
    /// Positive semidefiniteness slack, times the spectral scale.
    pub psd: f64,
    /// Minimum `h′` at a local-nonglobal root, times `1 + |t|`.
    pub deriv: f64,
    /// Sign-structure slack, times `‖c‖·‖x‖`.
    pub sign: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tie: 1e-9,
            coeff: 1e-11,
            root: 1e-12,
            kkt: 1e-8,
            psd: 1e-8,
            deriv: 1e-12,
            sign: 1e-10,
        }
    }
}
