use thiserror::Error;

pub type Result<T> = std::result::Result<T, PrsError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrsError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("symmetric eigensolver did not converge")]
    EigFailure,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("secular function evaluated at a pole (t = {t})")]
    PoleHit { t: f64 },

    #[error("secular function evaluated at negative t = {t}")]
    NegativeT { t: f64 },

    #[error("derivative of the secular function is undefined at t = 0 for p > 4")]
    ZeroT,

    #[error("secular root could not be bracketed")]
    NoRoot,

    #[error("convex oracle did not converge within {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },

    #[error("local-nonglobal certificate failed: smallest Hessian eigenvalue {min_eig:e}")]
    CertificateFailure { min_eig: f64 },

    #[error("instance is not in generic position: {0}")]
    GenericityViolated(String),

    #[error("linear constraints have an empty feasible region")]
    Infeasible,

    #[error("constrained search produced no feasible candidate")]
    NoCandidate,

    #[error("too many constraints: {m} (cap {cap})")]
    CapExceeded { m: usize, cap: usize },

    #[error("constraint row {0} is (numerically) zero")]
    DegenerateRow(usize),

    #[error("invalid constraints: {0}")]
    InvalidConstraints(String),

    #[error("operation requires p = 4, got p = {0}")]
    RequiresQuartic(f64),

    #[error("invalid k = {k} for n = {n}")]
    InvalidK { k: usize, n: usize },

    #[error("instance too large for enumeration (n = {n}, cap {cap})")]
    TooLarge { n: usize, cap: usize },

    #[error("no feasible grid point")]
    NoFeasibleGridPoint,
}
