use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no roots defined for a constant or zero polynomial")]
    NoRoots,
    #[error("zero polynomial where a nonzero one is required: {0}")]
    ZeroPolynomial(&'static str),
    #[error("leading coefficient vanishes; polynomial has roots at infinity")]
    RootsAtInfinity,
    #[error("eigenvalue iteration did not converge for degree {0}")]
    RootsDidNotConverge(usize),
    #[error("indeterminate limit: denominator vanishes at z = 1 after cancellation")]
    IndeterminateLimit,
    #[error("invalid model orders: {0}")]
    InvalidOrders(String),
    #[error("model orders too small: {0}")]
    OrdersTooSmall(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("covariance corrupted: asymmetry {0:e}")]
    CovarianceCorrupted(f64),
    #[error("invalid estimator parameter: {0}")]
    InvalidEstimator(String),
    #[error("singular control gain: |h0| = {0:e}")]
    SingularControlGain(f64),
    #[error("unattainable zero polynomial: B_m is not divisible by phi_u (remainder {0:e})")]
    UnattainableZeros(f64),
    #[error("incompatible DC constraint: B_m(1) = {0:e} must vanish")]
    IncompatibleDc(f64),
    #[error("singular design equation (condition number {0:e}); phi_y and phi_u share a factor")]
    SingularDesign(f64),
    #[error("design precondition violated: {0}")]
    DesignPrecondition(String),
    #[error("design residual {0:e} exceeds tolerance")]
    DesignResidual(f64),
    #[error("limit undefined for unstable system (max root modulus {0})")]
    UnstableLoop(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },
}
