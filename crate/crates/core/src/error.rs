use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibilityFailure {
    /// The parameter collides with the forbidden operator.
    Parameter,
    /// The induced parameter Φ on the inner space is not admissible.
    Phi,
    /// The exit-space block T22 is not admissible.
    T22,
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix kind mismatch: {0}")]
    KindMismatch(String),
    #[error("singular matrix (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },
    #[error("singular system at point {point}")]
    SingularSystem { point: Complex64 },
    #[error("not a contraction (norm {norm})")]
    NotContraction { norm: f64 },
    #[error("isometry has a nonzero fixed vector")]
    FixedPointObstruction,
    #[error("parameter is not admissible ({0:?})")]
    NotAdmissible(AdmissibilityFailure),
    #[error("exit block T22 is not admissible")]
    T22NotAdmissible,
    #[error("admissibility tests disagree (kernel test {kernel}, fixed-point test {fixed_point})")]
    InternalDisagreement { kernel: bool, fixed_point: bool },
    #[error("point {0} is excluded")]
    PointExcluded(Complex64),
    #[error("point {point} is not of regular type (lower bound {bound:e})")]
    NotRegularType { point: Complex64, bound: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("postcondition failed: {0}")]
    PostconditionFailed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
