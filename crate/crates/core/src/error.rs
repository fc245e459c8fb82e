use thiserror::Error;

/// Errors raised by the library.
///
/// Order verdicts and monotonicity violations are data, not errors; the
/// variants below signal violated preconditions or numerical breakdown.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("{0} did not converge")]
    ConvergenceFailure(&'static str),
    #[error("transform is singular (rank {rank} < {n})")]
    SingularTransform { rank: usize, n: usize },
    #[error("columns are not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("invalid tolerance policy: {0}")]
    InvalidPolicy(String),
    #[error("vector must be nonzero")]
    ZeroVector,
    #[error("matrix must be nonzero")]
    ZeroMatrix,
    #[error("vector does not induce a rank-one minorant of the matrix")]
    NotDominated,
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("axis parameter r must be positive, got {0}")]
    NonPositiveR(f64),
    #[error("ellipse does not lie strictly inside the unit circle (min eigenvalue {min_eigenvalue:.6})")]
    NotInsideUnitCircle { min_eigenvalue: f64 },
    #[error("kernel of the touching pencil has dimension {dim}, expected 1")]
    DegenerateKernel { dim: usize },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("infeasible configuration: {0}")]
    InfeasibleConfiguration(String),
    #[error("radicand {radicand:.6e} is not positive: {constraint}")]
    ImaginaryDenominator { radicand: f64, constraint: String },
    #[error("point is not in range: denominator {denominator:.6e} is not positive ({constraint})")]
    NotInRange { denominator: f64, constraint: String },
    #[error("planar ellipse source must have rank 2, got {0}")]
    RankNotTwo(usize),
    #[error("conics are not strictly nested")]
    NotNested,

    #[error("image of the identity is not positive definite")]
    IdentityImageSingular,
    #[error("map is not normalized: |map(I) - I| = {residual:.3e}")]
    NotNormalized { residual: f64 },
    #[error("line images are inconsistent with a linear operator (residual {residual:.3e})")]
    InconsistentLineImages { residual: f64 },
    #[error("map is not congruence induced (residual {residual:.3e})")]
    NotCongruenceInduced { residual: f64 },
    #[error("cannot resolve relative sign of column {column}")]
    SignResolutionFailure { column: usize },
    #[error("{check} check failed: {detail}")]
    CheckFailed { check: &'static str, detail: String },
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Stage label of a pipeline failure, if any.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}
