use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = CoreError> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("unbounded interval for {0}")]
    UnboundedInterval(String),
    #[error("expression too large to normalize ({0} terms)")]
    ExpressionTooLarge(usize),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unsupported nonlinearity at {path}: {reason}")]
    UnsupportedNonlinearity { path: String, reason: String },
    #[error("expression at {0} is not linear")]
    NotLinear(String),
    #[error("fractional objective is not isolated: {0}")]
    FractionalNotIsolated(String),
    #[error("denominator is not provably positive (lower bound {0})")]
    DenominatorNotPositive(f64),
    #[error("fractional objective with integer or binary variables")]
    FractionalWithIntegers,
    #[error("monotone argument is not affine at {0}")]
    NonAffineArg(String),
    #[error("monotone function not invertible on range: {0}")]
    NonInvertibleOnRange(String),
    #[error("fixpoint did not terminate after {0} iterations")]
    NonTermination(usize),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("iteration limit reached")]
    IterationLimit,
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("oracle scale exceeded: {0}")]
    OracleScaleExceeded(String),
    #[error("projection failure: {0}")]
    ProjectionFailure(String),
    #[error("solver failed: {0}")]
    SolverFailure(String),
}
