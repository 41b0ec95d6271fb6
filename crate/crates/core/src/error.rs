use thiserror::Error;

/// Errors raised while parsing an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
}

/// Errors raised while evaluating an expression at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("valence mismatch: expected ({expected_upper},{expected_lower}), found ({found_upper},{found_lower})")]
    Valence {
        expected_upper: usize,
        expected_lower: usize,
        found_upper: usize,
        found_lower: usize,
    },
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("invalid slot: {0}")]
    Slot(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("metric is not positive definite at the sample point")]
    NotPositiveDefinite,
    #[error("dimension {0} is not odd")]
    EvenDimension(usize),
    #[error("form is not antisymmetric (residual {0:e})")]
    NotAntisymmetric(f64),
    #[error("Q is not positive definite on ker eta (eigenvalue {0:e})")]
    IndefiniteQ(f64),
    #[error("eigen-solver failure: {0}")]
    Eigen(String),
    #[error("missing beta: the structure function is required for this check")]
    MissingBeta,
    #[error("beta must be constant here (variation {0:.3e} across samples)")]
    NonConstantBeta(f64),
    #[error("parameter `{field}` out of range: {message}")]
    Range { field: String, message: String },
    #[error("invalid chart: {0}")]
    Chart(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
