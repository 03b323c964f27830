use thiserror::Error;

/// Crate-wide error type. Numeric diagnostics are reported as `f64`
/// regardless of the scalar type the computation ran on.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed matrix text: {0}")]
    Parse(String),

    #[error(
        "eigensolver sweep budget exhausted after {sweeps} sweeps: \
         off-diagonal norm {off:.3e} above target {target:.3e}"
    )]
    NonConvergence {
        off: f64,
        target: f64,
        sweeps: usize,
    },

    #[error(
        "domain violation applying {func}: lambda_min = {lambda_min:.6e} is not safely positive"
    )]
    Domain { func: &'static str, lambda_min: f64 },

    #[error("operand is not positive definite: lambda_min = {0:.6e}")]
    NotPositiveDefinite(f64),

    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),

    #[error("parameter set rejected: {0}")]
    InvalidParams(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("generator spec rejected: {0}")]
    InvalidSpec(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("config rejected: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
