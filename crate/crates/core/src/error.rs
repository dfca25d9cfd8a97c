use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A statevector would need more than `limit` qubits.
    #[error(
        "resource guard: grid needs n*d = {required} qubits, limit is {limit} (set QGRAD_MEMORY_GUARD to raise it)"
    )]
    ResourceGuard { required: u64, limit: u64 },

    #[error("point outside the declared domain: {0}")]
    OutsideDomain(String),

    /// A phase oracle was asked to encode a value with |f(x)| > 1/2.
    #[error("oracle range violated: |f(x)| = {value} exceeds 1/2 at x = {point:?}")]
    OracleRange { value: f64, point: Vec<f64> },

    #[error("objective function has no reference gradient at the origin")]
    MissingReferenceGradient,

    #[error("grid index out of range: {0}")]
    IndexOutOfRange(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
