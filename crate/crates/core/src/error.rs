use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("enumeration cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("two-ghost mode requires a field realization")]
    MissingField,

    #[error("zero field value at site {0}")]
    ZeroField(String),

    #[error("bond configuration violates the boundary event: {0} and {1} are connected")]
    BoundaryViolation(String, String),

    #[error("history has zero probability under the {0} measure")]
    Unreachable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("missing critical constant: {0}")]
    MissingConstant(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("not enough usable points for a fit: {usable} usable, 3 required")]
    TooFewPoints { usable: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
