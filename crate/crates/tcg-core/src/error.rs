use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TcgError {
    #[error("parse error at {pos} in `{input}`: {msg}")]
    Parse { input: String, pos: usize, msg: String },

    #[error("unresolved symbol `{0}`")]
    UnresolvedSymbol(String),

    #[error("division by a numerically zero frequency `{0}`")]
    DivisionByZero(String),

    #[error("singular block in bubble {bubble}: zero partial sums at {indices:?}")]
    SingularInput { bubble: usize, indices: Vec<usize> },

    #[error("invalid weight ({l},{r}): {msg}")]
    InvalidWeight { l: usize, r: usize, msg: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("filter `{0}` does not support singular regularization")]
    UnsupportedFilter(String),

    #[error("filter table queried at |w|={0:e}, outside its tabulated range")]
    FilterRange(f64),

    #[error("hermiticity violated: {0}")]
    Hermiticity(String),

    #[error("reference error: {0}")]
    Reference(String),

    #[error("validation error in `{field}`: {msg}")]
    Validation { field: String, msg: String },

    #[error("divergent regulator limit: {0}")]
    DivergentLimit(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("insufficient margin: need {required:e} s of padding on each side")]
    Margin { required: f64 },

    #[error("integration aborted: {0}")]
    Integration(String),

    #[error("oracle mismatch: residual {0:e}")]
    OracleMismatch(f64),

    #[error("io error: {0}")]
    Io(String),
}

impl TcgError {
    pub fn parse(input: &str, pos: usize, msg: impl Into<String>) -> Self {
        TcgError::Parse {
            input: input.to_string(),
            pos,
            msg: msg.into(),
        }
    }

    pub fn validation(field: impl Into<String>, msg: impl Into<String>) -> Self {
        TcgError::Validation {
            field: field.into(),
            msg: msg.into(),
        }
    }

    /// True for errors raised by numerical guards rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            TcgError::DivisionByZero(_)
                | TcgError::Integration(_)
                | TcgError::Resource(_)
                | TcgError::Margin { .. }
                | TcgError::OracleMismatch(_)
                | TcgError::DivergentLimit(_)
                | TcgError::FilterRange(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, TcgError>;
