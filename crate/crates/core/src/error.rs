use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two inputs that must agree in size do not.
    #[error("shape mismatch: {context} (expected {expected}, found {found})")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Malformed input data (CSV contents, model files, config tokens).
    #[error("data error: {0}")]
    Data(String),

    /// An iterative routine could not produce a usable result.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("model file version {found} is not supported (expected {expected})")]
    Version { expected: u32, found: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Process exit code for the command-line front end: 1 usage, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) => 1,
            Error::Shape { .. }
            | Error::NonFinite(_)
            | Error::Data(_)
            | Error::Version { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::Numeric(_) => 3,
        }
    }
}
