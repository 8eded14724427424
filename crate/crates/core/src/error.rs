use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("scale too large: {0}")]
    ScaleTooLarge(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("circulant embedding failed: {0}")]
    Embedding(String),

    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Failure class reported by the command line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureClass {
    Validation,
    Io,
    Numerical,
}

impl FailureClass {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureClass::Validation => 1,
            FailureClass::Io => 2,
            FailureClass::Numerical => 3,
        }
    }
}

impl Error {
    pub fn class(&self) -> FailureClass {
        match self {
            Error::InvalidParameter(_) | Error::Parse { .. } | Error::Config(_) => {
                FailureClass::Validation
            }
            Error::Io(_) => FailureClass::Io,
            Error::DegenerateSeries(_)
            | Error::ScaleTooLarge(_)
            | Error::Estimation(_)
            | Error::Embedding(_) => FailureClass::Numerical,
        }
    }

    /// Short machine-readable tag, used in the `status` column of records files.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DegenerateSeries(_) => "degenerate_series",
            Error::ScaleTooLarge(_) => "scale_too_large",
            Error::Estimation(_) => "estimation",
            Error::Embedding(_) => "embedding",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn estimation(msg: impl Into<String>) -> Self {
        Error::Estimation(msg.into())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let row = err
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse {
                row,
                msg: format!("{other:?}"),
            },
        }
    }
}
