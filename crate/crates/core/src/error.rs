use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed input at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("truncated input: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("pixel ({x}, {y}) outside {width}x{height} raster")]
    Index {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("region out of bounds: {0}")]
    Bounds(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("zero total: {0}")]
    ZeroTotal(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-parsable tag used as the prefix of CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Format { .. } => "format",
            Error::Truncated { .. } => "truncated",
            Error::Shape(_) => "shape",
            Error::Index { .. } => "index",
            Error::Bounds(_) => "bounds",
            Error::InsufficientData(_) => "insufficient-data",
            Error::Numeric(_) => "numeric",
            Error::Parameter(_) => "parameter",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::ZeroTotal(_) => "zero-total",
            Error::Io { .. } => "io",
        }
    }

    /// Process exit code: 1 for numeric or classification failures, 2 for
    /// bad input or configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) | Error::InsufficientData(_) | Error::ZeroTotal(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
