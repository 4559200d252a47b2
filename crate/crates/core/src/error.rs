use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel evaluated at the identity")]
    AtIdentity,

    #[error("non-finite evaluation {what} at ({x}, {y}, {t})")]
    Evaluation {
        what: String,
        x: f64,
        y: f64,
        t: f64,
    },

    #[error("resolution guard violated: {0}")]
    Resolution(String),

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("target point coincides with node {0}")]
    CoincidesWithNode(usize),

    #[error("i/o: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
