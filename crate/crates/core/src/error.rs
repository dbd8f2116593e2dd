use thiserror::Error;

/// Errors raised by tensor math, flow layers, transfer modules and training.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("singular matrix: pivot magnitude {pivot:e} below 1e-12 at column {column}")]
    Singular { column: usize, pivot: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below tolerance {tolerance:e}")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("actnorm scale {value:e} on channel {channel} is below 1e-6")]
    DegenerateScale { channel: usize, value: f64 },

    #[error("layer {layer} is not initialized")]
    Uninitialized { layer: usize },

    #[error("non-finite value produced by {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("image format error: {0}")]
    Format(String),

    #[error("bad checkpoint magic {found:?}, expected \"PFN1\"")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported checkpoint version {found}, expected {expected}")]
    BadVersion { found: u32, expected: u32 },

    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Shape(msg.into()))
}
