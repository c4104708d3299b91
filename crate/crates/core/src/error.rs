use std::io;

/// Crate-wide error type. Variants map onto the CLI exit codes: everything
/// except `Numeric` is a usage/configuration/format problem (exit 2);
/// `Numeric` means training itself diverged (exit 3).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad configuration value or an inconsistent set of parameters.
    #[error("config: {0}")]
    Config(String),

    /// Tensor or batch shapes that do not line up.
    #[error("shape: {0}")]
    Shape(String),

    /// Non-finite values encountered where finite math is required.
    #[error("numeric: {0}")]
    Numeric(String),

    /// Malformed artifact bytes. `offset` is the byte position at which
    /// parsing failed.
    #[error("format error at byte {offset}: {detail}")]
    Format { offset: usize, detail: String },

    /// A request that cannot be satisfied (empty grids, missing axes, ...).
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn format(offset: usize, detail: impl Into<String>) -> Self {
        Error::Format {
            offset,
            detail: detail.into(),
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
