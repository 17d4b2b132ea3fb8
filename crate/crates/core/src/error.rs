use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Every participant's expected layer loss is zero, so premium shares are 0/0.
    #[error("degenerate pool: {0}")]
    DegeneratePool(String),

    /// A statistic's denominator vanished (zero variance, empty exceedance set).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The top order statistics are all tied, so the Hill estimate of the
    /// inverse tail index is zero.
    #[error("infinite tail index: top {k} + 1 order statistics are tied")]
    InfiniteTailIndex { k: usize },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
