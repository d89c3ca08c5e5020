use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("reference trajectory has zero norm")]
    DegenerateReference,

    #[error("non-finite value encountered{}", .context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Divergence { context: Option<String> },

    #[error("inadmissible physical state{}: {reason}", .cell.map(|c| format!(" at cell {c}")).unwrap_or_default())]
    PhysicalState { cell: Option<usize>, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("line {line}, key `{key}`: {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },

    #[error("cannot write {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn physical(reason: impl Into<String>) -> Self {
        Error::PhysicalState {
            cell: None,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Attaches a cell index to a physical-state error that lacks one.
    pub(crate) fn at_cell(self, index: usize) -> Self {
        match self {
            Error::PhysicalState { cell: None, reason } => Error::PhysicalState {
                cell: Some(index),
                reason,
            },
            other => other,
        }
    }

    /// True for failures that mean "the iterate blew up" rather than "the setup is wrong".
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::PhysicalState { .. })
    }
}
