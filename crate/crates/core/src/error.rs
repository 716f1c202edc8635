use std::fmt;

use thiserror::Error;

/// Factorization stage that produced an error inside [`crate::build_preconditioner`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    PatternExtraction,
    Symbolic,
    Materialize,
    Factorize,
    Split,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::PatternExtraction => "pattern extraction",
            Stage::Symbolic => "symbolic phase",
            Stage::Materialize => "materialize",
            Stage::Factorize => "block ILU(0) factorization",
            Stage::Split => "LDU split",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("singular diagonal block at block row {row}")]
    SingularBlock { row: usize },

    #[error("zero pivot at row {row}")]
    ZeroPivot { row: usize },

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub(crate) fn at(self, stage: Stage) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Strips stage tags and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
