use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("cannot read {path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("token {0:?} appears in more than one pair")]
    DuplicateToken(String),

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("vocabulary is empty after applying min_count")]
    EmptyVocab,

    #[error("word {0:?} is not in the vocabulary")]
    Oov(String),

    #[error("gender direction is undefined: all pair residuals are zero")]
    DegenerateDirection,

    #[error("pair ({0}, {1}) has identical projections on the gender direction")]
    EqualizeDegenerate(String, String),

    #[error("effect size is undefined: association scores have zero spread")]
    DegenerateEffect,

    #[error("only {found} usable words, need at least {needed}")]
    InsufficientWords { found: usize, needed: usize },

    #[error("indirect bias is undefined for ({0}, {1})")]
    UndefinedBias(String, String),

    #[error("projection is rank deficient")]
    DegenerateProjection,

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the filesystem rather than by content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::File { .. })
    }
}
