use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus files are not aligned: line {line} has no counterpart in {}", missing.display())]
    Alignment { line: usize, missing: PathBuf },

    #[error("{}:{line}: empty line", path.display())]
    EmptyLine { path: PathBuf, line: usize },

    #[error("dictionary row {row}: {message}")]
    DictionaryFormat { row: usize, message: String },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid sentence: {0}")]
    InvalidSentence(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid log-probability record {id}: {message}")]
    Record { id: u64, message: String },

    #[error("{0}")]
    Validation(String),

    #[error("term `{term}` has {ngram} tokens; LSM-2 is only defined for terms longer than two tokens")]
    LsmDomain { term: String, ngram: usize },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
