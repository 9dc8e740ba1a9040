use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid UTF-8 on line {line}")]
    Decode { path: PathBuf, line: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("{what} is empty")]
    EmptyInput { what: &'static str },

    #[error("lexicon row {row}: {message}")]
    LexiconParse { row: usize, message: String },

    #[error("lexicon row {row}: weight {value} is outside [0, 1]")]
    WeightRange { row: usize, value: f64 },

    #[error("phonology tables: {0}")]
    Tables(String),

    #[error("{name} = {value} is not a probability in [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no plausibility set contains phoneme {0:?}")]
    NoReplacement(String),

    #[error("performance degradation is undefined when the clean score equals the random baseline ({0})")]
    UndefinedPd(f64),

    #[error("trend fit: {0}")]
    Fit(String),

    #[error("theta grids do not match: {0}")]
    GridMismatch(String),

    #[error("alignment: {0}")]
    Alignment(String),

    #[error("scorer: {0}")]
    Scorer(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Checks that `value` lies in [0, 1].
pub fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}
