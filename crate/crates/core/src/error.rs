use std::path::PathBuf;

use thiserror::Error;

use crate::hierarchy::TreeViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("level {levels} exceeds the supported range 1..={max} for {hyperplanes} hyperplanes")]
    InvalidLevels {
        levels: usize,
        hyperplanes: usize,
        max: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("counts sum to zero; a pattern must be observed at least once")]
    EmptyCounts,

    #[error("node {node}: group {group} has no training points")]
    EmptyGroup { node: String, group: usize },

    #[error("invalid classification tree: {0}")]
    InvalidTree(#[from] TreeViolation),

    #[error("IDX format error: {0}")]
    Idx(String),

    #[error("requested {requested} samples of class {class} but only {available} are available")]
    NotEnoughSamples {
        class: String,
        requested: usize,
        available: usize,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
