use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the recognition pipeline.
///
/// The `Display` text of every variant starts with the variant name so that
/// front ends can surface a stable, greppable diagnostic.
#[derive(Debug, Error)]
pub enum Error {
    #[error("NoForeground: image contains no foreground pixels")]
    NoForeground,

    #[error("InvalidImage: {0}")]
    InvalidImage(String),

    #[error("DimensionMismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    #[error("NonFiniteLoss: training diverged at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("NonPositiveAccuracy: classifier {index} has accuracy {value}")]
    NonPositiveAccuracy { index: usize, value: f64 },

    #[error("BadK: k = {k} is outside 1..={m}")]
    BadK { k: usize, m: usize },

    #[error("EmptyDataset: no images found under {0}")]
    EmptyDataset(PathBuf),

    #[error("UnreadableImage: {path}: {reason}")]
    UnreadableImage { path: PathBuf, reason: String },

    #[error("TooFewSamples: class {label} has {count} samples, need at least {needed}")]
    TooFewSamples {
        label: String,
        count: usize,
        needed: usize,
    },

    #[error("EmptyTrainingSet: cannot fit on zero samples")]
    EmptyTrainingSet,

    #[error("Format: {0}")]
    Format(String),

    #[error("Io: {0}")]
    Io(#[from] std::io::Error),

    #[error("Json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// The variant name, e.g. `"NoForeground"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NoForeground => "NoForeground",
            Error::InvalidImage(_) => "InvalidImage",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::NonFiniteLoss { .. } => "NonFiniteLoss",
            Error::NonPositiveAccuracy { .. } => "NonPositiveAccuracy",
            Error::BadK { .. } => "BadK",
            Error::EmptyDataset(_) => "EmptyDataset",
            Error::UnreadableImage { .. } => "UnreadableImage",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::EmptyTrainingSet => "EmptyTrainingSet",
            Error::Format(_) => "Format",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
