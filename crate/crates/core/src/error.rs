use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid image file {path}: {reason}")]
    ImageFormat { path: PathBuf, reason: String },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("bounding box ({x0},{y0})-({x1},{y1}) is not valid for a {width}x{height} image")]
    InvalidBox {
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
        width: usize,
        height: usize,
    },

    #[error("segmentation failed: {0}")]
    SegmentationFailed(String),

    #[error("label file {path}: {reason}")]
    Labels { path: PathBuf, reason: String },

    #[error("duplicate sample id `{0}`")]
    DuplicateId(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite gradient at step {step}")]
    NonFiniteGradient { step: u64 },

    #[error("non-finite loss: {0}")]
    NonFiniteLoss(String),

    #[error("AUC undefined{}: test labels contain a single class", finding.as_ref().map(|f| format!(" for {f}")).unwrap_or_default())]
    SingleClass { finding: Option<String> },

    #[error("Pearson correlation undefined: zero variance")]
    ZeroVariance,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("variant cache incomplete ({missing} missing images under {dir}); run `cxrpipe preprocess --config <path>` first")]
    MissingCache { missing: usize, dir: PathBuf },

    #[error("test ids leaked into the {stage} set: {ids:?}")]
    Leakage { stage: &'static str, ids: Vec<String> },

    #[error("run artifacts: {0}")]
    Artifacts(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 configuration, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 1,
            Error::NonFiniteGradient { .. }
            | Error::NonFiniteLoss(_)
            | Error::ZeroVariance
            | Error::SingleClass { .. } => 3,
            _ => 2,
        }
    }
}
