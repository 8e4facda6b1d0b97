use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {frames} frames but {boxes} ground-truth boxes")]
    CountMismatch { path: PathBuf, frames: usize, boxes: usize },
    #[error("{path}: no frames found")]
    NoFrames { path: PathBuf },
    #[error("frame {frame}: {source}")]
    Tracker {
        frame: usize,
        #[source]
        source: fusetrack_core::Error,
    },
    #[error("synthetic sequence: {0}")]
    Synth(String),
    #[error("trajectory has {found} boxes, ground truth has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, BenchError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> BenchError {
    let path = path.into();
    move |source| BenchError::Io { path, source }
}
