use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: i64, height: i64 },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("bad magic number {0} in .flo data")]
    BadMagic(f32),

    #[error(".flo length mismatch: expected {expected} bytes, got {actual}")]
    FloLength { expected: usize, actual: usize },

    #[error("unsupported image format in {path}: {reason}")]
    UnsupportedImage { path: PathBuf, reason: String },

    #[error("image error in {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parameter store: {0}")]
    Params(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dims(aw: usize, ah: usize, bw: usize, bh: usize) -> Result<()> {
    if aw != bw || ah != bh {
        return Err(Error::DimensionMismatch {
            left_w: aw,
            left_h: ah,
            right_w: bw,
            right_h: bh,
        });
    }
    Ok(())
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
