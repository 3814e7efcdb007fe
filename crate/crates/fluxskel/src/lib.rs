//! File formats and reporting for the fluxskel pipeline.
//!
//! The algorithms live in `fluxskel-core`; this crate adds the on-disk
//! formats (binary PGM for masks and skeletons, the FLX1 container for flux
//! fields), JSON/CSV report serialization, and the `fluxskel` command-line
//! tool.

pub mod fluxfile;
pub mod pgm;
pub mod report;

use std::path::PathBuf;

use thiserror::Error;

/// I/O and format errors for the file codecs.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("missing file {path}: {source}")]
    MissingFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed image: {0}")]
    MalformedImage(String),
    #[error("unsupported bit depth: {0}")]
    UnsupportedBitDepth(String),
    #[error("unsupported image format")]
    UnsupportedFormat,
    #[error("bad magic")]
    BadMagic,
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("dimension overflow: {width}x{height} does not fit in memory")]
    DimensionOverflow { width: u32, height: u32 },
    #[error("length mismatch: expected {expected} bytes, got {actual}")]
    LengthMismatch { expected: u64, actual: u64 },
}
