//! Error type shared by the core operations.

use core::fmt;

/// Why a core operation could not produce a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Error {
    /// A distance transform was requested over an empty site set.
    NoSites,
    /// The skeleton map has no true pixels.
    NoSkeletonPixels,
    /// The shape mask has no true pixels.
    EmptyMask,
    /// Evaluation needs a non-empty ground-truth skeleton.
    EmptyGroundTruth,
    /// Two rasters that must share dimensions do not.
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    /// Direction binning is undefined for the zero vector.
    ZeroVector,
    /// Shape generation parameters describe a degenerate shape.
    DegenerateShape(&'static str),
    /// A parameter violates its documented precondition.
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NoSites => write!(f, "no sites"),
            Error::NoSkeletonPixels => write!(f, "no skeleton pixels"),
            Error::EmptyMask => write!(f, "empty mask"),
            Error::EmptyGroundTruth => write!(f, "empty ground truth"),
            Error::DimensionMismatch { expected, actual } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, actual.0, actual.1
            ),
            Error::ZeroVector => write!(f, "no direction: zero vector"),
            Error::DegenerateShape(what) => write!(f, "degenerate shape: {what}"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for Error {}
