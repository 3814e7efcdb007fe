//! The FLX1 flux field container.
//!
//! Layout (all little-endian):
//!
//! ```text
//! bytes  0..4   magic "FLX1"
//! bytes  4..8   width  (u32)
//! bytes  8..12  height (u32)
//! bytes 12..20  reserved, written as zero
//! bytes 20..    width*height pairs of f32 (fx, fy), row-major, fx first
//! ```
//!
//! Total size is exactly `20 + 8 * width * height` bytes. Fields are
//! computed in f64 but stored at f32 precision; a read-back therefore
//! reproduces the file bit for bit.

use std::fs;
use std::path::Path;

use fluxskel_core::raster::{FluxField, GridDims};

use crate::IoError;

pub const MAGIC: [u8; 4] = *b"FLX1";
pub const HEADER_LEN: usize = 20;

/// Read a FLX1 file.
pub fn read_flux(path: &Path) -> Result<FluxField, IoError> {
    let bytes = fs::read(path).map_err(|source| IoError::MissingFile {
        path: path.to_path_buf(),
        source,
    })?;
    flux_from_bytes(&bytes)
}

/// Write a FLX1 file.
pub fn write_flux(field: &FluxField, path: &Path) -> Result<(), IoError> {
    fs::write(path, flux_bytes(field)).map_err(IoError::Io)
}

/// Decode from an in-memory buffer.
pub fn flux_from_bytes(bytes: &[u8]) -> Result<FluxField, IoError> {
    if bytes.len() < HEADER_LEN {
        return Err(IoError::LengthMismatch {
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    if bytes[0..4] != MAGIC {
        return Err(IoError::BadMagic);
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if width == 0 || height == 0 {
        return Err(IoError::InvalidDimensions { width, height });
    }
    let n = (width as u64)
        .checked_mul(height as u64)
        .filter(|&n| n <= (usize::MAX as u64 - HEADER_LEN as u64) / 8)
        .ok_or(IoError::DimensionOverflow { width, height })?;
    let expected = HEADER_LEN as u64 + 8 * n;
    if bytes.len() as u64 != expected {
        return Err(IoError::LengthMismatch {
            expected,
            actual: bytes.len() as u64,
        });
    }
    let mut vectors = Vec::with_capacity(n as usize);
    for chunk in bytes[HEADER_LEN..].chunks_exact(8) {
        let fx = f32::from_le_bytes(chunk[0..4].try_into().unwrap());
        let fy = f32::from_le_bytes(chunk[4..8].try_into().unwrap());
        vectors.push((fx as f64, fy as f64));
    }
    Ok(FluxField::from_vectors(
        GridDims::new(width as usize, height as usize),
        vectors,
    ))
}

/// Encoded FLX1 bytes for a field.
pub fn flux_bytes(field: &FluxField) -> Vec<u8> {
    let dims = field.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * dims.pixel_count());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(dims.width as u32).to_le_bytes());
    out.extend_from_slice(&(dims.height as u32).to_le_bytes());
    out.extend_from_slice(&[0u8; 8]);
    for &(fx, fy) in field.vectors() {
        out.extend_from_slice(&(fx as f32).to_le_bytes());
        out.extend_from_slice(&(fy as f32).to_le_bytes());
    }
    out
}
