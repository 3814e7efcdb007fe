//! Binary map image I/O: binary PGM (P5, maxval up to 255) always, 8-bit
//! grayscale PNG behind the `png` feature.
//!
//! A source pixel is true iff its value is at least 128; annotations in the
//! wild are anti-aliased and the midpoint threshold keeps binarization
//! deterministic. Writing emits 255 for true and 0 for false, so
//! read-after-write is the identity.

use std::fs;
use std::path::Path;

use fluxskel_core::raster::{BinaryMap, GridDims};

use crate::IoError;

/// Threshold above which a source sample counts as true.
pub const BINARIZE_THRESHOLD: u8 = 128;

/// Read a PGM (or, with the `png` feature, grayscale PNG) file as a binary
/// map.
pub fn read_binary_map(path: &Path) -> Result<BinaryMap, IoError> {
    let bytes = fs::read(path).map_err(|source| IoError::MissingFile {
        path: path.to_path_buf(),
        source,
    })?;
    binary_map_from_bytes(&bytes)
}

/// Decode from an in-memory buffer, sniffing PGM vs PNG by magic bytes.
pub fn binary_map_from_bytes(bytes: &[u8]) -> Result<BinaryMap, IoError> {
    if bytes.starts_with(b"P5") {
        return decode_pgm(bytes);
    }
    #[cfg(feature = "png")]
    if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        return decode_png(bytes);
    }
    Err(IoError::UnsupportedFormat)
}

/// Write a binary map as binary PGM: 255 for true, 0 for false.
pub fn write_binary_map(map: &BinaryMap, path: &Path) -> Result<(), IoError> {
    fs::write(path, pgm_bytes(map)).map_err(IoError::Io)
}

/// Encoded PGM bytes for a map.
pub fn pgm_bytes(map: &BinaryMap) -> Vec<u8> {
    let dims = map.dims();
    let mut out = format!("P5\n{} {}\n255\n", dims.width, dims.height).into_bytes();
    out.extend(map.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

fn decode_pgm(bytes: &[u8]) -> Result<BinaryMap, IoError> {
    let mut pos = 2; // past "P5"
    let width = read_header_int(bytes, &mut pos)?;
    let height = read_header_int(bytes, &mut pos)?;
    let maxval = read_header_int(bytes, &mut pos)?;
    if maxval == 0 || maxval > 255 {
        return Err(IoError::UnsupportedBitDepth(format!("maxval {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(IoError::InvalidDimensions {
            width: width as u32,
            height: height as u32,
        });
    }
    // Exactly one whitespace byte separates the header from the samples.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(IoError::MalformedImage("missing header terminator".into())),
    }
    let n = width
        .checked_mul(height)
        .ok_or(IoError::DimensionOverflow {
            width: width as u32,
            height: height as u32,
        })?;
    let data = bytes
        .get(pos..pos + n)
        .ok_or_else(|| IoError::MalformedImage("truncated pixel data".into()))?;
    let bits = data.iter().map(|&v| v >= BINARIZE_THRESHOLD).collect();
    Ok(BinaryMap::from_bits(GridDims::new(width, height), bits))
}

/// Parse the next unsigned decimal in a PNM header, skipping whitespace and
/// `#` comments.
fn read_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize, IoError> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while !matches!(bytes.get(*pos), None | Some(b'\n')) {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_digit() => break,
            _ => return Err(IoError::MalformedImage("bad header field".into())),
        }
    }
    let mut value: usize = 0;
    while let Some(b) = bytes.get(*pos) {
        if !b.is_ascii_digit() {
            break;
        }
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add((b - b'0') as usize))
            .ok_or_else(|| IoError::MalformedImage("header number overflow".into()))?;
        *pos += 1;
    }
    Ok(value)
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8]) -> Result<BinaryMap, IoError> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| IoError::MalformedImage(e.to_string()))?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale {
        return Err(IoError::UnsupportedFormat);
    }
    if info.bit_depth != png::BitDepth::Eight {
        return Err(IoError::UnsupportedBitDepth(format!(
            "png bit depth {:?}",
            info.bit_depth
        )));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    if width == 0 || height == 0 {
        return Err(IoError::InvalidDimensions {
            width: info.width,
            height: info.height,
        });
    }
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(width * height)];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| IoError::MalformedImage(e.to_string()))?;
    let data = &buf[..frame.buffer_size()];
    if data.len() != width * height {
        return Err(IoError::LengthMismatch {
            expected: (width * height) as u64,
            actual: data.len() as u64,
        });
    }
    let bits = data.iter().map(|&v| v >= BINARIZE_THRESHOLD).collect();
    Ok(BinaryMap::from_bits(GridDims::new(width, height), bits))
}
