//! Binary morphology with Euclidean disk structuring elements.
//!
//! Out-of-bounds pixels are false for both operations: dilation cannot reach
//! in from outside, and the image border erodes. The disk operations are
//! backed by the exact distance transform (`dilate(m, disk r)` is
//! `EDT(m) <= r`), which keeps them integer-exact for any radius.

use alloc::vec::Vec;

use crate::dt::within_distance_sq;
use crate::raster::{BinaryMap, GridDims};

/// A disk-shaped neighborhood: all offsets with `dx^2 + dy^2 <= radius^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    radius: usize,
    offsets: Vec<(i32, i32)>,
}

impl StructuringElement {
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Offsets in row-major order; always contains `(0, 0)` and is symmetric.
    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }
}

/// Disk structuring element of the given radius (radius 0 is `{(0,0)}`).
pub fn disk_se(radius: usize) -> StructuringElement {
    let r = radius as i64;
    let mut offsets = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                offsets.push((dx as i32, dy as i32));
            }
        }
    }
    StructuringElement { radius, offsets }
}

/// `out(p)` is true iff some offset `(dx, dy)` of the element has
/// `(p.x - dx, p.y - dy)` in bounds and true.
pub fn dilate(map: &BinaryMap, se: &StructuringElement) -> BinaryMap {
    let r2 = (se.radius * se.radius) as u64;
    BinaryMap::from_bits(map.dims(), within_distance_sq(map, r2))
}

/// `out(p)` is true iff every offset `(dx, dy)` of the element has
/// `(p.x + dx, p.y + dy)` in bounds and true.
pub fn erode(map: &BinaryMap, se: &StructuringElement) -> BinaryMap {
    let dims = map.dims();
    let r = se.radius;
    let r2 = (r * r) as u64;
    // A pixel erodes away iff a false pixel or the outside of the grid lies
    // within distance r of it.
    let near_background = within_distance_sq(&map.complement(), r2);
    let mut bits = near_background;
    for b in bits.iter_mut() {
        *b = !*b;
    }
    let mut out = BinaryMap::from_bits(dims, bits);
    if r >= 1 {
        clear_near_border(&mut out, dims, r2);
    }
    out
}

fn clear_near_border(map: &mut BinaryMap, dims: GridDims, r2: u64) {
    let (w, h) = (dims.width, dims.height);
    for y in 0..h {
        for x in 0..w {
            if !map.get(x, y) {
                continue;
            }
            // Nearest out-of-bounds pixel lies straight toward a side.
            let side = (x + 1).min(y + 1).min(w - x).min(h - y) as u64;
            if side * side <= r2 {
                map.set(x, y, false);
            }
        }
    }
}

/// Dilation by a disk of radius `k1` followed by erosion by a disk of radius
/// `k2`. With `k2 > k1` this is not a true closing and is not idempotent;
/// it is applied literally.
pub fn close_asymmetric(map: &BinaryMap, k1: usize, k2: usize) -> BinaryMap {
    erode(&dilate(map, &disk_se(k1)), &disk_se(k2))
}
