//! Exact Euclidean distance transform with nearest-site labels.
//!
//! Distances are computed in integer squared arithmetic, so they are exact
//! (no chamfer approximation) and platform-independent. When several sites
//! are equidistant, the reported site is the lexicographically smallest by
//! `(y, x)`, which makes downstream ground truth reproducible byte-for-byte.
//!
//! The transform is separable. A column pass records, for every pixel, the
//! nearest site row within its own column (ties to the smaller row). A row
//! pass then scans columns outward from each pixel, pruning once the column
//! offset alone exceeds the best squared distance found; every column whose
//! offset still ties the optimum is visited, so the `(y, x)` tie rule is
//! applied over the full set of equidistant sites.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::raster::{BinaryMap, GridDims, ScalarMap};

/// Per-pixel coordinates of the nearest site, undefined where no site exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    dims: GridDims,
    labels: Vec<(u32, u32)>,
}

const UNDEFINED: (u32, u32) = (u32::MAX, u32::MAX);

impl LabelMap {
    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    /// Nearest site to `(x, y)`, or `None` where undefined.
    #[inline]
    pub fn nearest_site(&self, x: usize, y: usize) -> Option<(usize, usize)> {
        let l = self.labels[self.dims.index(x, y)];
        if l == UNDEFINED {
            None
        } else {
            Some((l.0 as usize, l.1 as usize))
        }
    }
}

/// Exact Euclidean distance to the nearest site, plus which site it is.
///
/// `dist(p)` is the minimum over site pixels `q` of `|p - q|`; `nearest(p)`
/// attains that minimum, ties broken by smallest `y`, then smallest `x`.
///
/// Errors with [`Error::NoSites`] when `sites` has no true pixel.
pub fn euclidean_dt_with_labels(sites: &BinaryMap) -> Result<(ScalarMap, LabelMap), Error> {
    let (d2, labels) = squared_dt_with_labels(sites).ok_or(Error::NoSites)?;
    let dist = ScalarMap::from_values(
        sites.dims(),
        d2.iter().map(|&d| libm::sqrt(d as f64)).collect(),
    );
    Ok((
        dist,
        LabelMap {
            dims: sites.dims(),
            labels,
        },
    ))
}

/// Integer squared distances plus `(x, y)` site labels, row-major.
pub(crate) type SquaredTransform = (Vec<u64>, Vec<(u32, u32)>);

/// Squared distances and labels, or `None` when there are no sites.
pub(crate) fn squared_dt_with_labels(sites: &BinaryMap) -> Option<SquaredTransform> {
    if !sites.any() {
        return None;
    }
    let dims = sites.dims();
    let (w, h) = (dims.width, dims.height);
    let col = column_nearest(sites);

    let mut d2 = vec![0u64; dims.pixel_count()];
    let mut labels = vec![UNDEFINED; dims.pixel_count()];

    for y in 0..h {
        let row_base = y * w;
        for x in 0..w {
            // best = (squared distance, site y, site x); tuple order encodes
            // the lexicographic (y, x) tie rule.
            let mut best: Option<(u64, u32, u32)> = None;
            consider_column(&col, w, row_base, x, y, 0, &mut best);
            let mut d = 1usize;
            loop {
                let dd = (d * d) as u64;
                if let Some(b) = best {
                    // Columns at offset d can still tie when dd == b.0.
                    if dd > b.0 {
                        break;
                    }
                }
                let left_ok = d <= x;
                let right_ok = x + d < w;
                if !left_ok && !right_ok {
                    break;
                }
                if left_ok {
                    consider_column(&col, w, row_base, x - d, y, dd, &mut best);
                }
                if right_ok {
                    consider_column(&col, w, row_base, x + d, y, dd, &mut best);
                }
                d += 1;
            }
            let (bd2, sy, sx) = best.expect("site set verified non-empty");
            d2[row_base + x] = bd2;
            labels[row_base + x] = (sx, sy);
        }
    }
    Some((d2, labels))
}

/// True where some site lies within Euclidean distance `sqrt(r2max)`.
///
/// Same scan as the full transform, capped at the query radius; used for
/// disk morphology and tolerance matching where only the predicate matters.
pub(crate) fn within_distance_sq(sites: &BinaryMap, r2max: u64) -> Vec<bool> {
    let dims = sites.dims();
    let (w, h) = (dims.width, dims.height);
    let mut out = vec![false; dims.pixel_count()];
    if !sites.any() {
        return out;
    }
    let col = column_nearest(sites);

    for y in 0..h {
        let row_base = y * w;
        'pixel: for x in 0..w {
            let mut d = 0usize;
            loop {
                let dd = (d * d) as u64;
                if dd > r2max {
                    break;
                }
                let left_ok = d <= x;
                let right_ok = x + d < w;
                if !left_ok && !right_ok {
                    break;
                }
                let hit = |cx: usize| {
                    col[row_base + cx].is_some_and(|sy| {
                        let dy = sy as i64 - y as i64;
                        dd + (dy * dy) as u64 <= r2max
                    })
                };
                if (left_ok && hit(x - d)) || (right_ok && d > 0 && hit(x + d)) {
                    out[row_base + x] = true;
                    continue 'pixel;
                }
                d += 1;
            }
        }
    }
    out
}

#[inline]
fn consider_column(
    col: &[Option<u32>],
    w: usize,
    row_base: usize,
    cx: usize,
    y: usize,
    dd: u64,
    best: &mut Option<(u64, u32, u32)>,
) {
    debug_assert_eq!(row_base % w, 0);
    if let Some(sy) = col[row_base + cx] {
        let dy = sy as i64 - y as i64;
        let cand = (dd + (dy * dy) as u64, sy, cx as u32);
        if best.is_none_or(|b| cand < b) {
            *best = Some(cand);
        }
    }
}

/// For every pixel, the nearest site row within its own column (ties to the
/// smaller row), or `None` for columns without sites.
fn column_nearest(sites: &BinaryMap) -> Vec<Option<u32>> {
    let dims = sites.dims();
    let (w, h) = (dims.width, dims.height);
    let mut col = vec![None; dims.pixel_count()];
    for x in 0..w {
        // Downward sweep: nearest site at or above.
        let mut last: Option<u32> = None;
        for y in 0..h {
            if sites.get(x, y) {
                last = Some(y as u32);
            }
            col[y * w + x] = last;
        }
        // Upward sweep: nearest site at or below; keep the closer of the two,
        // preferring the one above (smaller y) on ties.
        let mut next: Option<u32> = None;
        for y in (0..h).rev() {
            if sites.get(x, y) {
                next = Some(y as u32);
            }
            if let Some(ny) = next {
                let below = ny - y as u32;
                match col[y * w + x] {
                    Some(ay) if y as u32 - ay <= below => {}
                    _ => col[y * w + x] = Some(ny),
                }
            }
        }
    }
    col
}
