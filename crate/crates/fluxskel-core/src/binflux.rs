//! Classical flux-based skeletonization of binary shapes.
//!
//! The interior distance transform of a shape is a height field whose ridge
//! is the medial axis. Its gradient flows up toward the ridge from all
//! sides, so the average outward flux of that gradient through a small
//! circle is strongly negative exactly at medial points and near zero in
//! smooth regions. Thresholding the flux gives a skeleton without any
//! learned component, which makes this module the oracle and synthetic
//! ground-truth source for the rest of the crate.

use alloc::vec;
use alloc::vec::Vec;

use crate::dt::squared_dt_with_labels;
use crate::error::Error;
use crate::raster::{BinaryMap, ScalarMap};

/// Parameters for flux thresholding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AofParams {
    /// Average-outward-flux threshold; must be negative (skeleton points
    /// absorb flux).
    pub tau: f64,
    /// Mask connected components smaller than this produce no skeleton.
    pub min_object_area: usize,
}

impl Default for AofParams {
    fn default() -> Self {
        AofParams {
            tau: -0.4,
            min_object_area: 9,
        }
    }
}

/// Distance from each object pixel to the nearest background pixel, where
/// everything outside the grid counts as background; 0 on background pixels.
pub fn interior_edt(mask: &BinaryMap) -> Result<ScalarMap, Error> {
    if !mask.any() {
        return Err(Error::EmptyMask);
    }
    let dims = mask.dims();
    let (w, h) = (dims.width, dims.height);
    let background = mask.complement();
    let bg_d2 = squared_dt_with_labels(&background).map(|(d2, _)| d2);
    let mut dist = ScalarMap::new(dims);
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            let border = (x + 1).min(y + 1).min(w - x).min(h - y) as u64;
            let mut d2 = border * border;
            if let Some(bg) = &bg_d2 {
                d2 = d2.min(bg[dims.index(x, y)]);
            }
            dist.set(x, y, libm::sqrt(d2 as f64));
        }
    }
    Ok(dist)
}

/// Average outward flux of the gradient of `dist` through the unit circle,
/// sampled at the 8 neighbors.
///
/// The gradient uses central differences (one-sided at the grid border), and
/// neighbor samples clamp to the grid. Values lie in roughly `[-1, 1]`.
pub fn average_outward_flux(dist: &ScalarMap) -> ScalarMap {
    let dims = dist.dims();
    let (w, h) = (dims.width, dims.height);

    let mut gx = vec![0.0f64; dims.pixel_count()];
    let mut gy = vec![0.0f64; dims.pixel_count()];
    for y in 0..h {
        for x in 0..w {
            let i = dims.index(x, y);
            gx[i] = if w == 1 {
                0.0
            } else if x == 0 {
                dist.get(1, y) - dist.get(0, y)
            } else if x == w - 1 {
                dist.get(w - 1, y) - dist.get(w - 2, y)
            } else {
                (dist.get(x + 1, y) - dist.get(x - 1, y)) / 2.0
            };
            gy[i] = if h == 1 {
                0.0
            } else if y == 0 {
                dist.get(x, 1) - dist.get(x, 0)
            } else if y == h - 1 {
                dist.get(x, h - 1) - dist.get(x, h - 2)
            } else {
                (dist.get(x, y + 1) - dist.get(x, y - 1)) / 2.0
            };
        }
    }

    const SQRT1_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
    // Neighbor offsets and their unit outward normals.
    const SAMPLES: [(i32, i32, f64, f64); 8] = [
        (1, 0, 1.0, 0.0),
        (1, 1, SQRT1_2, SQRT1_2),
        (0, 1, 0.0, 1.0),
        (-1, 1, -SQRT1_2, SQRT1_2),
        (-1, 0, -1.0, 0.0),
        (-1, -1, -SQRT1_2, -SQRT1_2),
        (0, -1, 0.0, -1.0),
        (1, -1, SQRT1_2, -SQRT1_2),
    ];

    let mut aof = ScalarMap::new(dims);
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0.0;
            for &(dx, dy, nx, ny) in &SAMPLES {
                let qx = (x as i64 + dx as i64).clamp(0, w as i64 - 1) as usize;
                let qy = (y as i64 + dy as i64).clamp(0, h as i64 - 1) as usize;
                let i = dims.index(qx, qy);
                sum += gx[i] * nx + gy[i] * ny;
            }
            aof.set(x, y, sum / 8.0);
        }
    }
    aof
}

/// Skeletonize a binary shape by thresholding average outward flux.
///
/// Object pixels where the flux drops below `tau` form the skeleton; mask
/// components smaller than `min_object_area` are ignored entirely. This is
/// an oracle-grade generator, not a homotopy-preserving thinner.
pub fn skeletonize_binary(mask: &BinaryMap, params: &AofParams) -> Result<BinaryMap, Error> {
    if !mask.any() {
        return Err(Error::EmptyMask);
    }
    if params.tau >= 0.0 {
        return Err(Error::InvalidParameter("tau must be negative"));
    }
    if params.min_object_area == 0 {
        return Err(Error::InvalidParameter("min_object_area must be positive"));
    }
    let dims = mask.dims();
    let keep = components_at_least(mask, params.min_object_area);
    let dist = interior_edt(mask)?;
    let aof = average_outward_flux(&dist);
    let mut skeleton = BinaryMap::new(dims);
    for y in 0..dims.height {
        for x in 0..dims.width {
            if keep.get(x, y) && aof.get(x, y) < params.tau {
                skeleton.set(x, y, true);
            }
        }
    }
    Ok(skeleton)
}

/// Pixels of 8-connected mask components whose area is at least `min_area`.
fn components_at_least(mask: &BinaryMap, min_area: usize) -> BinaryMap {
    let dims = mask.dims();
    let (w, h) = (dims.width, dims.height);
    let mut component = vec![usize::MAX; dims.pixel_count()];
    let mut sizes: Vec<usize> = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for sy in 0..h {
        for sx in 0..w {
            if !mask.get(sx, sy) || component[dims.index(sx, sy)] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            sizes.push(0);
            stack.push((sx, sy));
            component[dims.index(sx, sy)] = id;
            while let Some((x, y)) = stack.pop() {
                sizes[id] += 1;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let nx = x as i64 + dx;
                        let ny = y as i64 + dy;
                        if dims.contains_signed(nx, ny) {
                            let (nx, ny) = (nx as usize, ny as usize);
                            let i = dims.index(nx, ny);
                            if mask.get(nx, ny) && component[i] == usize::MAX {
                                component[i] = id;
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
    }
    let bits = component
        .iter()
        .map(|&id| id != usize::MAX && sizes[id] >= min_area)
        .collect();
    BinaryMap::from_bits(dims, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GridDims;

    fn disk_mask(w: usize, h: usize, cx: i64, cy: i64, r: i64) -> BinaryMap {
        let dims = GridDims::new(w, h);
        let mut m = BinaryMap::new(dims);
        for y in 0..h {
            for x in 0..w {
                let dx = x as i64 - cx;
                let dy = y as i64 - cy;
                if dx * dx + dy * dy <= r * r {
                    m.set(x, y, true);
                }
            }
        }
        m
    }

    fn rect_mask(w: usize, h: usize, x0: usize, y0: usize, rw: usize, rh: usize) -> BinaryMap {
        let dims = GridDims::new(w, h);
        let mut m = BinaryMap::new(dims);
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                m.set(x, y, true);
            }
        }
        m
    }

    #[test]
    fn interior_edt_all_object_center_and_single_pixel() {
        let full = BinaryMap::filled(GridDims::new(5, 5), true);
        let d = interior_edt(&full).unwrap();
        assert_eq!(d.get(2, 2), 3.0);
        assert_eq!(d.get(0, 0), 1.0);

        let mut one = BinaryMap::new(GridDims::new(5, 5));
        one.set(2, 2, true);
        let d1 = interior_edt(&one).unwrap();
        assert_eq!(d1.get(2, 2), 1.0);
        assert_eq!(d1.get(1, 2), 0.0);
    }

    #[test]
    fn interior_edt_matches_brute_force_with_outside_ring() {
        let m = disk_mask(16, 12, 7, 6, 5);
        let d = interior_edt(&m).unwrap();
        for y in 0..12 {
            for x in 0..16 {
                if !m.get(x, y) {
                    assert_eq!(d.get(x, y), 0.0);
                    continue;
                }
                // Brute force over background pixels plus a one-pixel outside ring.
                let mut best = f64::INFINITY;
                for by in -1i64..=12 {
                    for bx in -1i64..=16 {
                        let inside = (0..16).contains(&bx) && (0..12).contains(&by);
                        let is_bg = !inside || !m.get(bx as usize, by as usize);
                        if is_bg {
                            let dx = bx - x as i64;
                            let dy = by - y as i64;
                            best = best.min(((dx * dx + dy * dy) as f64).sqrt());
                        }
                    }
                }
                assert!((d.get(x, y) - best).abs() < 1e-9, "at ({x},{y})");
            }
        }
    }

    #[test]
    fn interior_edt_empty_mask_errors() {
        let m = BinaryMap::new(GridDims::new(4, 4));
        assert_eq!(interior_edt(&m).unwrap_err(), Error::EmptyMask);
    }

    #[test]
    fn aof_constant_distance_is_zero() {
        let d = ScalarMap::from_values(GridDims::new(9, 9), vec![3.5; 81]);
        let aof = average_outward_flux(&d);
        for v in aof.values() {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn aof_linear_ramp_near_zero_interior() {
        let dims = GridDims::new(11, 11);
        let mut d = ScalarMap::new(dims);
        for y in 0..11 {
            for x in 0..11 {
                d.set(x, y, 0.7 * x as f64 + 0.2 * y as f64);
            }
        }
        let aof = average_outward_flux(&d);
        for y in 1..10 {
            for x in 1..10 {
                assert!(aof.get(x, y).abs() < 1e-12, "at ({x},{y})");
            }
        }
    }

    #[test]
    fn aof_cone_apex_strongly_negative() {
        // Distance function of an idealized disk: D = R - |p - c|, an
        // apex-up cone whose tip is the medial point.
        let dims = GridDims::new(21, 21);
        let mut d = ScalarMap::new(dims);
        for y in 0..21 {
            for x in 0..21 {
                let dx = x as f64 - 10.0;
                let dy = y as f64 - 10.0;
                d.set(x, y, 14.0 - (dx * dx + dy * dy).sqrt());
            }
        }
        let aof = average_outward_flux(&d);
        assert!(aof.get(10, 10) < -0.5, "apex aof = {}", aof.get(10, 10));
        // Away from the apex the field is smooth and the flux is small.
        assert!(aof.get(3, 10).abs() < 0.2);
        assert!(aof.get(16, 16).abs() < 0.2);
    }

    #[test]
    fn skeleton_subset_of_object_and_ridge_property() {
        let m = rect_mask(48, 20, 4, 4, 40, 12);
        let skel = skeletonize_binary(&m, &AofParams::default()).unwrap();
        assert!(skel.any());
        let d = interior_edt(&m).unwrap();
        for (x, y) in skel.iter_true() {
            assert!(m.get(x, y), "skeleton must lie inside the object");
            let mut nbr_max = 0.0f64;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if m.dims().contains_signed(nx, ny) {
                        nbr_max = nbr_max.max(d.get(nx as usize, ny as usize));
                    }
                }
            }
            assert!(d.get(x, y) >= nbr_max - 1.0, "weak ridge at ({x},{y})");
        }
    }

    #[test]
    fn rectangle_skeleton_near_analytic_medial_axis() {
        // 40x12 rectangle: the analytic medial axis is a horizontal segment
        // plus four 45-degree corner branches. The pixel rectangle occupies
        // [7.5, 47.5] x [7.5, 19.5] in continuous coordinates.
        let m = rect_mask(56, 28, 8, 8, 40, 12);
        let skel = skeletonize_binary(&m, &AofParams::default()).unwrap();
        assert!(skel.any());
        let segments = [
            ((13.5, 13.5), (41.5, 13.5)),
            ((7.5, 7.5), (13.5, 13.5)),
            ((7.5, 19.5), (13.5, 13.5)),
            ((47.5, 7.5), (41.5, 13.5)),
            ((47.5, 19.5), (41.5, 13.5)),
        ];
        let dist_to_segment = |p: (f64, f64), a: (f64, f64), b: (f64, f64)| {
            let (vx, vy) = (b.0 - a.0, b.1 - a.1);
            let (wx, wy) = (p.0 - a.0, p.1 - a.1);
            let t = ((wx * vx + wy * vy) / (vx * vx + vy * vy)).clamp(0.0, 1.0);
            let (dx, dy) = (p.0 - (a.0 + t * vx), p.1 - (a.1 + t * vy));
            (dx * dx + dy * dy).sqrt()
        };
        for (x, y) in skel.iter_true() {
            let p = (x as f64, y as f64);
            let d = segments
                .iter()
                .map(|&(a, b)| dist_to_segment(p, a, b))
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 1.5, "skeleton pixel ({x},{y}) is {d:.2} px off the medial axis");
        }
    }

    #[test]
    fn tiny_mask_yields_empty_skeleton() {
        let mut m = BinaryMap::new(GridDims::new(10, 10));
        m.set(4, 4, true);
        m.set(5, 4, true);
        m.set(4, 5, true);
        let skel = skeletonize_binary(&m, &AofParams::default()).unwrap();
        assert!(!skel.any());
    }

    #[test]
    fn bad_params_rejected() {
        let m = disk_mask(16, 16, 8, 8, 5);
        let bad_tau = AofParams {
            tau: 0.1,
            ..AofParams::default()
        };
        assert!(skeletonize_binary(&m, &bad_tau).is_err());
    }

    #[test]
    fn rotation_by_90_equivariance() {
        let m = rect_mask(30, 22, 5, 6, 20, 9);
        let dims = m.dims();
        let mut rot = BinaryMap::new(GridDims::new(dims.height, dims.width));
        for (x, y) in m.iter_true() {
            rot.set(dims.height - 1 - y, x, true);
        }
        let p = AofParams::default();
        let s = skeletonize_binary(&m, &p).unwrap();
        let s_rot = skeletonize_binary(&rot, &p).unwrap();
        for y in 0..dims.height {
            for x in 0..dims.width {
                assert_eq!(s.get(x, y), s_rot.get(dims.height - 1 - y, x));
            }
        }
    }
}
