//! Skeleton recovery from a flux field, and the confidence map used by the
//! evaluation protocol.
//!
//! A pixel is an endpoint detection when its flux magnitude exceeds `lambda`
//! while the magnitude at the neighbor its flux points to does not: flux
//! vanishes on the skeleton, so the sub-threshold neighbor marks where the
//! field is absorbed. Detections are then grouped by a dilation of radius
//! `k1` followed by an erosion of radius `k2`.

use crate::error::Error;
use crate::morph::close_asymmetric;
use crate::raster::{BinaryMap, FluxField, ScalarMap};

/// Parameters of the recovery step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryParams {
    /// Flux magnitude threshold.
    pub lambda: f64,
    /// Dilation disk radius.
    pub k1: usize,
    /// Erosion disk radius.
    pub k2: usize,
}

impl Default for RecoveryParams {
    fn default() -> Self {
        RecoveryParams {
            lambda: 0.4,
            k1: 3,
            k2: 4,
        }
    }
}

/// One of the 8 neighbor directions, indexed counterclockwise-in-angle from
/// the +x axis in 45 degree steps (with y growing downward).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionBin {
    index: u8,
}

const OFFSETS: [(i32, i32); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

impl DirectionBin {
    #[inline]
    pub fn index(self) -> u8 {
        self.index
    }

    /// Neighbor offset `(dx, dy)` for this bin.
    #[inline]
    pub fn offset(self) -> (i32, i32) {
        OFFSETS[self.index as usize]
    }
}

/// Bin an angle in degrees (atan2 range, `(-180, 180]`) into one of the 8
/// neighbor directions. Boundaries at odd multiples of 22.5 degrees round
/// half away from zero, so +22.5 goes to bin 1 and -22.5 to bin 7.
pub fn bin_for_angle_degrees(angle_deg: f64) -> DirectionBin {
    let k = libm::round(angle_deg / 45.0) as i64;
    DirectionBin {
        index: k.rem_euclid(8) as u8,
    }
}

/// Direction bin of a nonzero vector; errors on the zero vector.
pub fn bin_direction(v: (f64, f64)) -> Result<DirectionBin, Error> {
    let (fx, fy) = v;
    if fx == 0.0 && fy == 0.0 {
        return Err(Error::ZeroVector);
    }
    let angle = libm::atan2(fy, fx).to_degrees();
    Ok(bin_for_angle_degrees(angle))
}

/// Recover a binary skeleton from a flux field.
///
/// Out-of-bounds neighbors count as magnitude 0, so skeletons touching the
/// image border remain recoverable. An all-zero field yields an empty map.
pub fn recover_skeleton(flux: &FluxField, params: &RecoveryParams) -> BinaryMap {
    let dims = flux.dims();
    let mag = flux.magnitude();
    let mut endpoints = BinaryMap::new(dims);
    for y in 0..dims.height {
        for x in 0..dims.width {
            let m = mag.get(x, y);
            if m <= params.lambda {
                continue;
            }
            // m > lambda >= 0 implies a nonzero vector.
            let bin = bin_direction(flux.get(x, y)).expect("nonzero by magnitude test");
            let (dx, dy) = bin.offset();
            let qx = x as i64 + dx as i64;
            let qy = y as i64 + dy as i64;
            let qmag = if dims.contains_signed(qx, qy) {
                mag.get(qx as usize, qy as usize)
            } else {
                0.0
            };
            if qmag <= params.lambda {
                endpoints.set(x, y, true);
            }
        }
    }
    close_asymmetric(&endpoints, params.k1, params.k2)
}

/// Per-pixel confidence on a recovered skeleton: `1 - min(1, |flux|)` on
/// skeleton pixels, `0` elsewhere. Magnitudes above 1 clamp to confidence 0
/// so thresholds stay within `[0, 1]`.
pub fn confidence_map(flux: &FluxField, skeleton: &BinaryMap) -> Result<ScalarMap, Error> {
    if flux.dims() != skeleton.dims() {
        return Err(Error::DimensionMismatch {
            expected: (flux.dims().width, flux.dims().height),
            actual: (skeleton.dims().width, skeleton.dims().height),
        });
    }
    let dims = flux.dims();
    let mag = flux.magnitude();
    let mut conf = ScalarMap::new(dims);
    for y in 0..dims.height {
        for x in 0..dims.width {
            if skeleton.get(x, y) {
                let m = mag.get(x, y);
                conf.set(x, y, 1.0 - m.min(1.0));
            }
        }
    }
    Ok(conf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GridDims;

    #[test]
    fn bin_cardinal_and_diagonal_directions() {
        assert_eq!(bin_direction((1.0, 0.0)).unwrap().index(), 0);
        assert_eq!(bin_direction((1.0, 0.0)).unwrap().offset(), (1, 0));
        assert_eq!(bin_direction((1.0, 1.0)).unwrap().index(), 1);
        assert_eq!(bin_direction((0.0, 1.0)).unwrap().index(), 2);
        assert_eq!(bin_direction((-1.0, 1.0)).unwrap().index(), 3);
        assert_eq!(bin_direction((-1.0, 0.0)).unwrap().index(), 4);
        assert_eq!(bin_direction((-1.0, -1.0)).unwrap().index(), 5);
        assert_eq!(bin_direction((0.0, -1.0)).unwrap().index(), 6);
        assert_eq!(bin_direction((1.0, -1.0)).unwrap().index(), 7);
    }

    #[test]
    fn bin_three_four_five_example() {
        // atan2(-0.8, -0.6) is about -126.87 degrees; -126.87/45 rounds to -3,
        // which is bin 5, offset (-1, -1).
        let b = bin_direction((-0.6, -0.8)).unwrap();
        assert_eq!(b.index(), 5);
        assert_eq!(b.offset(), (-1, -1));
    }

    #[test]
    fn bin_boundary_rounds_half_away_from_zero() {
        assert_eq!(bin_for_angle_degrees(22.5).index(), 1);
        assert_eq!(bin_for_angle_degrees(-22.5).index(), 7);
        assert_eq!(bin_for_angle_degrees(67.5).index(), 2);
        assert_eq!(bin_for_angle_degrees(-157.5).index(), 4);
        assert_eq!(bin_for_angle_degrees(180.0).index(), 4);
        assert_eq!(bin_for_angle_degrees(22.499).index(), 0);
    }

    #[test]
    fn bin_zero_vector_errors() {
        assert_eq!(bin_direction((0.0, 0.0)).unwrap_err(), Error::ZeroVector);
    }

    #[test]
    fn all_zero_flux_recovers_empty() {
        let flux = FluxField::new(GridDims::new(16, 16));
        let s = recover_skeleton(&flux, &RecoveryParams::default());
        assert!(!s.any());
    }

    #[test]
    fn confidence_values() {
        let dims = GridDims::new(3, 1);
        let flux = FluxField::from_vectors(dims, vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let mut skel = BinaryMap::new(dims);
        skel.set(0, 0, true);
        skel.set(1, 0, true);
        skel.set(2, 0, true);
        let conf = confidence_map(&flux, &skel).unwrap();
        assert_eq!(conf.get(0, 0), 1.0);
        assert_eq!(conf.get(1, 0), 0.0);
        // Magnitude above 1 clamps.
        assert_eq!(conf.get(2, 0), 0.0);
    }

    #[test]
    fn confidence_zero_off_skeleton() {
        let dims = GridDims::new(2, 2);
        let flux = FluxField::from_vectors(
            dims,
            vec![(0.0, 0.0), (0.25, 0.0), (0.0, 0.0), (0.0, 0.0)],
        );
        let mut skel = BinaryMap::new(dims);
        skel.set(1, 0, true);
        let conf = confidence_map(&flux, &skel).unwrap();
        assert_eq!(conf.get(0, 0), 0.0);
        assert_eq!(conf.get(1, 0), 0.75);
        assert_eq!(conf.get(0, 1), 0.0);
    }

    #[test]
    fn confidence_dimension_mismatch() {
        let flux = FluxField::new(GridDims::new(3, 3));
        let skel = BinaryMap::new(GridDims::new(4, 3));
        assert!(matches!(
            confidence_map(&flux, &skel),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn endpoint_set_monotone_in_lambda_before_morphology() {
        // With k1 = k2 = 0 the result is the raw endpoint set; at a higher
        // lambda no detected pixel may have magnitude at or below it.
        let mut skel = BinaryMap::new(GridDims::new(24, 24));
        for x in 4..20 {
            skel.set(x, 12, true);
        }
        let flux =
            crate::fluxgen::compute_context_flux(&skel, crate::fluxgen::ContextRadius::DEFAULT)
                .unwrap();
        let mag = flux.magnitude();
        for lambda in [0.1, 0.4, 0.7] {
            let params = RecoveryParams {
                lambda,
                k1: 0,
                k2: 0,
            };
            let endpoints = recover_skeleton(&flux, &params);
            for (x, y) in endpoints.iter_true() {
                assert!(mag.get(x, y) > lambda);
            }
        }
    }

    #[test]
    fn rotation_by_90_degrees_equivariance() {
        // Rotate both the raster and each vector; the recovered skeleton
        // rotates identically. Padding keeps the border out of play.
        let dims = GridDims::new(40, 40);
        let mut skel = BinaryMap::new(dims);
        for i in 0..14 {
            skel.set(13 + i, 16 + i / 2, true);
        }
        let flux = crate::fluxgen::compute_context_flux(&skel, crate::fluxgen::ContextRadius::DEFAULT)
            .unwrap();

        // (x, y) -> (h - 1 - y, x), vector (fx, fy) -> (-fy, fx).
        let mut rotated = FluxField::new(GridDims::new(dims.height, dims.width));
        for y in 0..dims.height {
            for x in 0..dims.width {
                let (fx, fy) = flux.get(x, y);
                rotated.set(dims.height - 1 - y, x, (-fy, fx));
            }
        }

        let params = RecoveryParams::default();
        let rec = recover_skeleton(&flux, &params);
        let rec_rot = recover_skeleton(&rotated, &params);
        for y in 0..dims.height {
            for x in 0..dims.width {
                assert_eq!(
                    rec.get(x, y),
                    rec_rot.get(dims.height - 1 - y, x),
                    "mismatch at ({x},{y})"
                );
            }
        }
    }
}
