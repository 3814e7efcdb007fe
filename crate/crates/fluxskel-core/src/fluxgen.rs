//! Ground-truth context flux generation.
//!
//! A binary skeleton map splits the grid into three disjoint regions: the
//! skeleton pixels themselves, the *context* (everything within a Euclidean
//! disk of radius `r` of the skeleton, skeleton excluded), and the
//! background. Context pixels carry the unit vector pointing at their
//! nearest skeleton pixel; skeleton and background pixels carry `(0, 0)`.
//!
//! The module also provides the class-balancing pixel weights and the
//! weighted L2 objective used to compare a predicted field against ground
//! truth.

use alloc::vec;
use alloc::vec::Vec;

use crate::dt::euclidean_dt_with_labels;
use crate::error::Error;
use crate::morph::{self, disk_se};
use crate::raster::{BinaryMap, FluxField, GridDims, ScalarMap};

/// Radius of the skeleton context neighborhood, in pixels (at least 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextRadius(usize);

impl ContextRadius {
    pub const DEFAULT: ContextRadius = ContextRadius(7);

    pub fn new(r: usize) -> Option<Self> {
        if r >= 1 {
            Some(ContextRadius(r))
        } else {
            None
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

impl Default for ContextRadius {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Which of the three regions a pixel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    Skeleton,
    Context,
    Background,
}

/// Disjoint cover of the grid by skeleton, context, and background pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionPartition {
    dims: GridDims,
    labels: Vec<RegionLabel>,
    skeleton_count: usize,
    context_count: usize,
    background_count: usize,
}

impl RegionPartition {
    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> RegionLabel {
        self.labels[self.dims.index(x, y)]
    }

    pub fn labels(&self) -> &[RegionLabel] {
        &self.labels
    }

    /// |Rs|
    pub fn skeleton_count(&self) -> usize {
        self.skeleton_count
    }

    /// |Rc|
    pub fn context_count(&self) -> usize {
        self.context_count
    }

    /// |Rb|
    pub fn background_count(&self) -> usize {
        self.background_count
    }
}

/// Partition the grid: context is `dilate(skeleton, disk r)` minus the
/// skeleton, background is the rest.
pub fn partition_regions(
    skeleton: &BinaryMap,
    r: ContextRadius,
) -> Result<RegionPartition, Error> {
    if !skeleton.any() {
        return Err(Error::NoSkeletonPixels);
    }
    let dims = skeleton.dims();
    let dilated = morph::dilate(skeleton, &disk_se(r.get()));
    let mut labels = vec![RegionLabel::Background; dims.pixel_count()];
    let (mut ns, mut nc, mut nb) = (0usize, 0usize, 0usize);
    for ((label, &skel), &dil) in labels.iter_mut().zip(skeleton.bits()).zip(dilated.bits()) {
        *label = if skel {
            ns += 1;
            RegionLabel::Skeleton
        } else if dil {
            nc += 1;
            RegionLabel::Context
        } else {
            nb += 1;
            RegionLabel::Background
        };
    }
    Ok(RegionPartition {
        dims,
        labels,
        skeleton_count: ns,
        context_count: nc,
        background_count: nb,
    })
}

/// Ground-truth context flux: for each context pixel `p`, the unit vector
/// from `p` toward its nearest skeleton pixel; `(0, 0)` on skeleton and
/// background pixels.
pub fn compute_context_flux(
    skeleton: &BinaryMap,
    r: ContextRadius,
) -> Result<FluxField, Error> {
    let partition = partition_regions(skeleton, r)?;
    let (_, nearest) = euclidean_dt_with_labels(skeleton).map_err(|_| Error::NoSkeletonPixels)?;
    let dims = skeleton.dims();
    let mut field = FluxField::new(dims);
    for y in 0..dims.height {
        for x in 0..dims.width {
            if partition.label(x, y) != RegionLabel::Context {
                continue;
            }
            let (nx, ny) = nearest
                .nearest_site(x, y)
                .expect("skeleton verified non-empty");
            let dx = nx as f64 - x as f64;
            let dy = ny as f64 - y as f64;
            let norm = libm::sqrt(dx * dx + dy * dy);
            field.set(x, y, (dx / norm, dy / norm));
        }
    }
    Ok(field)
}

/// Class-balancing weights: foreground pixels (context and skeleton) get
/// `|Rb| / N`, background pixels get `(|Rc| + |Rs|) / N`, where `N` is the
/// grid size. Total weight mass is thus equal on both sides.
pub fn pixel_weights(partition: &RegionPartition) -> ScalarMap {
    let total = partition.dims.pixel_count() as f64;
    let fg = (partition.context_count + partition.skeleton_count) as f64;
    let bg = partition.background_count as f64;
    let w_fg = bg / total;
    let w_bg = fg / total;
    let values = partition
        .labels
        .iter()
        .map(|l| match l {
            RegionLabel::Background => w_bg,
            _ => w_fg,
        })
        .collect();
    ScalarMap::from_values(partition.dims, values)
}

/// How per-pixel differences enter the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossNorm {
    /// Squared Euclidean distance per pixel (the conventional L2 regression
    /// reading; differentiable at zero).
    #[default]
    SquaredL2,
    /// Unsquared Euclidean distance per pixel, kept as a diagnostic variant.
    L2,
}

/// Weighted L2 objective with the default squared per-pixel norm.
pub fn weighted_l2_loss(
    pred: &FluxField,
    gt: &FluxField,
    weights: &ScalarMap,
) -> Result<f64, Error> {
    weighted_loss(pred, gt, weights, LossNorm::SquaredL2)
}

/// `sum_p w(p) * ||gt(p) - pred(p)||` with the chosen per-pixel norm.
///
/// The sum is reduced pairwise over the row-major term list, so the result
/// is reproducible regardless of platform.
pub fn weighted_loss(
    pred: &FluxField,
    gt: &FluxField,
    weights: &ScalarMap,
    norm: LossNorm,
) -> Result<f64, Error> {
    check_dims(pred.dims(), gt.dims())?;
    check_dims(pred.dims(), weights.dims())?;
    let terms: Vec<f64> = pred
        .vectors()
        .iter()
        .zip(gt.vectors())
        .zip(weights.values())
        .map(|((&(px, py), &(gx, gy)), &w)| {
            let dx = gx - px;
            let dy = gy - py;
            let sq = dx * dx + dy * dy;
            match norm {
                LossNorm::SquaredL2 => w * sq,
                LossNorm::L2 => w * libm::sqrt(sq),
            }
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

fn check_dims(a: GridDims, b: GridDims) -> Result<(), Error> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: (a.width, a.height),
            actual: (b.width, b.height),
        })
    }
}

/// Deterministic pairwise (tree) summation.
pub(crate) fn pairwise_sum(terms: &[f64]) -> f64 {
    if terms.len() <= 8 {
        return terms.iter().sum();
    }
    let mid = terms.len() / 2;
    pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
}
