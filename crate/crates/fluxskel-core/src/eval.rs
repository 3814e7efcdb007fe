//! Tolerance matching and precision-recall evaluation of thin predictions.
//!
//! A predicted pixel counts as correct when it lies within a small distance
//! of some ground-truth pixel, and a ground-truth pixel counts as recalled
//! when a prediction lies within that distance of it. The distance is a
//! fixed fraction of the image diagonal. Matching is distance-based (via
//! the exact distance transform), not one-to-one assignment.

use alloc::vec::Vec;

use crate::dt::within_distance_sq;
use crate::error::Error;
use crate::raster::{BinaryMap, GridDims, ScalarMap};

/// Match tolerance as a fraction of the image diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchTolerance {
    pub rho: f64,
}

impl MatchTolerance {
    pub const DEFAULT_RHO: f64 = 0.0075;

    pub fn new(rho: f64) -> Option<Self> {
        if rho > 0.0 {
            Some(MatchTolerance { rho })
        } else {
            None
        }
    }

    /// Tolerance in pixels for the given grid: `rho * sqrt(w^2 + h^2)`.
    pub fn distance_px(self, dims: GridDims) -> f64 {
        self.rho * dims.diagonal()
    }
}

impl Default for MatchTolerance {
    fn default() -> Self {
        MatchTolerance {
            rho: Self::DEFAULT_RHO,
        }
    }
}

/// Outcome of tolerance matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchCounts {
    /// Predicted pixels within tolerance of some ground-truth pixel.
    pub true_positives: usize,
    /// Predicted pixels with no ground-truth pixel in range.
    pub false_positives: usize,
    /// Ground-truth pixels with no predicted pixel in range.
    pub false_negatives: usize,
    /// Ground-truth pixels with a predicted pixel in range.
    pub recalled: usize,
}

impl MatchCounts {
    /// `tp / (tp + fp)`; 1 by convention when there are no predictions.
    pub fn precision(&self) -> f64 {
        let total = self.true_positives + self.false_positives;
        if total == 0 {
            1.0
        } else {
            self.true_positives as f64 / total as f64
        }
    }

    /// `recalled / |GT|`.
    pub fn recall(&self) -> f64 {
        let gt = self.recalled + self.false_negatives;
        if gt == 0 {
            0.0
        } else {
            self.recalled as f64 / gt as f64
        }
    }
}

/// One point of a precision-recall curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// The best point of the curve by F-measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// PR points (sorted by threshold), the optimal point, and its raw counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub pr_points: Vec<PrPoint>,
    pub best: BestPoint,
    pub counts: MatchCounts,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Match a binary prediction against ground truth at the given tolerance.
///
/// Errors on mismatched dimensions and on empty ground truth (recall would
/// be undefined).
pub fn match_with_tolerance(
    pred: &BinaryMap,
    gt: &BinaryMap,
    tol: MatchTolerance,
) -> Result<MatchCounts, Error> {
    if pred.dims() != gt.dims() {
        return Err(Error::DimensionMismatch {
            expected: (gt.dims().width, gt.dims().height),
            actual: (pred.dims().width, pred.dims().height),
        });
    }
    if !gt.any() {
        return Err(Error::EmptyGroundTruth);
    }
    let d = tol.distance_px(pred.dims());
    // Integer squared distances are exact, so comparing against floor(d^2)
    // is the same predicate as dist <= d.
    let d2cap = (d * d) as u64;

    let near_gt = within_distance_sq(gt, d2cap);
    let mut tp = 0usize;
    let mut fp = 0usize;
    for (i, &p) in pred.bits().iter().enumerate() {
        if p {
            if near_gt[i] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }

    let mut recalled = 0usize;
    let mut missed = 0usize;
    if pred.any() {
        let near_pred = within_distance_sq(pred, d2cap);
        for (i, &g) in gt.bits().iter().enumerate() {
            if g {
                if near_pred[i] {
                    recalled += 1;
                } else {
                    missed += 1;
                }
            }
        }
    } else {
        missed = gt.count_true();
    }

    Ok(MatchCounts {
        true_positives: tp,
        false_positives: fp,
        false_negatives: missed,
        recalled,
    })
}

/// Sweep thresholds over a confidence map and report the PR curve.
///
/// Thresholds are `i / (num_thresholds + 1)` for `i = 1..=num_thresholds`
/// (0.01 through 0.99 at the default 99); the map is binarized with
/// `confidence >= t`. The best point maximizes F, ties broken by larger
/// recall, then by the lower threshold.
pub fn pr_curve(
    confidence: &ScalarMap,
    gt: &BinaryMap,
    tol: MatchTolerance,
    num_thresholds: usize,
) -> Result<EvalReport, Error> {
    if num_thresholds == 0 {
        return Err(Error::InvalidParameter("num_thresholds must be positive"));
    }
    if confidence.dims() != gt.dims() {
        return Err(Error::DimensionMismatch {
            expected: (gt.dims().width, gt.dims().height),
            actual: (confidence.dims().width, confidence.dims().height),
        });
    }
    if !gt.any() {
        return Err(Error::EmptyGroundTruth);
    }
    let dims = confidence.dims();
    let mut pr_points = Vec::with_capacity(num_thresholds);
    let mut best: Option<(BestPoint, MatchCounts)> = None;
    for i in 1..=num_thresholds {
        let t = i as f64 / (num_thresholds + 1) as f64;
        let bits = confidence.values().iter().map(|&c| c >= t).collect();
        let pred = BinaryMap::from_bits(dims, bits);
        let counts = match_with_tolerance(&pred, gt, tol)?;
        let p = counts.precision();
        let r = counts.recall();
        let f = f_measure(p, r);
        pr_points.push(PrPoint {
            threshold: t,
            precision: p,
            recall: r,
        });
        let better = match &best {
            None => true,
            Some((b, _)) => f > b.f_measure || (f == b.f_measure && r > b.recall),
        };
        if better {
            best = Some((
                BestPoint {
                    threshold: t,
                    precision: p,
                    recall: r,
                    f_measure: f,
                },
                counts,
            ));
        }
    }
    let (best, counts) = best.expect("at least one threshold");
    Ok(EvalReport {
        pr_points,
        best,
        counts,
    })
}

/// Report for a plain binary prediction with no confidence map: a single
/// point at threshold 0.
pub fn single_point_report(
    pred: &BinaryMap,
    gt: &BinaryMap,
    tol: MatchTolerance,
) -> Result<EvalReport, Error> {
    let counts = match_with_tolerance(pred, gt, tol)?;
    let p = counts.precision();
    let r = counts.recall();
    let f = f_measure(p, r);
    Ok(EvalReport {
        pr_points: alloc::vec![PrPoint {
            threshold: 0.0,
            precision: p,
            recall: r,
        }],
        best: BestPoint {
            threshold: 0.0,
            precision: p,
            recall: r,
            f_measure: f,
        },
        counts,
    })
}
