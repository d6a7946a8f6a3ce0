//! Fuzzy memberships from distance to the class center.
//!
//! Each training sample gets a weight `s_i ∈ (0, 1]` that scales its slack
//! penalty in the fuzzy formulations: samples far from their class center
//! (likely outliers) get small weights, samples at the center get 1. The
//! scheme is the classic distance-to-centroid rule
//!
//! ```text
//! s_i = 1 − ‖x̄_c − x_i‖ / (r_c + δ)
//! ```
//!
//! where `x̄_c` is the sample's own-class mean, `r_c` the class radius (the
//! farthest distance from the mean within the class), and `δ > 0` keeps the
//! farthest sample's weight strictly positive.
//!
//! Memberships are meant to be computed on standardized features so a single
//! wide-scaled raw column cannot dominate the radius; the training layer
//! enforces that ordering.

use crate::dataset::Dataset;
use crate::error::Error;
use crate::Result;

/// Relative δ default: this factor times the larger class radius.
pub const DELTA_RADIUS_FACTOR: f64 = 1e-4;
/// Absolute floor for the default δ so it never vanishes.
pub const DELTA_FLOOR: f64 = 1e-12;

/// Per-sample memberships with the geometry they came from.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MembershipVector {
    /// One membership in `(0, 1]` per sample, in dataset order.
    pub values: Vec<f64>,
    /// The δ used.
    pub delta: f64,
    /// Mean of the +1 class.
    pub center_pos: Vec<f64>,
    /// Mean of the −1 class.
    pub center_neg: Vec<f64>,
    /// Largest distance of a +1 sample from `center_pos`.
    pub radius_pos: f64,
    /// Largest distance of a −1 sample from `center_neg`.
    pub radius_neg: f64,
    /// Distance of each sample to its own class center.
    pub distances: Vec<f64>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Arithmetic mean of each class's samples: `(center_+1, center_−1)`.
pub fn class_centers(ds: &Dataset) -> Result<(Vec<f64>, Vec<f64>)> {
    ds.validate()?;
    ds.require_both_classes()?;
    let n = ds.num_features();
    let mut sums = [vec![0.0; n], vec![0.0; n]];
    let mut counts = [0usize; 2];
    for (row, &y) in ds.features.iter().zip(&ds.labels) {
        let k = if y == 1.0 { 0 } else { 1 };
        counts[k] += 1;
        for (acc, v) in sums[k].iter_mut().zip(row) {
            *acc += v;
        }
    }
    for (sum, count) in sums.iter_mut().zip(counts) {
        for acc in sum.iter_mut() {
            *acc /= count as f64;
        }
    }
    let [pos, neg] = sums;
    Ok((pos, neg))
}

/// Maximum distance from each class's samples to its center:
/// `(radius_+1, radius_−1)`. A single-sample class has radius 0.
pub fn class_radii(ds: &Dataset, center_pos: &[f64], center_neg: &[f64]) -> (f64, f64) {
    let mut r = [0.0f64; 2];
    for (row, &y) in ds.features.iter().zip(&ds.labels) {
        let (k, center) = if y == 1.0 {
            (0, center_pos)
        } else {
            (1, center_neg)
        };
        r[k] = r[k].max(euclidean(row, center));
    }
    (r[0], r[1])
}

/// The scale-relative default δ: `1e−4 · max(r₊, r₋)`, floored at `1e−12`.
pub fn default_delta(radius_pos: f64, radius_neg: f64) -> f64 {
    (DELTA_RADIUS_FACTOR * radius_pos.max(radius_neg)).max(DELTA_FLOOR)
}

/// Compute all memberships with an explicit `δ > 0`.
pub fn compute_memberships(ds: &Dataset, delta: f64) -> Result<MembershipVector> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::config(format!(
            "membership delta must be positive, got {delta}"
        )));
    }
    let (center_pos, center_neg) = class_centers(ds)?;
    let (radius_pos, radius_neg) = class_radii(ds, &center_pos, &center_neg);
    let mut values = Vec::with_capacity(ds.len());
    let mut distances = Vec::with_capacity(ds.len());
    for (row, &y) in ds.features.iter().zip(&ds.labels) {
        let (center, radius) = if y == 1.0 {
            (&center_pos, radius_pos)
        } else {
            (&center_neg, radius_neg)
        };
        let d = euclidean(row, center);
        distances.push(d);
        values.push(1.0 - d / (radius + delta));
    }
    Ok(MembershipVector {
        values,
        delta,
        center_pos,
        center_neg,
        radius_pos,
        radius_neg,
        distances,
    })
}

/// Compute memberships with the default δ policy.
pub fn compute_memberships_default(ds: &Dataset) -> Result<MembershipVector> {
    let (center_pos, center_neg) = class_centers(ds)?;
    let (radius_pos, radius_neg) = class_radii(ds, &center_pos, &center_neg);
    compute_memberships(ds, default_delta(radius_pos, radius_neg))
}
