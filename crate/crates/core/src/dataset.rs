//! In-memory datasets and per-feature standardization.
//!
//! A [`Dataset`] is a dense feature matrix with ±1 labels. Training always
//! standardizes features to zero mean and unit variance column by column
//! (constant columns are centered only); the fitted
//! [`StandardizationParams`] travel with the trained model so prediction
//! can apply the identical transform to raw inputs.

use crate::error::Error;
use crate::Result;

/// A labeled sample matrix: `M` rows by `n` features, labels in {+1, −1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Row-per-sample feature matrix.
    pub features: Vec<Vec<f64>>,
    /// One label per row, +1.0 or −1.0 exactly.
    pub labels: Vec<f64>,
    /// Column names when the source file had a header.
    pub feature_names: Option<Vec<String>>,
    /// Whether `features` are already standardized.
    pub standardized: bool,
}

impl Dataset {
    /// Build and validate a dataset from raw parts.
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        let ds = Dataset {
            features,
            labels,
            feature_names: None,
            standardized: false,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Sample count `M`.
    pub fn len(&self) -> usize {
        self.features.len()
    }

    /// True when the dataset has no rows.
    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Feature count `n` (0 for an empty dataset).
    pub fn num_features(&self) -> usize {
        self.features.first().map_or(0, |r| r.len())
    }

    /// Check shape consistency, label domain, and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.features.len() != self.labels.len() {
            return Err(Error::structural(format!(
                "{} feature rows but {} labels",
                self.features.len(),
                self.labels.len()
            )));
        }
        let n = self.num_features();
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != n {
                return Err(Error::structural(format!(
                    "row {i} has {} features, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::data_row(i + 1, "non-finite feature value"));
            }
        }
        if let Some(bad) = self.labels.iter().position(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::structural(format!(
                "label at row {bad} is {}, expected +1 or -1",
                self.labels[bad]
            )));
        }
        Ok(())
    }

    /// Error unless both classes appear (required for training).
    pub fn require_both_classes(&self) -> Result<()> {
        let pos = self.labels.iter().any(|&y| y == 1.0);
        let neg = self.labels.iter().any(|&y| y == -1.0);
        if pos && neg {
            Ok(())
        } else {
            Err(Error::config(
                "training data contains a single class; both +1 and -1 are required",
            ))
        }
    }

    /// New dataset holding the given row indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            standardized: self.standardized,
        }
    }
}

/// Per-column affine transform `z = (x − mean) / scale`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StandardizationParams {
    /// Column means at fit time.
    pub means: Vec<f64>,
    /// Column standard deviations; exactly 1.0 for constant columns.
    pub scales: Vec<f64>,
}

/// Columns with standard deviation below this are treated as constant and
/// only centered, so standardization never divides by a vanishing scale.
const CONSTANT_COLUMN_EPS: f64 = 1e-12;

impl StandardizationParams {
    /// The do-nothing transform in `n` dimensions.
    pub fn identity(n: usize) -> Self {
        StandardizationParams {
            means: vec![0.0; n],
            scales: vec![1.0; n],
        }
    }

    /// Fit means and population standard deviations on `features`.
    pub fn fit(features: &[Vec<f64>]) -> Self {
        let m = features.len();
        let n = features.first().map_or(0, |r| r.len());
        if m == 0 {
            return Self::identity(n);
        }
        let mut means = vec![0.0; n];
        for row in features {
            for (acc, v) in means.iter_mut().zip(row) {
                *acc += v;
            }
        }
        for acc in &mut means {
            *acc /= m as f64;
        }
        let mut scales = vec![0.0; n];
        for row in features {
            for ((acc, v), mu) in scales.iter_mut().zip(row).zip(&means) {
                let d = v - mu;
                *acc += d * d;
            }
        }
        for acc in &mut scales {
            let sd = (*acc / m as f64).sqrt();
            *acc = if sd < CONSTANT_COLUMN_EPS { 1.0 } else { sd };
        }
        StandardizationParams { means, scales }
    }

    /// Dimension of the transform.
    pub fn num_features(&self) -> usize {
        self.means.len()
    }

    /// Standardize one raw feature vector.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.means.len() {
            return Err(Error::structural(format!(
                "input has {} features, standardization expects {}",
                x.len(),
                self.means.len()
            )));
        }
        Ok(x.iter()
            .zip(&self.means)
            .zip(&self.scales)
            .map(|((v, mu), sd)| (v - mu) / sd)
            .collect())
    }

    /// Map a standardized vector back to raw coordinates.
    pub fn invert(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.means.len() {
            return Err(Error::structural(format!(
                "input has {} features, standardization expects {}",
                z.len(),
                self.means.len()
            )));
        }
        Ok(z.iter()
            .zip(&self.means)
            .zip(&self.scales)
            .map(|((v, mu), sd)| v * sd + mu)
            .collect())
    }

    /// Standardize a whole dataset, marking the result as standardized.
    pub fn apply_dataset(&self, ds: &Dataset) -> Result<Dataset> {
        let features = ds
            .features
            .iter()
            .map(|row| self.apply(row))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            features,
            labels: ds.labels.clone(),
            feature_names: ds.feature_names.clone(),
            standardized: true,
        })
    }
}
