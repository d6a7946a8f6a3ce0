//! Kernel functions and Gram-matrix construction.
//!
//! Two kernels are supported: the linear kernel (plain dot product) and the
//! Gaussian kernel `exp(−gamma·‖p−q‖²)`. Gram matrices are stored dense;
//! the datasets this crate targets stay well under a thousand samples.

use crate::error::Error;
use crate::Result;

/// Which kernel to use, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `K(p, q) = p · q`.
    Linear,
    /// `K(p, q) = exp(−gamma · ‖p − q‖²)` with `gamma > 0`.
    Gaussian {
        /// Width parameter, units of 1/feature-distance².
        gamma: f64,
    },
}

impl KernelSpec {
    /// Check parameter domains (`gamma > 0` for Gaussian).
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Gaussian { gamma } => {
                if gamma.is_finite() && *gamma > 0.0 {
                    Ok(())
                } else {
                    Err(Error::config(format!(
                        "Gaussian kernel requires gamma > 0, got {gamma}"
                    )))
                }
            }
        }
    }

    /// Evaluate without the length check; callers must guarantee
    /// `p.len() == q.len()`.
    fn eval_unchecked(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            KernelSpec::Linear => p.iter().zip(q).map(|(a, b)| a * b).sum(),
            KernelSpec::Gaussian { gamma } => {
                let d2: f64 = p
                    .iter()
                    .zip(q)
                    .map(|(a, b)| {
                        let d = a - b;
                        d * d
                    })
                    .sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// Evaluate `spec` on a pair of equal-length feature vectors.
pub fn kernel_eval(spec: &KernelSpec, p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::structural(format!(
            "kernel inputs have different lengths ({} vs {})",
            p.len(),
            q.len()
        )));
    }
    Ok(spec.eval_unchecked(p, q))
}

/// Pairwise kernel matrix: entry `(i, j)` is `K(rows[i], cols[j])`.
///
/// All samples must share one dimension. With `rows` and `cols` the same
/// set, the result is symmetric positive semidefinite (up to round-off).
pub fn gram_matrix(spec: &KernelSpec, rows: &[Vec<f64>], cols: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let dim = rows.first().or_else(|| cols.first()).map_or(0, |v| v.len());
    for (what, set) in [("row", rows), ("column", cols)] {
        if let Some(bad) = set.iter().position(|v| v.len() != dim) {
            return Err(Error::structural(format!(
                "{what} sample {bad} has dimension {}, expected {dim}",
                set[bad].len()
            )));
        }
    }
    Ok(rows
        .iter()
        .map(|p| cols.iter().map(|q| spec.eval_unchecked(p, q)).collect())
        .collect())
}
