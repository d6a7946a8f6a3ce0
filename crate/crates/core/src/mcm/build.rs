//! Construction of the classifier training LPs.
//!
//! All four machines minimize the same complexity proxy `h` over the same
//! two-row-per-sample constraint pattern; they differ only in whether slack
//! variables exist, how slacks are weighted in the objective, and whether
//! the discriminant is written over features (`w`) or over an expansion on
//! training samples (`λ` against a Gram matrix).
//!
//! Variable layouts (all leading blocks free, `q` nonnegative):
//!
//! * hard linear:   `[w₀..w_{n−1}, b, h]`
//! * soft linear:   `[w₀..w_{n−1}, b, h, q₀..q_{M−1}]`
//! * kernelized:    `[λ₀..λ_{M−1}, b, h, q₀..q_{M−1}]`
//!
//! Rows come in sample order, two per sample `i` with `f_i` the discriminant
//! value of sample `i`:
//!
//! * ceiling: `y_i·f_i − h (+ q_i) ≤ 0` — `h` must top every sample's margin;
//! * floor:   `y_i·f_i (+ q_i) ≥ 1` — every sample clears the unit margin,
//!   softened by its slack.
//!
//! The slack also appears on the ceiling row (its printed form); see
//! [`UpperSlackSign`] for the variant without it.

use crate::dataset::Dataset;
use crate::error::Error;
use crate::lp::{LpProblem, Relation};
use crate::Result;

/// Whether the slack `q_i` appears on the ceiling constraint.
///
/// The formulation this crate follows writes `h ≥ y_i·f_i + q_i`, which
/// tightens the ceiling as slack grows. Reading the slack as a pure margin
/// relaxation would instead drop it from that row. Both are available;
/// `WithSlack` is the default and is what every benchmark number here uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperSlackSign {
    /// Ceiling row is `y_i·f_i − h + q_i ≤ 0`.
    #[default]
    WithSlack,
    /// Ceiling row is `y_i·f_i − h ≤ 0`.
    WithoutSlack,
}

/// Column positions of the linear-machine LPs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearLpLayout {
    /// Feature count `n`; `w` occupies columns `0..n`.
    pub n_features: usize,
    /// Sample count `M`.
    pub n_samples: usize,
    /// Column of the offset `b`.
    pub b_col: usize,
    /// Column of the complexity variable `h`.
    pub h_col: usize,
    /// First slack column, or `None` for the hard-margin LP.
    pub q_start: Option<usize>,
}

impl LinearLpLayout {
    /// Split an LP solution point into `(w, b, h)`.
    pub fn unpack<'a>(&self, point: &'a [f64]) -> (&'a [f64], f64, f64) {
        (
            &point[..self.n_features],
            point[self.b_col],
            point[self.h_col],
        )
    }
}

/// Column positions of the kernelized LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelLpLayout {
    /// Sample count `M`; `λ` occupies columns `0..M`.
    pub n_samples: usize,
    /// Column of the offset `b`.
    pub b_col: usize,
    /// Column of the complexity variable `h`.
    pub h_col: usize,
    /// First slack column.
    pub q_start: usize,
}

impl KernelLpLayout {
    /// Split an LP solution point into `(λ, b, h)`.
    pub fn unpack<'a>(&self, point: &'a [f64]) -> (&'a [f64], f64, f64) {
        (
            &point[..self.n_samples],
            point[self.b_col],
            point[self.h_col],
        )
    }
}

fn check_slack_weights(c: f64, s: &[f64], m: usize) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::config(format!("C must be positive, got {c}")));
    }
    if s.len() != m {
        return Err(Error::structural(format!(
            "{} slack weights for {m} samples",
            s.len()
        )));
    }
    if let Some(i) = s.iter().position(|&v| !(v > 0.0 && v <= 1.0)) {
        return Err(Error::config(format!(
            "slack weight s[{i}] = {} outside (0, 1]",
            s[i]
        )));
    }
    Ok(())
}

/// Hard-margin LP: `min h` with both constraint rows per sample and no
/// slack. Infeasible exactly when the training set is not linearly
/// separable (surfaces as a solver status, not a build error).
pub fn build_linear_hard_lp(ds: &Dataset) -> Result<(LpProblem, LinearLpLayout)> {
    ds.validate()?;
    ds.require_both_classes()?;
    let n = ds.num_features();
    let m = ds.len();
    let nv = n + 2;
    let layout = LinearLpLayout {
        n_features: n,
        n_samples: m,
        b_col: n,
        h_col: n + 1,
        q_start: None,
    };
    let mut objective = vec![0.0; nv];
    objective[layout.h_col] = 1.0;
    let mut lp = LpProblem::new(objective);
    for j in 0..nv {
        lp.set_free(j);
    }
    for (row, &y) in ds.features.iter().zip(&ds.labels) {
        let mut ceiling = vec![0.0; nv];
        for (c, &x) in ceiling.iter_mut().zip(row) {
            *c = y * x;
        }
        ceiling[layout.b_col] = y;
        ceiling[layout.h_col] = -1.0;
        lp.push_constraint(ceiling, Relation::Le, 0.0);

        let mut floor = vec![0.0; nv];
        for (c, &x) in floor.iter_mut().zip(row) {
            *c = y * x;
        }
        floor[layout.b_col] = y;
        lp.push_constraint(floor, Relation::Ge, 1.0);
    }
    Ok((lp, layout))
}

/// Soft/fuzzy linear LP: `min h + C·Σ s_i·q_i`. With `s ≡ 1` this is the
/// plain soft-margin machine; memberships in `(0, 1]` make it fuzzy.
pub fn build_linear_soft_lp(
    ds: &Dataset,
    c: f64,
    s: &[f64],
    upper_slack: UpperSlackSign,
) -> Result<(LpProblem, LinearLpLayout)> {
    ds.validate()?;
    ds.require_both_classes()?;
    let n = ds.num_features();
    let m = ds.len();
    check_slack_weights(c, s, m)?;
    let nv = n + 2 + m;
    let layout = LinearLpLayout {
        n_features: n,
        n_samples: m,
        b_col: n,
        h_col: n + 1,
        q_start: Some(n + 2),
    };
    let q_start = n + 2;
    let mut objective = vec![0.0; nv];
    objective[layout.h_col] = 1.0;
    for (i, &si) in s.iter().enumerate() {
        objective[q_start + i] = c * si;
    }
    let mut lp = LpProblem::new(objective);
    for j in 0..q_start {
        lp.set_free(j); // w, b, h free; q keeps the nonnegative default
    }
    for (i, (row, &y)) in ds.features.iter().zip(&ds.labels).enumerate() {
        let mut ceiling = vec![0.0; nv];
        for (cf, &x) in ceiling.iter_mut().zip(row) {
            *cf = y * x;
        }
        ceiling[layout.b_col] = y;
        ceiling[layout.h_col] = -1.0;
        if upper_slack == UpperSlackSign::WithSlack {
            ceiling[q_start + i] = 1.0;
        }
        lp.push_constraint(ceiling, Relation::Le, 0.0);

        let mut floor = vec![0.0; nv];
        for (cf, &x) in floor.iter_mut().zip(row) {
            *cf = y * x;
        }
        floor[layout.b_col] = y;
        floor[q_start + i] = 1.0;
        lp.push_constraint(floor, Relation::Ge, 1.0);
    }
    Ok((lp, layout))
}

/// Kernelized soft/fuzzy LP over a precomputed Gram matrix: the
/// discriminant of sample `i` is `Σⱼ λⱼ·gram[i][j] + b`.
pub fn build_kernel_lp(
    gram: &[Vec<f64>],
    labels: &[f64],
    c: f64,
    s: &[f64],
    upper_slack: UpperSlackSign,
) -> Result<(LpProblem, KernelLpLayout)> {
    let m = gram.len();
    if let Some(i) = gram.iter().position(|r| r.len() != m) {
        return Err(Error::structural(format!(
            "gram matrix is not square: row {i} has {} entries for {m} rows",
            gram[i].len()
        )));
    }
    if labels.len() != m {
        return Err(Error::structural(format!(
            "{} labels for a {m}x{m} gram matrix",
            labels.len()
        )));
    }
    if m == 0 {
        return Err(Error::config("cannot build a kernel LP from zero samples"));
    }
    check_slack_weights(c, s, m)?;
    let nv = 2 * m + 2;
    let layout = KernelLpLayout {
        n_samples: m,
        b_col: m,
        h_col: m + 1,
        q_start: m + 2,
    };
    let mut objective = vec![0.0; nv];
    objective[layout.h_col] = 1.0;
    for (i, &si) in s.iter().enumerate() {
        objective[layout.q_start + i] = c * si;
    }
    let mut lp = LpProblem::new(objective);
    for j in 0..layout.q_start {
        lp.set_free(j); // λ, b, h free; q keeps the nonnegative default
    }
    for (i, (krow, &y)) in gram.iter().zip(labels).enumerate() {
        let mut ceiling = vec![0.0; nv];
        for (cf, &k) in ceiling.iter_mut().zip(krow) {
            *cf = y * k;
        }
        ceiling[layout.b_col] = y;
        ceiling[layout.h_col] = -1.0;
        if upper_slack == UpperSlackSign::WithSlack {
            ceiling[layout.q_start + i] = 1.0;
        }
        lp.push_constraint(ceiling, Relation::Le, 0.0);

        let mut floor = vec![0.0; nv];
        for (cf, &k) in floor.iter_mut().zip(krow) {
            *cf = y * k;
        }
        floor[layout.b_col] = y;
        floor[layout.q_start + i] = 1.0;
        lp.push_constraint(floor, Relation::Ge, 1.0);
    }
    Ok((lp, layout))
}
