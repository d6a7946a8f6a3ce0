//! Training and prediction for the margin machines.
//!
//! Training composes the pieces in a fixed order: fit standardization on
//! the training features, standardize, derive slack weights (uniform for
//! the plain soft machine, distance-based memberships for the fuzzy one),
//! build the LP, solve it, and package the solution together with the
//! standardization so prediction can accept raw inputs.

pub mod build;

pub use build::{
    build_kernel_lp, build_linear_hard_lp, build_linear_soft_lp, KernelLpLayout, LinearLpLayout,
    UpperSlackSign,
};

use crate::dataset::{Dataset, StandardizationParams};
use crate::error::Error;
use crate::kernels::{gram_matrix, kernel_eval, KernelSpec};
use crate::lp::{check_solution, solve, LpStatus, SolveOptions};
use crate::membership;
use crate::Result;

/// Default support-vector threshold, relative to the largest |λ|.
pub const DEFAULT_SV_TOLERANCE: f64 = 1e-6;

/// Slack a solved model may leave on its own constraints before training
/// rejects the solve as numerically broken (`h ≥ 1` and margin checks).
const MODEL_SANITY_TOL: f64 = 1e-7;

/// How per-sample slack weights are chosen at training time.
#[derive(Debug, Clone, PartialEq)]
pub enum SlackWeights {
    /// All weights 1: the plain soft-margin machine.
    Uniform,
    /// Distance-to-class-center memberships computed on the standardized
    /// training features; `delta: None` uses the scale-relative default.
    Fuzzy {
        /// Override for the membership δ.
        delta: Option<f64>,
    },
    /// Caller-supplied weights in `(0, 1]`, one per training sample.
    Explicit(Vec<f64>),
}

/// Options shared by all training entry points.
#[derive(Debug, Clone)]
pub struct McmOptions {
    /// Slack placement on the ceiling row (see [`UpperSlackSign`]).
    pub upper_slack_sign: UpperSlackSign,
    /// Relative threshold for calling a λ a support vector.
    pub sv_tolerance: f64,
    /// LP solver knobs.
    pub solver: SolveOptions,
}

impl Default for McmOptions {
    fn default() -> Self {
        McmOptions {
            upper_slack_sign: UpperSlackSign::default(),
            sv_tolerance: DEFAULT_SV_TOLERANCE,
            solver: SolveOptions::default(),
        }
    }
}

/// A trained hyperplane machine: `score(x) = w·standardize(x) + b`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearModel {
    /// Hyperplane normal in standardized coordinates.
    pub w: Vec<f64>,
    /// Offset.
    pub b: f64,
    /// Optimal complexity variable (≥ 1 for any feasible model).
    pub h: f64,
    /// Slack penalty used, or `None` for the hard-margin machine.
    pub c: Option<f64>,
    /// Transform applied to inputs before `w` is applied.
    pub standardization: StandardizationParams,
    /// Optimal LP objective value.
    pub objective_value: f64,
}

/// A trained kernel machine:
/// `score(x) = Σ_{j ∈ support} λⱼ·K(standardize(x), svⱼ) + b`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelModel {
    /// Full expansion coefficients, one per training sample (zeros kept).
    pub lambdas: Vec<f64>,
    /// Offset.
    pub b: f64,
    /// Optimal complexity variable.
    pub h: f64,
    /// 0-based indices of training samples with `|λ|` above threshold.
    pub support_indices: Vec<usize>,
    /// Standardized feature rows of the support vectors, in
    /// `support_indices` order; prediction touches only these.
    pub support_samples: Vec<Vec<f64>>,
    /// Kernel the model was trained with.
    pub kernel: KernelSpec,
    /// Slack penalty used.
    pub c: f64,
    /// Transform applied to inputs before kernel evaluation.
    pub standardization: StandardizationParams,
    /// Optimal LP objective value.
    pub objective_value: f64,
}

impl KernelModel {
    /// Support-vector count.
    pub fn num_support_vectors(&self) -> usize {
        self.support_indices.len()
    }
}

/// Decision rule used everywhere: ties at exactly zero go to +1.
pub fn sign_label(score: f64) -> f64 {
    if score >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Indices with `|λⱼ| > sv_tolerance · maxⱼ|λⱼ|` (0-based); empty when all
/// coefficients are zero.
pub fn extract_support_vectors(lambdas: &[f64], sv_tolerance: f64) -> Vec<usize> {
    let max = lambdas.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    if max == 0.0 {
        return Vec::new();
    }
    let cut = sv_tolerance * max;
    (0..lambdas.len())
        .filter(|&j| lambdas[j].abs() > cut)
        .collect()
}

/// Standardize-then-weight: the slack weights for a training run, derived
/// on the standardized features exactly as training will use them.
fn resolve_slack_weights(std_ds: &Dataset, weights: &SlackWeights) -> Result<Vec<f64>> {
    match weights {
        SlackWeights::Uniform => Ok(vec![1.0; std_ds.len()]),
        SlackWeights::Fuzzy { delta } => {
            let m = match delta {
                Some(d) => membership::compute_memberships(std_ds, *d)?,
                None => membership::compute_memberships_default(std_ds)?,
            };
            Ok(m.values)
        }
        SlackWeights::Explicit(values) => {
            if values.len() != std_ds.len() {
                return Err(Error::structural(format!(
                    "{} slack weights for {} samples",
                    values.len(),
                    std_ds.len()
                )));
            }
            Ok(values.clone())
        }
    }
}

/// Memberships as the fuzzy trainer would see them: fit standardization on
/// the dataset, standardize, then compute with the default δ policy (or the
/// supplied δ). Exposed for inspection tooling.
pub fn training_memberships(
    ds: &Dataset,
    delta: Option<f64>,
) -> Result<membership::MembershipVector> {
    let (_, std_ds) = standardize_for_training(ds)?;
    match delta {
        Some(d) => membership::compute_memberships(&std_ds, d),
        None => membership::compute_memberships_default(&std_ds),
    }
}

/// Fit-or-reuse standardization: already-standardized datasets pass through
/// under the identity transform, raw ones get a fresh fit.
fn standardize_for_training(ds: &Dataset) -> Result<(StandardizationParams, Dataset)> {
    ds.validate()?;
    if ds.standardized {
        let params = StandardizationParams::identity(ds.num_features());
        Ok((params, ds.clone()))
    } else {
        let params = StandardizationParams::fit(&ds.features);
        let std_ds = params.apply_dataset(ds)?;
        Ok((params, std_ds))
    }
}

fn solver_failure(status: LpStatus, context: &str) -> Error {
    Error::Solver {
        status,
        context: context.to_string(),
    }
}

/// Shared post-solve validation: the point must satisfy its own LP and
/// reach the unit margin (`h ≥ 1`).
fn validate_solved(
    lp: &crate::lp::LpProblem,
    point: &[f64],
    h: f64,
    tol: f64,
    context: &str,
) -> Result<()> {
    let report = check_solution(lp, point)?;
    if !report.within(MODEL_SANITY_TOL.max(tol * 100.0)) {
        return Err(Error::Solver {
            status: LpStatus::Optimal,
            context: format!(
                "{context}: solver point violates its own constraints by {:.3e}",
                report
                    .max_constraint_violation
                    .max(report.max_bound_violation)
            ),
        });
    }
    if h < 1.0 - MODEL_SANITY_TOL {
        return Err(Error::Solver {
            status: LpStatus::Optimal,
            context: format!("{context}: optimal h = {h} fell below the unit margin"),
        });
    }
    Ok(())
}

/// Train the hard-margin linear machine. Fails with an `Infeasible` solver
/// status when the data is not linearly separable.
pub fn train_linear_hard(ds: &Dataset, options: &McmOptions) -> Result<LinearModel> {
    ds.require_both_classes()?;
    let (params, std_ds) = standardize_for_training(ds)?;
    let (lp, layout) = build_linear_hard_lp(&std_ds)?;
    let sol = solve(&lp, &options.solver)?;
    if sol.status != LpStatus::Optimal {
        return Err(solver_failure(sol.status, "hard-margin training LP"));
    }
    let (w, b, h) = layout.unpack(&sol.point);
    validate_solved(
        &lp,
        &sol.point,
        h,
        options.solver.feasibility_tolerance,
        "hard-margin training LP",
    )?;
    Ok(LinearModel {
        w: w.to_vec(),
        b,
        h,
        c: None,
        standardization: params,
        objective_value: sol.objective_value,
    })
}

/// Train the soft or fuzzy linear machine (the choice is in `weights`).
pub fn train_linear(
    ds: &Dataset,
    c: f64,
    weights: &SlackWeights,
    options: &McmOptions,
) -> Result<LinearModel> {
    ds.require_both_classes()?;
    let (params, std_ds) = standardize_for_training(ds)?;
    let s = resolve_slack_weights(&std_ds, weights)?;
    let (lp, layout) = build_linear_soft_lp(&std_ds, c, &s, options.upper_slack_sign)?;
    let sol = solve(&lp, &options.solver)?;
    if sol.status != LpStatus::Optimal {
        return Err(solver_failure(sol.status, "soft-margin training LP"));
    }
    let (w, b, h) = layout.unpack(&sol.point);
    validate_solved(
        &lp,
        &sol.point,
        h,
        options.solver.feasibility_tolerance,
        "soft-margin training LP",
    )?;
    Ok(LinearModel {
        w: w.to_vec(),
        b,
        h,
        c: Some(c),
        standardization: params,
        objective_value: sol.objective_value,
    })
}

/// Train the kernelized soft/fuzzy machine and truncate the expansion to
/// its support vectors.
pub fn train_kernel(
    ds: &Dataset,
    kernel: KernelSpec,
    c: f64,
    weights: &SlackWeights,
    options: &McmOptions,
) -> Result<KernelModel> {
    kernel.validate()?;
    ds.require_both_classes()?;
    if options.sv_tolerance < 0.0 {
        return Err(Error::config(format!(
            "sv_tolerance must be nonnegative, got {}",
            options.sv_tolerance
        )));
    }
    let (params, std_ds) = standardize_for_training(ds)?;
    let s = resolve_slack_weights(&std_ds, weights)?;
    let gram = gram_matrix(&kernel, &std_ds.features, &std_ds.features)?;
    let (lp, layout) = build_kernel_lp(&gram, &std_ds.labels, c, &s, options.upper_slack_sign)?;
    let sol = solve(&lp, &options.solver)?;
    if sol.status != LpStatus::Optimal {
        return Err(solver_failure(sol.status, "kernel training LP"));
    }
    let (lambdas, b, h) = layout.unpack(&sol.point);
    validate_solved(
        &lp,
        &sol.point,
        h,
        options.solver.feasibility_tolerance,
        "kernel training LP",
    )?;
    let support_indices = extract_support_vectors(lambdas, options.sv_tolerance);
    let support_samples: Vec<Vec<f64>> = support_indices
        .iter()
        .map(|&j| std_ds.features[j].clone())
        .collect();

    // Truncation must not flip any training sample's predicted label; a
    // flip would mean the dropped coefficients were not actually negligible.
    for (i, krow) in gram.iter().enumerate() {
        let full: f64 = lambdas.iter().zip(krow).map(|(l, k)| l * k).sum::<f64>() + b;
        let truncated: f64 = support_indices
            .iter()
            .map(|&j| lambdas[j] * krow[j])
            .sum::<f64>()
            + b;
        if sign_label(full) != sign_label(truncated) {
            return Err(Error::Solver {
                status: LpStatus::Optimal,
                context: format!(
                    "support truncation flipped training sample {i} \
                     (full score {full:.6e}, truncated {truncated:.6e})"
                ),
            });
        }
    }

    Ok(KernelModel {
        lambdas: lambdas.to_vec(),
        b,
        h,
        support_indices,
        support_samples,
        kernel,
        c,
        standardization: params,
        objective_value: sol.objective_value,
    })
}

/// Score and label a raw input with a linear model.
pub fn predict_linear(model: &LinearModel, x: &[f64]) -> Result<(f64, f64)> {
    let z = model.standardization.apply(x)?;
    let score: f64 = model.w.iter().zip(&z).map(|(w, v)| w * v).sum::<f64>() + model.b;
    Ok((sign_label(score), score))
}

/// Score and label a raw input with a kernel model (support vectors only).
pub fn predict_kernel(model: &KernelModel, x: &[f64]) -> Result<(f64, f64)> {
    let z = model.standardization.apply(x)?;
    let mut score = model.b;
    for (&j, sv) in model.support_indices.iter().zip(&model.support_samples) {
        score += model.lambdas[j] * kernel_eval(&model.kernel, &z, sv)?;
    }
    Ok((sign_label(score), score))
}

/// Fraction of `ds` (raw coordinates) a linear model labels correctly.
pub fn training_accuracy_linear(model: &LinearModel, ds: &Dataset) -> Result<f64> {
    let mut hits = 0usize;
    for (row, &y) in ds.features.iter().zip(&ds.labels) {
        let (label, _) = predict_linear(model, row)?;
        if label == y {
            hits += 1;
        }
    }
    Ok(hits as f64 / ds.len().max(1) as f64)
}

/// Fraction of `ds` (raw coordinates) a kernel model labels correctly.
pub fn training_accuracy_kernel(model: &KernelModel, ds: &Dataset) -> Result<f64> {
    let mut hits = 0usize;
    for (row, &y) in ds.features.iter().zip(&ds.labels) {
        let (label, _) = predict_kernel(model, row)?;
        if label == y {
            hits += 1;
        }
    }
    Ok(hits as f64 / ds.len().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_2d() -> Dataset {
        // Two clusters around (2,2) and (-2,-2); margin ~ 2·sqrt(2).
        let features = vec![
            vec![2.0, 2.0],
            vec![2.5, 1.5],
            vec![1.5, 2.5],
            vec![3.0, 2.0],
            vec![-2.0, -2.0],
            vec![-2.5, -1.5],
            vec![-1.5, -2.5],
            vec![-3.0, -2.0],
        ];
        let labels = vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0];
        Dataset::new(features, labels).expect("valid")
    }

    #[test]
    fn hard_margin_separates_and_reaches_unit_margin() {
        let ds = separable_2d();
        let model = train_linear_hard(&ds, &McmOptions::default()).expect("separable data");
        assert!(model.h >= 1.0 - 1e-9, "h = {}", model.h);
        for (row, &y) in ds.features.iter().zip(&ds.labels) {
            let (label, score) = predict_linear(&model, row).expect("dims match");
            assert_eq!(label, y, "misclassified training point {row:?}");
            assert!(y * score >= 1.0 - 1e-7, "margin {}", y * score);
        }
    }

    #[test]
    fn hard_margin_on_xor_is_infeasible() {
        let ds = Dataset::new(
            vec![
                vec![0.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
            ],
            vec![1.0, 1.0, -1.0, -1.0],
        )
        .expect("valid");
        let err = train_linear_hard(&ds, &McmOptions::default()).unwrap_err();
        match err {
            Error::Solver { status, .. } => assert_eq!(status, LpStatus::Infeasible),
            other => panic!("expected solver failure, got {other:?}"),
        }
    }

    #[test]
    fn soft_margin_with_huge_c_matches_hard_margin_on_separable_data() {
        let ds = separable_2d();
        let hard = train_linear_hard(&ds, &McmOptions::default()).expect("separable");
        let soft = train_linear(&ds, 1e6, &SlackWeights::Uniform, &McmOptions::default())
            .expect("always feasible");
        // With no slack needed, both optimize the same h.
        assert!(
            (hard.h - soft.h).abs() < 1e-6,
            "hard h = {}, soft h = {}",
            hard.h,
            soft.h
        );
        assert!((soft.objective_value - hard.objective_value).abs() < 1e-5);
    }

    #[test]
    fn equal_memberships_only_rescale_c() {
        // With every s_i equal to the same value v, the fuzzy LP is the
        // plain soft LP at C·v: optimal objectives relate exactly.
        let ds = separable_2d();
        let c = 2.0;
        let v = 0.5;
        let plain = train_linear(
            &ds,
            c * v,
            &SlackWeights::Uniform,
            &McmOptions::default(),
        )
        .expect("feasible");
        let weighted = train_linear(
            &ds,
            c,
            &SlackWeights::Explicit(vec![v; ds.len()]),
            &McmOptions::default(),
        )
        .expect("feasible");
        assert!(
            (plain.objective_value - weighted.objective_value).abs() < 1e-7,
            "{} vs {}",
            plain.objective_value,
            weighted.objective_value
        );
    }

    #[test]
    fn fuzzy_weights_come_from_standardized_features() {
        // A wild raw scale on feature 0 must not dominate memberships:
        // training succeeds and weights stay in (0, 1].
        let ds = Dataset::new(
            vec![
                vec![10000.0, 2.0],
                vec![12000.0, 1.5],
                vec![11000.0, 2.5],
                vec![-10000.0, -2.0],
                vec![-12000.0, -1.5],
                vec![-11000.0, -2.5],
            ],
            vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0],
        )
        .expect("valid");
        let m = training_memberships(&ds, None).expect("two classes");
        for &s in &m.values {
            assert!(s > 0.0 && s <= 1.0, "membership {s}");
        }
        let model = train_linear(
            &ds,
            10.0,
            &SlackWeights::Fuzzy { delta: None },
            &McmOptions::default(),
        )
        .expect("feasible");
        assert!(model.h >= 1.0 - 1e-9);
    }

    #[test]
    fn kernel_two_samples_both_support_vectors() {
        let ds = Dataset::new(vec![vec![0.0], vec![1.0]], vec![-1.0, 1.0]).expect("valid");
        let model = train_kernel(
            &ds,
            KernelSpec::Gaussian { gamma: 0.5 },
            100.0,
            &SlackWeights::Uniform,
            &McmOptions::default(),
        )
        .expect("feasible");
        assert_eq!(
            model.support_indices,
            vec![0, 1],
            "both samples must carry weight"
        );
        for (row, &y) in ds.features.iter().zip(&ds.labels) {
            let (label, _) = predict_kernel(&model, row).expect("dims match");
            assert_eq!(label, y);
        }
    }

    #[test]
    fn gaussian_kernel_solves_concentric_circles() {
        // Inner ring +1, outer ring -1: linearly non-separable, fixed by a
        // Gaussian kernel.
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for k in 0..20 {
            let t = k as f64 * std::f64::consts::TAU / 20.0;
            features.push(vec![0.5 * t.cos(), 0.5 * t.sin()]);
            labels.push(1.0);
            features.push(vec![2.0 * t.cos(), 2.0 * t.sin()]);
            labels.push(-1.0);
        }
        let ds = Dataset::new(features, labels).expect("valid");
        let hard = train_linear_hard(&ds, &McmOptions::default());
        assert!(
            matches!(
                hard,
                Err(Error::Solver {
                    status: LpStatus::Infeasible,
                    ..
                })
            ),
            "rings must not be linearly separable"
        );
        let model = train_kernel(
            &ds,
            KernelSpec::Gaussian { gamma: 1.0 },
            100.0,
            &SlackWeights::Uniform,
            &McmOptions::default(),
        )
        .expect("feasible");
        let acc = training_accuracy_kernel(&model, &ds).expect("dims match");
        assert_eq!(acc, 1.0, "kernel machine must fit the rings exactly");
    }

    #[test]
    fn support_extraction_thresholds_relative_to_max() {
        assert_eq!(
            extract_support_vectors(&[0.0, 5.0, 0.0, -3.0], 1e-6),
            vec![1, 3]
        );
        assert_eq!(extract_support_vectors(&[0.0, 0.0], 1e-6), Vec::<usize>::new());
        // Relative cut: 1e-7·max won't survive a 1e-6 threshold.
        assert_eq!(
            extract_support_vectors(&[1.0, 1e-7, 0.0], 1e-6),
            vec![0]
        );
    }

    #[test]
    fn sign_zero_goes_positive() {
        assert_eq!(sign_label(0.0), 1.0);
        assert_eq!(sign_label(-0.0), 1.0);
        assert_eq!(sign_label(1e-300), 1.0);
        assert_eq!(sign_label(-1e-300), -1.0);
    }

    #[test]
    fn prediction_standardizes_raw_input() {
        let ds = separable_2d();
        // Shift the whole dataset: the model must shift with it.
        let shifted = Dataset::new(
            ds.features
                .iter()
                .map(|r| vec![r[0] + 500.0, r[1] - 300.0])
                .collect(),
            ds.labels.clone(),
        )
        .expect("valid");
        let model = train_linear_hard(&shifted, &McmOptions::default()).expect("separable");
        for (row, &y) in shifted.features.iter().zip(&shifted.labels) {
            let (label, _) = predict_linear(&model, row).expect("dims match");
            assert_eq!(label, y);
        }
    }

    #[test]
    fn dimension_mismatch_at_prediction_is_an_error() {
        let ds = separable_2d();
        let model = train_linear_hard(&ds, &McmOptions::default()).expect("separable");
        assert!(predict_linear(&model, &[1.0]).is_err());
    }

    #[test]
    fn single_class_training_rejected() {
        let ds = Dataset::new(vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]).expect("valid");
        let err = train_linear(&ds, 1.0, &SlackWeights::Uniform, &McmOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)), "got {err:?}");
    }
}
