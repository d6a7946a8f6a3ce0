//! Stratified cross-validation, grid search, and reports.
//!
//! The protocol is the classic benchmark loop: split stratified folds once
//! per (k, seed), then for each fold standardize on the training split
//! only, derive memberships on the training split only, train, and score
//! the held-out fold. Grid search reuses the same folds for every grid
//! point and selects the best mean test accuracy (non-nested selection —
//! the reported accuracy of the chosen point is a model-selection estimate,
//! not a fully unbiased one; reports say so).
//!
//! Everything here is deterministic: the RNG is a seeded stream cipher,
//! fold assembly and grid iteration have fixed orders, and reports are
//! plain ordered structs, so identical inputs give byte-identical output.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::Error;
use crate::kernels::KernelSpec;
use crate::mcm::{
    predict_kernel, predict_linear, train_kernel, train_linear, train_linear_hard, McmOptions,
    SlackWeights,
};
use crate::Result;

/// Default C grid (decades around 1).
pub fn default_c_grid() -> Vec<f64> {
    vec![1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0]
}

/// Default Gaussian-width grid (decades bracketing typical standardized
/// squared distances).
pub fn default_gamma_grid() -> Vec<f64> {
    vec![1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0]
}

/// Which machine a CV run trains, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MachineKind {
    /// Hard-margin hyperplane (fails on non-separable folds; failures are
    /// recorded per fold like any other).
    LinearHard,
    /// Soft/fuzzy hyperplane.
    Linear {
        /// Slack penalty.
        c: f64,
        /// Use distance-based memberships instead of uniform weights.
        fuzzy: bool,
    },
    /// Soft/fuzzy kernel machine.
    Kernel {
        /// Kernel and its parameters.
        spec: KernelSpec,
        /// Slack penalty.
        c: f64,
        /// Use distance-based memberships instead of uniform weights.
        fuzzy: bool,
    },
}

impl MachineKind {
    /// Stable label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            MachineKind::LinearHard => "linear-hard",
            MachineKind::Linear { .. } => "linear",
            MachineKind::Kernel { .. } => "kernel",
        }
    }

    /// The C in play, if any.
    pub fn c(&self) -> Option<f64> {
        match self {
            MachineKind::LinearHard => None,
            MachineKind::Linear { c, .. } | MachineKind::Kernel { c, .. } => Some(*c),
        }
    }

    /// The Gaussian gamma in play, if any.
    pub fn gamma(&self) -> Option<f64> {
        match self {
            MachineKind::Kernel {
                spec: KernelSpec::Gaussian { gamma },
                ..
            } => Some(*gamma),
            _ => None,
        }
    }
}

/// One cross-validation run's configuration.
#[derive(Debug, Clone)]
pub struct CvConfig {
    /// Machine and hyperparameters.
    pub machine: MachineKind,
    /// Fold count `k ≥ 2`.
    pub folds: usize,
    /// Fold-shuffle seed.
    pub seed: u64,
    /// Membership δ override for fuzzy machines (`None` = scale-relative
    /// default).
    pub delta: Option<f64>,
    /// Training options.
    pub options: McmOptions,
}

/// Per-fold outcome; a failed fold keeps its error text instead of metrics.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FoldResult {
    /// Fold index (0-based).
    pub fold: usize,
    /// Training-split size.
    pub train_size: usize,
    /// Held-out-split size.
    pub test_size: usize,
    /// Held-out accuracy in percent.
    pub test_accuracy: Option<f64>,
    /// Training-split accuracy in percent.
    pub train_accuracy: Option<f64>,
    /// Support-vector count (kernel machines only).
    pub support_vectors: Option<usize>,
    /// Why the fold failed, when it did.
    pub error: Option<String>,
}

/// Mean ± sample standard deviation over completed folds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Aggregate {
    /// Arithmetic mean.
    pub mean: f64,
    /// Sample standard deviation (divisor k−1); `None` below two values.
    pub std: Option<f64>,
}

fn aggregate(values: impl Iterator<Item = f64>) -> Option<Aggregate> {
    let values: Vec<f64> = values.collect();
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() >= 2 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Some((ss / (n - 1.0)).sqrt())
    } else {
        None
    };
    Some(Aggregate { mean, std })
}

/// Full cross-validation report for one machine configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CvReport {
    /// Dataset label (usually the file stem).
    pub dataset: String,
    /// Machine label: `linear-hard`, `linear`, or `kernel`.
    pub kind: String,
    /// Whether memberships weighted the slacks.
    pub fuzzy: bool,
    /// Slack penalty, when the machine has one.
    pub c: Option<f64>,
    /// Gaussian width, when the machine has one.
    pub gamma: Option<f64>,
    /// Fold count requested.
    pub folds: usize,
    /// Fold-shuffle seed.
    pub seed: u64,
    /// Per-fold outcomes, in fold order.
    pub fold_results: Vec<FoldResult>,
    /// Folds that trained successfully.
    pub completed_folds: usize,
    /// Held-out accuracy aggregate (percent), over completed folds.
    pub test_accuracy: Option<Aggregate>,
    /// Training accuracy aggregate (percent), over completed folds.
    pub train_accuracy: Option<Aggregate>,
    /// Support-vector aggregate, kernel machines only.
    pub support_vectors: Option<Aggregate>,
    /// Model-selection protocol note (always "non-nested").
    pub selection: String,
    /// Standard-deviation convention note.
    pub std_convention: String,
}

impl CvReport {
    /// Render the human-readable table.
    pub fn render_human(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dataset {}  machine {}{}  folds {}  seed {}",
            self.dataset,
            self.kind,
            if self.fuzzy { " (fuzzy)" } else { "" },
            self.folds,
            self.seed
        );
        if let Some(c) = self.c {
            let _ = writeln!(out, "C = {c}");
        }
        if let Some(g) = self.gamma {
            let _ = writeln!(out, "gamma = {g}");
        }
        let _ = writeln!(out, "{:<6} {:>8} {:>10} {:>10} {:>8}", "fold", "train", "train-acc", "test-acc", "SVs");
        for f in &self.fold_results {
            match &f.error {
                Some(e) => {
                    let _ = writeln!(out, "{:<6} {:>8} failed: {e}", f.fold, f.train_size);
                }
                None => {
                    let _ = writeln!(
                        out,
                        "{:<6} {:>8} {:>10} {:>10} {:>8}",
                        f.fold,
                        f.train_size,
                        f.train_accuracy.map_or("-".to_string(), |a| format!("{a:.2}")),
                        f.test_accuracy.map_or("-".to_string(), |a| format!("{a:.2}")),
                        f.support_vectors.map_or("n/a".to_string(), |s| s.to_string()),
                    );
                }
            }
        }
        if let Some(acc) = &self.test_accuracy {
            let _ = writeln!(
                out,
                "test accuracy: {:.2} ± {} %  ({} of {} folds)",
                acc.mean,
                acc.std.map_or("-".to_string(), |s| format!("{s:.2}")),
                self.completed_folds,
                self.folds
            );
        } else {
            let _ = writeln!(out, "test accuracy: no fold completed");
        }
        if let Some(sv) = &self.support_vectors {
            let _ = writeln!(
                out,
                "support vectors: {:.2} ± {}",
                sv.mean,
                sv.std.map_or("-".to_string(), |s| format!("{s:.2}"))
            );
        }
        let _ = writeln!(out, "selection: {}; std: {}", self.selection, self.std_convention);
        out
    }

    /// Machine-readable rows: `dataset,kind,C,gamma,fold,acc,sv_count,seed`
    /// (one line per completed fold; failed folds carry `error` in the acc
    /// column position as `NA`).
    pub fn machine_rows(&self) -> Vec<String> {
        self.fold_results
            .iter()
            .map(|f| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    self.dataset,
                    self.kind,
                    self.c.map_or("NA".to_string(), |v| v.to_string()),
                    self.gamma.map_or("NA".to_string(), |v| v.to_string()),
                    f.fold,
                    f.test_accuracy.map_or("NA".to_string(), |v| format!("{v:.6}")),
                    f.support_vectors.map_or("NA".to_string(), |v| v.to_string()),
                    self.seed
                )
            })
            .collect()
    }
}

/// Deterministic stratified folds: per-class shuffle with a seeded ChaCha
/// stream, then deal round-robin (remainders land in the earliest folds).
/// Folds are sorted index lists; every class must have ≥ k members.
pub fn stratified_kfold(labels: &[f64], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::config(format!("fold count must be ≥ 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    // Fixed class order (+1 first) keeps the assignment reproducible.
    for class in [1.0, -1.0] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < k {
            return Err(Error::config(format!(
                "class {class:+} has {} samples, fewer than {k} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            folds[pos % k].push(i);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

fn train_and_score(
    ds: &Dataset,
    train_idx: &[usize],
    test_idx: &[usize],
    config: &CvConfig,
) -> Result<(f64, f64, Option<usize>)> {
    let train = ds.subset(train_idx);
    let weights = |fuzzy: bool| {
        if fuzzy {
            SlackWeights::Fuzzy {
                delta: config.delta,
            }
        } else {
            SlackWeights::Uniform
        }
    };
    let mut hits_test = 0usize;
    let mut hits_train = 0usize;
    let sv_count;
    match &config.machine {
        MachineKind::LinearHard => {
            let model = train_linear_hard(&train, &config.options)?;
            for &i in test_idx {
                let (label, _) = predict_linear(&model, &ds.features[i])?;
                hits_test += usize::from(label == ds.labels[i]);
            }
            for &i in train_idx {
                let (label, _) = predict_linear(&model, &ds.features[i])?;
                hits_train += usize::from(label == ds.labels[i]);
            }
            sv_count = None;
        }
        MachineKind::Linear { c, fuzzy } => {
            let model = train_linear(&train, *c, &weights(*fuzzy), &config.options)?;
            for &i in test_idx {
                let (label, _) = predict_linear(&model, &ds.features[i])?;
                hits_test += usize::from(label == ds.labels[i]);
            }
            for &i in train_idx {
                let (label, _) = predict_linear(&model, &ds.features[i])?;
                hits_train += usize::from(label == ds.labels[i]);
            }
            sv_count = None;
        }
        MachineKind::Kernel { spec, c, fuzzy } => {
            let model = train_kernel(&train, *spec, *c, &weights(*fuzzy), &config.options)?;
            for &i in test_idx {
                let (label, _) = predict_kernel(&model, &ds.features[i])?;
                hits_test += usize::from(label == ds.labels[i]);
            }
            for &i in train_idx {
                let (label, _) = predict_kernel(&model, &ds.features[i])?;
                hits_train += usize::from(label == ds.labels[i]);
            }
            sv_count = Some(model.num_support_vectors());
        }
    }
    Ok((
        100.0 * hits_test as f64 / test_idx.len().max(1) as f64,
        100.0 * hits_train as f64 / train_idx.len().max(1) as f64,
        sv_count,
    ))
}

/// Run stratified k-fold cross-validation. Per-fold training failures are
/// captured in the report rather than aborting the run; configuration
/// errors (bad k, class smaller than k) fail fast.
pub fn cross_validate(ds: &Dataset, dataset_name: &str, config: &CvConfig) -> Result<CvReport> {
    ds.validate()?;
    let folds = stratified_kfold(&ds.labels, config.folds, config.seed)?;
    cross_validate_on_folds(ds, dataset_name, config, &folds)
}

/// As [`cross_validate`], but over a precomputed fold split (grid search
/// shares one split across all points).
pub fn cross_validate_on_folds(
    ds: &Dataset,
    dataset_name: &str,
    config: &CvConfig,
    folds: &[Vec<usize>],
) -> Result<CvReport> {
    let all: Vec<usize> = (0..ds.len()).collect();
    let mut fold_results = Vec::with_capacity(folds.len());
    for (f, test_idx) in folds.iter().enumerate() {
        let in_test: Vec<bool> = {
            let mut mask = vec![false; ds.len()];
            for &i in test_idx {
                mask[i] = true;
            }
            mask
        };
        let train_idx: Vec<usize> = all.iter().copied().filter(|&i| !in_test[i]).collect();
        let result = match train_and_score(ds, &train_idx, test_idx, config) {
            Ok((test_acc, train_acc, sv)) => FoldResult {
                fold: f,
                train_size: train_idx.len(),
                test_size: test_idx.len(),
                test_accuracy: Some(test_acc),
                train_accuracy: Some(train_acc),
                support_vectors: sv,
                error: None,
            },
            Err(e) => FoldResult {
                fold: f,
                train_size: train_idx.len(),
                test_size: test_idx.len(),
                test_accuracy: None,
                train_accuracy: None,
                support_vectors: None,
                error: Some(e.to_string()),
            },
        };
        fold_results.push(result);
    }
    let completed_folds = fold_results.iter().filter(|f| f.error.is_none()).count();
    let test_accuracy = aggregate(fold_results.iter().filter_map(|f| f.test_accuracy));
    let train_accuracy = aggregate(fold_results.iter().filter_map(|f| f.train_accuracy));
    let support_vectors = aggregate(
        fold_results
            .iter()
            .filter_map(|f| f.support_vectors.map(|v| v as f64)),
    );
    Ok(CvReport {
        dataset: dataset_name.to_string(),
        kind: config.machine.label().to_string(),
        fuzzy: matches!(
            config.machine,
            MachineKind::Linear { fuzzy: true, .. } | MachineKind::Kernel { fuzzy: true, .. }
        ),
        c: config.machine.c(),
        gamma: config.machine.gamma(),
        folds: config.folds,
        seed: config.seed,
        fold_results,
        completed_folds,
        test_accuracy,
        train_accuracy,
        support_vectors,
        selection: "non-nested".to_string(),
        std_convention: "sample (k-1)".to_string(),
    })
}

/// Grid-search configuration.
#[derive(Debug, Clone)]
pub struct GridConfig {
    /// Search the Gaussian kernel machine (otherwise the linear machine,
    /// and `gamma_grid` is ignored).
    pub kernel: bool,
    /// Weight slacks by memberships.
    pub fuzzy: bool,
    /// Candidate C values, ascending.
    pub c_grid: Vec<f64>,
    /// Candidate gamma values, ascending (kernel only).
    pub gamma_grid: Vec<f64>,
    /// Fold count.
    pub folds: usize,
    /// Fold-shuffle seed (one split shared by every grid point).
    pub seed: u64,
    /// Membership δ override.
    pub delta: Option<f64>,
    /// Training options.
    pub options: McmOptions,
}

impl GridConfig {
    /// Spec-defaulted grids, 5 folds.
    pub fn with_defaults(kernel: bool, fuzzy: bool, seed: u64) -> Self {
        GridConfig {
            kernel,
            fuzzy,
            c_grid: default_c_grid(),
            gamma_grid: default_gamma_grid(),
            folds: 5,
            seed,
            delta: None,
            options: McmOptions::default(),
        }
    }
}

/// Grid-search output: every point's CV report plus the selected index.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSearchReport {
    /// One report per grid point, in (C asc, gamma asc) order.
    pub reports: Vec<CvReport>,
    /// Index of the winning point in `reports`, `None` when nothing
    /// trained on any fold.
    pub best_index: Option<usize>,
}

impl GridSearchReport {
    /// The winning report, when any point completed a fold.
    pub fn best(&self) -> Option<&CvReport> {
        self.best_index.map(|i| &self.reports[i])
    }

    /// Human-readable grid table plus the winner's fold detail.
    pub fn render_human(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:<10} {:>10} {:>8} {:>10}",
            "C", "gamma", "test-acc", "±", "mean-SVs"
        );
        for (i, r) in self.reports.iter().enumerate() {
            let marker = if Some(i) == self.best_index { " *" } else { "" };
            let _ = writeln!(
                out,
                "{:<10} {:<10} {:>10} {:>8} {:>10}{marker}",
                r.c.map_or("NA".to_string(), |v| v.to_string()),
                r.gamma.map_or("-".to_string(), |v| v.to_string()),
                r.test_accuracy
                    .as_ref()
                    .map_or("failed".to_string(), |a| format!("{:.2}", a.mean)),
                r.test_accuracy
                    .as_ref()
                    .and_then(|a| a.std)
                    .map_or("-".to_string(), |s| format!("{s:.2}")),
                r.support_vectors
                    .as_ref()
                    .map_or("n/a".to_string(), |a| format!("{:.1}", a.mean)),
            );
        }
        if let Some(best) = self.best() {
            let _ = writeln!(out, "\nselected point:");
            out.push_str(&best.render_human());
        } else {
            let _ = writeln!(out, "\nno grid point completed any fold");
        }
        out
    }
}

/// Exhaustive sweep over the hyperparameter grid(s) with one shared fold
/// split. Selection: highest mean test accuracy; a point with failed folds
/// ranks below any fully-completed point; ties break to smaller C, then
/// smaller gamma (the iteration order).
pub fn grid_search(ds: &Dataset, dataset_name: &str, config: &GridConfig) -> Result<GridSearchReport> {
    if config.c_grid.is_empty() || (config.kernel && config.gamma_grid.is_empty()) {
        return Err(Error::config("hyperparameter grids must be non-empty"));
    }
    ds.validate()?;
    let folds = stratified_kfold(&ds.labels, config.folds, config.seed)?;
    let machines: Vec<MachineKind> = if config.kernel {
        config
            .c_grid
            .iter()
            .flat_map(|&c| {
                config.gamma_grid.iter().map(move |&gamma| MachineKind::Kernel {
                    spec: KernelSpec::Gaussian { gamma },
                    c,
                    fuzzy: config.fuzzy,
                })
            })
            .collect()
    } else {
        config
            .c_grid
            .iter()
            .map(|&c| MachineKind::Linear {
                c,
                fuzzy: config.fuzzy,
            })
            .collect()
    };
    // Points are independent; run them in parallel and collect in grid
    // order so reports (and therefore selection) stay deterministic.
    let reports: Vec<CvReport> = machines
        .into_par_iter()
        .map(|machine| {
            let point_config = CvConfig {
                machine,
                folds: config.folds,
                seed: config.seed,
                delta: config.delta,
                options: config.options.clone(),
            };
            cross_validate_on_folds(ds, dataset_name, &point_config, &folds)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best_index: Option<usize> = None;
    let mut best_key = (false, 0usize, f64::NEG_INFINITY);
    for (i, r) in reports.iter().enumerate() {
        let Some(acc) = &r.test_accuracy else { continue };
        let key = (r.completed_folds == r.folds, r.completed_folds, acc.mean);
        // Strict comparison keeps the earliest (smallest C, then gamma) of
        // any exact tie.
        if best_index.is_none()
            || key.0 && !best_key.0
            || (key.0 == best_key.0 && key.1 > best_key.1)
            || (key.0 == best_key.0 && key.1 == best_key.1 && key.2 > best_key.2)
        {
            best_index = Some(i);
            best_key = key;
        }
    }
    Ok(GridSearchReport {
        reports,
        best_index,
    })
}
