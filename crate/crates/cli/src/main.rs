//! Benchmark CLI for the fat-margin classifier family.
//!
//! Subcommands: `train`, `predict`, `cv`, `grid`, `memberships`, `export`.
//! Exit codes: 0 on success, 2 for configuration/input problems, 3 when
//! the LP solver fails on a well-formed problem. Whenever `--out` is given,
//! a `<out>.manifest.json` is written next to it describing the invocation,
//! so results stay reproducible.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fatmargin::eval::{
    cross_validate, default_c_grid, default_gamma_grid, grid_search, CvConfig, GridConfig,
    MachineKind,
};
use fatmargin::io::{
    deserialize_model, export_closed_form, load_csv, load_csv_features, serialize_model,
    CsvOptions, Provenance, StoredModel,
};
use fatmargin::mcm::{
    predict_kernel, predict_linear, train_kernel, train_linear, train_linear_hard,
    training_accuracy_kernel, training_accuracy_linear, training_memberships, SlackWeights,
    DEFAULT_SV_TOLERANCE,
};
use fatmargin::{Error, KernelSpec, McmOptions};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "fatmargin",
    version,
    about = "Margin-width-minimizing classifiers trained by linear programming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a labeled CSV and write it as JSON.
    Train(TrainArgs),
    /// Score a features-only CSV with a trained model.
    Predict(PredictArgs),
    /// Stratified k-fold cross-validation for one configuration.
    Cv(CvArgs),
    /// Cross-validated hyperparameter grid search.
    Grid(GridArgs),
    /// Emit the per-sample fuzzy membership values for a dataset.
    Memberships(MembershipsArgs),
    /// Expand a Gaussian-kernel model into a plain closed-form expression.
    Export(ExportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Labeled input CSV (label in one column, features elsewhere).
    #[arg(long)]
    data: PathBuf,
    /// 0-based label column; defaults to the last column.
    #[arg(long)]
    label_column: Option<usize>,
    /// Raw label value mapped to +1; defaults to the smaller of the two
    /// distinct values.
    #[arg(long)]
    positive_label: Option<String>,
}

impl DataArgs {
    fn csv_options(&self) -> CsvOptions {
        CsvOptions {
            label_column: self.label_column,
            positive_label: self.positive_label.clone(),
            ..CsvOptions::default()
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum KindArg {
    /// Hard-margin hyperplane (no slack penalty).
    LinearHard,
    /// Soft (or fuzzy) hyperplane.
    Linear,
    /// Soft (or fuzzy) Gaussian-kernel machine.
    Kernel,
}

#[derive(Args)]
struct ModelKnobs {
    /// Machine family to train.
    #[arg(long, value_enum, default_value_t = KindArg::Linear)]
    kind: KindArg,
    /// Weight slack penalties by per-sample memberships.
    #[arg(long)]
    fuzzy: bool,
    /// Slack penalty (linear/kernel machines; default 1).
    #[arg(long = "C")]
    c: Option<f64>,
    /// Gaussian kernel width (required for --kind kernel).
    #[arg(long)]
    gamma: Option<f64>,
    /// Membership offset δ; defaults to a scale-relative value.
    #[arg(long)]
    delta: Option<f64>,
    /// Relative support-vector threshold on |λ|.
    #[arg(long, default_value_t = DEFAULT_SV_TOLERANCE)]
    sv_tol: f64,
}

impl ModelKnobs {
    fn validate(&self) -> Result<(), Error> {
        match self.kind {
            KindArg::LinearHard => {
                if self.fuzzy || self.c.is_some() {
                    return Err(Error::config(
                        "--fuzzy and --C do not apply to --kind linear-hard",
                    ));
                }
                if self.gamma.is_some() {
                    return Err(Error::config("--gamma applies only to --kind kernel"));
                }
            }
            KindArg::Linear => {
                if self.gamma.is_some() {
                    return Err(Error::config("--gamma applies only to --kind kernel"));
                }
            }
            KindArg::Kernel => {
                if self.gamma.is_none() {
                    return Err(Error::config("--kind kernel requires --gamma"));
                }
            }
        }
        if !self.fuzzy && self.delta.is_some() {
            return Err(Error::config("--delta applies only together with --fuzzy"));
        }
        Ok(())
    }

    fn c_value(&self) -> f64 {
        self.c.unwrap_or(1.0)
    }

    fn options(&self) -> McmOptions {
        McmOptions {
            sv_tolerance: self.sv_tol,
            ..McmOptions::default()
        }
    }

    fn weights(&self) -> SlackWeights {
        if self.fuzzy {
            SlackWeights::Fuzzy { delta: self.delta }
        } else {
            SlackWeights::Uniform
        }
    }

    fn machine(&self) -> MachineKind {
        match self.kind {
            KindArg::LinearHard => MachineKind::LinearHard,
            KindArg::Linear => MachineKind::Linear {
                c: self.c_value(),
                fuzzy: self.fuzzy,
            },
            KindArg::Kernel => MachineKind::Kernel {
                spec: KernelSpec::Gaussian {
                    gamma: self.gamma.expect("validated"),
                },
                c: self.c_value(),
                fuzzy: self.fuzzy,
            },
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    knobs: ModelKnobs,
    /// Output path for the model JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Features-only CSV to score (may be empty).
    #[arg(long)]
    data: PathBuf,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    knobs: ModelKnobs,
    /// Number of folds.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Fold-shuffle seed.
    #[arg(long, default_value_t = 13)]
    seed: u64,
    /// Output path for the JSON report (a `.rows.csv` sibling is written
    /// too); the human-readable table always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Machine family to sweep (linear sweeps C; kernel sweeps C × gamma).
    #[arg(long, value_enum, default_value_t = KindArg::Linear)]
    kind: KindArg,
    /// Weight slack penalties by per-sample memberships.
    #[arg(long)]
    fuzzy: bool,
    /// Comma-separated C candidates (default: decades 0.01 … 1000).
    #[arg(long, value_delimiter = ',')]
    c_grid: Option<Vec<f64>>,
    /// Comma-separated gamma candidates (default: decades 1e-5 … 1).
    #[arg(long, value_delimiter = ',')]
    gamma_grid: Option<Vec<f64>>,
    /// Membership offset δ; defaults to a scale-relative value.
    #[arg(long)]
    delta: Option<f64>,
    /// Number of folds.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Fold-shuffle seed.
    #[arg(long, default_value_t = 13)]
    seed: u64,
    /// Output path for the JSON report; the table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MembershipsArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Membership offset δ; defaults to a scale-relative value.
    #[arg(long)]
    delta: Option<f64>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Trained model JSON (must be a Gaussian-kernel model).
    #[arg(long)]
    model: PathBuf,
    /// Output text path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// What a run writes next to its outputs for reproducibility.
#[derive(serde::Serialize)]
struct RunManifest {
    tool: &'static str,
    tool_version: &'static str,
    invocation: Vec<String>,
    input: String,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    config: serde_json::Value,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("FATMARGIN_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                // A second build_global is an error only if a pool already
                // exists; first call wins, which is the behavior we want.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: FATMARGIN_THREADS must be a positive integer, got {threads:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Solver { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Cv(args) => cmd_cv(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Memberships(args) => cmd_memberships(args),
        Command::Export(args) => cmd_export(args),
    }
}

/// Write via a sibling temp file + rename so readers never see a torn file.
fn write_atomic(path: &Path, content: &str) -> Result<(), Error> {
    let tmp = path.with_file_name(format!(
        "{}.tmp{}",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".to_string()),
        std::process::id()
    ));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::from(e)
    })
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => write_atomic(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    out.with_file_name(format!("{name}.manifest.json"))
}

fn write_manifest(
    out: &Path,
    input: &Path,
    extra_outputs: &[&Path],
    seed: Option<u64>,
    config: serde_json::Value,
) -> Result<(), Error> {
    let mut outputs = vec![out.display().to_string()];
    outputs.extend(extra_outputs.iter().map(|p| p.display().to_string()));
    let manifest = RunManifest {
        tool: "fatmargin",
        tool_version: TOOL_VERSION,
        invocation: std::env::args().collect(),
        input: input.display().to_string(),
        outputs,
        seed,
        config,
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Format(format!("manifest serialization failed: {e}")))?;
    write_atomic(&manifest_path(out), &(text + "\n"))
}

fn cmd_train(args: TrainArgs) -> Result<(), Error> {
    args.knobs.validate()?;
    let loaded = load_csv(&args.data.data, &args.data.csv_options())?;
    let ds = &loaded.dataset;
    let options = args.knobs.options();
    let (stored, summary) = match args.knobs.kind {
        KindArg::LinearHard => {
            let model = train_linear_hard(ds, &options)?;
            let acc = training_accuracy_linear(&model, ds)?;
            let s = format!(
                "trained hard-margin linear model on {} samples: h = {:.6}, training accuracy {:.2}%",
                ds.len(),
                model.h,
                100.0 * acc
            );
            (StoredModel::Linear(model), s)
        }
        KindArg::Linear => {
            let model = train_linear(ds, args.knobs.c_value(), &args.knobs.weights(), &options)?;
            let acc = training_accuracy_linear(&model, ds)?;
            let s = format!(
                "trained {} linear model on {} samples: h = {:.6}, training accuracy {:.2}%",
                if args.knobs.fuzzy { "fuzzy" } else { "soft-margin" },
                ds.len(),
                model.h,
                100.0 * acc
            );
            (StoredModel::Linear(model), s)
        }
        KindArg::Kernel => {
            let spec = KernelSpec::Gaussian {
                gamma: args.knobs.gamma.expect("validated"),
            };
            let model = train_kernel(ds, spec, args.knobs.c_value(), &args.knobs.weights(), &options)?;
            let acc = training_accuracy_kernel(&model, ds)?;
            let s = format!(
                "trained {} kernel model on {} samples: h = {:.6}, {} support vectors, training accuracy {:.2}%",
                if args.knobs.fuzzy { "fuzzy" } else { "soft-margin" },
                ds.len(),
                model.h,
                model.num_support_vectors(),
                100.0 * acc
            );
            (StoredModel::Kernel(model), s)
        }
    };
    let provenance = Provenance {
        dataset: Some(args.data.data.display().to_string()),
        c: match args.knobs.kind {
            KindArg::LinearHard => None,
            _ => Some(args.knobs.c_value()),
        },
        gamma: args.knobs.gamma,
        seed: None,
        tool_version: Some(TOOL_VERSION.to_string()),
    };
    let json = serialize_model(&stored, &provenance)?;
    write_atomic(&args.out, &json)?;
    write_manifest(
        &args.out,
        &args.data.data,
        &[],
        None,
        serde_json::json!({
            "command": "train",
            "kind": kind_name(args.knobs.kind),
            "fuzzy": args.knobs.fuzzy,
            "C": args.knobs.c,
            "gamma": args.knobs.gamma,
            "delta": args.knobs.delta,
            "sv_tol": args.knobs.sv_tol,
            "label_column": args.data.label_column,
            "positive_label": loaded.positive_label,
            "negative_label": loaded.negative_label,
        }),
    )?;
    println!("{summary}");
    println!("model written to {}", args.out.display());
    Ok(())
}

fn kind_name(kind: KindArg) -> &'static str {
    match kind {
        KindArg::LinearHard => "linear-hard",
        KindArg::Linear => "linear",
        KindArg::Kernel => "kernel",
    }
}

fn cmd_predict(args: PredictArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.model)?;
    let file = deserialize_model(&text)?;
    let rows = load_csv_features(&args.data, b',', None)?;
    let mut out = String::from("index,score,label\n");
    for (i, row) in rows.iter().enumerate() {
        let (label, score) = match &file.model {
            StoredModel::Linear(m) => predict_linear(m, row)
                .map_err(|e| amend_row_error(e, i))?,
            StoredModel::Kernel(m) => predict_kernel(m, row)
                .map_err(|e| amend_row_error(e, i))?,
        };
        use std::fmt::Write as _;
        let _ = writeln!(out, "{i},{score},{label}");
    }
    write_or_print(args.out.as_deref(), &out)?;
    if let Some(out_path) = &args.out {
        write_manifest(
            out_path,
            &args.data,
            &[],
            None,
            serde_json::json!({
                "command": "predict",
                "model": args.model.display().to_string(),
                "rows": rows.len(),
            }),
        )?;
        eprintln!("wrote {} predictions to {}", rows.len(), out_path.display());
    }
    Ok(())
}

fn amend_row_error(e: Error, index: usize) -> Error {
    match e {
        Error::Data { message, .. } => Error::data_row(index + 1, message),
        other => other,
    }
}

fn cmd_cv(args: CvArgs) -> Result<(), Error> {
    args.knobs.validate()?;
    let loaded = load_csv(&args.data.data, &args.data.csv_options())?;
    let config = CvConfig {
        machine: args.knobs.machine(),
        folds: args.folds,
        seed: args.seed,
        delta: args.knobs.delta,
        options: args.knobs.options(),
    };
    let name = dataset_name(&args.data.data);
    let report = cross_validate(&loaded.dataset, &name, &config)?;
    print!("{}", report.render_human());
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Format(format!("report serialization failed: {e}")))?;
        write_atomic(out, &(json + "\n"))?;
        let rows_path = sibling_with_suffix(out, ".rows.csv");
        let mut rows_text = String::from("dataset,kind,C,gamma,fold,acc,sv_count,seed\n");
        for line in report.machine_rows() {
            rows_text.push_str(&line);
            rows_text.push('\n');
        }
        write_atomic(&rows_path, &rows_text)?;
        write_manifest(
            out,
            &args.data.data,
            &[&rows_path],
            Some(args.seed),
            serde_json::json!({
                "command": "cv",
                "kind": kind_name(args.knobs.kind),
                "fuzzy": args.knobs.fuzzy,
                "C": args.knobs.c,
                "gamma": args.knobs.gamma,
                "delta": args.knobs.delta,
                "folds": args.folds,
                "sv_tol": args.knobs.sv_tol,
            }),
        )?;
    }
    Ok(())
}

/// `report.json` → `report.rows.csv` (suffix replaces the final extension).
fn sibling_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    path.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_grid(args: GridArgs) -> Result<(), Error> {
    if args.kind == KindArg::LinearHard {
        return Err(Error::config(
            "grid search needs a slack penalty; --kind linear-hard has none",
        ));
    }
    if !args.fuzzy && args.delta.is_some() {
        return Err(Error::config("--delta applies only together with --fuzzy"));
    }
    if args.kind == KindArg::Linear && args.gamma_grid.is_some() {
        return Err(Error::config("--gamma-grid applies only to --kind kernel"));
    }
    let loaded = load_csv(&args.data.data, &args.data.csv_options())?;
    let config = GridConfig {
        kernel: args.kind == KindArg::Kernel,
        fuzzy: args.fuzzy,
        c_grid: args.c_grid.clone().unwrap_or_else(default_c_grid),
        gamma_grid: args.gamma_grid.clone().unwrap_or_else(default_gamma_grid),
        folds: args.folds,
        seed: args.seed,
        delta: args.delta,
        options: McmOptions::default(),
    };
    let name = dataset_name(&args.data.data);
    let result = grid_search(&loaded.dataset, &name, &config)?;
    print!("{}", result.render_human());
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&result)
            .map_err(|e| Error::Format(format!("report serialization failed: {e}")))?;
        write_atomic(out, &(json + "\n"))?;
        write_manifest(
            out,
            &args.data.data,
            &[],
            Some(args.seed),
            serde_json::json!({
                "command": "grid",
                "kind": kind_name(args.kind),
                "fuzzy": args.fuzzy,
                "c_grid": config.c_grid,
                "gamma_grid": if config.kernel { Some(&config.gamma_grid) } else { None },
                "delta": args.delta,
                "folds": args.folds,
            }),
        )?;
    }
    Ok(())
}

fn cmd_memberships(args: MembershipsArgs) -> Result<(), Error> {
    let loaded = load_csv(&args.data.data, &args.data.csv_options())?;
    let ds = &loaded.dataset;
    let memberships = training_memberships(ds, args.delta)?;
    let mut out = String::from("sample_index,label,distance,membership\n");
    for i in 0..ds.len() {
        use std::fmt::Write as _;
        let _ = writeln!(
            out,
            "{i},{},{},{}",
            ds.labels[i] as i64, memberships.distances[i], memberships.values[i]
        );
    }
    write_or_print(args.out.as_deref(), &out)?;
    eprintln!(
        "delta = {} (radii: positive {}, negative {})",
        memberships.delta, memberships.radius_pos, memberships.radius_neg
    );
    if let Some(out_path) = &args.out {
        write_manifest(
            out_path,
            &args.data.data,
            &[],
            None,
            serde_json::json!({
                "command": "memberships",
                "delta": args.delta,
                "resolved_delta": memberships.delta,
            }),
        )?;
    }
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.model)?;
    let file = deserialize_model(&text)?;
    let expression = match &file.model {
        StoredModel::Kernel(m) => export_closed_form(m)?,
        StoredModel::Linear(_) => {
            return Err(Error::config(
                "closed-form export is unsupported for linear models; it covers Gaussian kernel models",
            ));
        }
    };
    write_or_print(args.out.as_deref(), &expression)?;
    if let Some(out_path) = &args.out {
        write_manifest(
            out_path,
            &args.model,
            &[],
            None,
            serde_json::json!({ "command": "export" }),
        )?;
    }
    Ok(())
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
