//! Command-line front end: reproducible batch runs over CSV datasets.
//!
//! Seven subcommands cover the pipeline: `scale` (normalize features),
//! `train` (fit and save a model), `predict` (label new rows), `cv`
//! (cross-validated accuracy), `grid` (hyperparameter search), `bench`
//! (multi-view model vs. single-view baseline), and `stats` (rank-based
//! comparison statistics over an accuracy table).
//!
//! Every run writes a `manifest.json` into its output directory recording
//! the resolved configuration, seed, and tool version — never timestamps —
//! so re-running from the same inputs reproduces every output byte for
//! byte. Existing outputs are only overwritten under `--force`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::data::{
    load_multiview_csv, minmax_scale, parse_matrix_csv, write_labels_csv, write_matrix_csv,
    MultiViewDataset, View,
};
use crate::error::{Error, Result};
use crate::eval::{
    average_ranks, cross_validate, cross_validate_wltsvm, friedman_statistic, nemenyi_cd,
    nemenyi_q_05, CvReport, GridSpec,
};
use crate::kernels::KernelSpec;
use crate::model::{load_model, save_model, write_pretty_json, Hyperparameters, MpwtsvmModel};
use crate::qp::{assemble_dual, DualDirection, GraphSet};

/// Seed used when `--seed` is not given, fixed for reproducibility.
pub const DEFAULT_SEED: u64 = 1729;

/// Top-level argument structure: one subcommand plus global options.
#[derive(Debug, Parser)]
#[command(
    name = "mpwtsvm",
    version,
    about = "Multi-view twin SVM toolkit: scaling, training, prediction, \
             cross-validation, grid search, benchmarking, and rank statistics"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Cap on concurrently running folds/grid points (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
}

/// The available subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scale features to [0, 1] and save the scaling parameters.
    Scale(ScaleArgs),
    /// Fit a multi-view model and save it as JSON.
    Train(TrainArgs),
    /// Load a model and label new samples.
    Predict(PredictArgs),
    /// Stratified k-fold cross-validation of one configuration.
    Cv(CvArgs),
    /// Exhaustive hyperparameter search by cross-validated accuracy.
    Grid(GridArgs),
    /// Compare the multi-view model against the single-view baseline.
    Bench(BenchArgs),
    /// Friedman statistic and Nemenyi critical difference from accuracies.
    Stats(StatsArgs),
}

/// The three CSV files describing a labelled two-view dataset.
#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// View-A feature CSV: headerless, one sample per row.
    #[arg(long, value_name = "FILE")]
    pub view_a: PathBuf,
    /// View-B feature CSV: headerless, one sample per row.
    #[arg(long, value_name = "FILE")]
    pub view_b: PathBuf,
    /// Label CSV: one of `+1`, `1`, `-1` per line.
    #[arg(long, value_name = "FILE")]
    pub labels: PathBuf,
}

impl DataArgs {
    fn load(&self) -> Result<MultiViewDataset> {
        require_files(&[&self.view_a, &self.view_b, &self.labels])?;
        load_multiview_csv(&self.view_a, &self.view_b, &self.labels)
    }
}

/// Output directory and overwrite policy.
#[derive(Debug, Clone, Args, Serialize)]
pub struct OutArgs {
    /// Output directory; created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Overwrite existing output files. Not part of the manifest: whether
    /// outputs were overwritten has no bearing on their contents, and a
    /// re-run from the manifest must reproduce it byte for byte.
    #[arg(long)]
    #[serde(skip)]
    pub force: bool,
}

impl OutArgs {
    /// Creates the directory and refuses to clobber `names` without
    /// `--force`. Returns the full paths in the same order.
    fn prepare(&self, names: &[&str]) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.out).map_err(|source| Error::Io {
            path: self.out.clone(),
            source,
        })?;
        let paths: Vec<PathBuf> = names.iter().map(|n| self.out.join(n)).collect();
        if !self.force {
            for p in &paths {
                if p.exists() {
                    return Err(Error::OutputExists { path: p.clone() });
                }
            }
        }
        Ok(paths)
    }
}

/// Kernel selector for the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelArg {
    /// Dot-product kernel (feature space = input space).
    Linear,
    /// Gaussian RBF kernel; requires `--sigma`.
    Rbf,
}

/// Hyperparameters as flags. Unset negative-direction values mirror their
/// positive-direction counterparts.
#[derive(Debug, Clone, Args, Serialize)]
pub struct HyperArgs {
    /// Penalty on view A's margin violations (positive direction).
    #[arg(long, default_value_t = 1.0)]
    pub c_a: f64,
    /// Penalty on view B's margin violations (positive direction).
    #[arg(long, default_value_t = 1.0)]
    pub c_b: f64,
    /// Weight of the cross-view slack product (positive direction).
    #[arg(long, default_value_t = 1.0)]
    pub c_coupling: f64,
    /// Negative-direction mirror of --c-a (default: same value).
    #[arg(long)]
    pub c_a2: Option<f64>,
    /// Negative-direction mirror of --c-b (default: same value).
    #[arg(long)]
    pub c_b2: Option<f64>,
    /// Negative-direction mirror of --c-coupling (default: same value).
    #[arg(long)]
    pub c_coupling2: Option<f64>,
    /// Trade-off scaling view B's proximity term (positive direction).
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Negative-direction mirror of --gamma (default: same value).
    #[arg(long)]
    pub gamma2: Option<f64>,
    /// Neighbor count for the intra- and inter-class graphs.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Ridge added when inverting proximity matrices (0 = automatic).
    #[arg(long, default_value_t = 0.0)]
    pub eps_reg: f64,
    /// Train in a kernel feature space instead of the raw features.
    #[arg(long, value_enum, value_name = "KIND")]
    pub kernel: Option<KernelArg>,
    /// RBF kernel width; required with --kernel rbf.
    #[arg(long, value_name = "SIGMA")]
    pub sigma: Option<f64>,
    /// Lift the slack diagonal so the dual is positive semidefinite.
    #[arg(long)]
    pub convexify: bool,
}

impl HyperArgs {
    fn resolve(&self) -> Result<Hyperparameters> {
        let kernel = match (self.kernel, self.sigma) {
            (None, None) => None,
            (None, Some(_)) => {
                return Err(Error::InvalidParameter(
                    "--sigma requires --kernel rbf".into(),
                ))
            }
            (Some(KernelArg::Linear), None) => Some(KernelSpec::Linear),
            (Some(KernelArg::Linear), Some(_)) => {
                return Err(Error::InvalidParameter(
                    "--sigma does not apply to the linear kernel".into(),
                ))
            }
            (Some(KernelArg::Rbf), Some(sigma)) => Some(KernelSpec::Rbf { sigma }),
            (Some(KernelArg::Rbf), None) => {
                return Err(Error::InvalidParameter(
                    "--kernel rbf requires --sigma".into(),
                ))
            }
        };
        let params = Hyperparameters {
            c_a: self.c_a,
            c_b: self.c_b,
            c_coupling: self.c_coupling,
            c_a2: self.c_a2.unwrap_or(self.c_a),
            c_b2: self.c_b2.unwrap_or(self.c_b),
            c_coupling2: self.c_coupling2.unwrap_or(self.c_coupling),
            gamma: self.gamma,
            gamma2: self.gamma2.unwrap_or(self.gamma),
            k: self.k,
            eps_reg: self.eps_reg,
            kernel,
            convexify: self.convexify,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Arguments of `scale`.
#[derive(Debug, Args, Serialize)]
pub struct ScaleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Arguments of `train`.
#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Also write the assembled dual programs (H, p, A, b) as CSV files.
    #[arg(long)]
    pub dump_qp: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Decision-rule selector for `predict`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleArg {
    /// Distances in view A only.
    ViewA,
    /// Distances in view B only.
    ViewB,
    /// Average of the per-view distances.
    Combined,
}

/// Arguments of `predict`.
#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    /// Model file written by `train` or `grid`.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// View-A feature CSV of the samples to label.
    #[arg(long, value_name = "FILE")]
    pub view_a: PathBuf,
    /// View-B feature CSV of the samples to label.
    #[arg(long, value_name = "FILE")]
    pub view_b: PathBuf,
    /// Decision rule for the emitted labels.
    #[arg(long, value_enum, default_value_t = RuleArg::Combined)]
    pub rule: RuleArg,
    /// Emit all three decision rules as a three-column table instead.
    #[arg(long)]
    pub report_all_rules: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Arguments of `cv`.
#[derive(Debug, Args, Serialize)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Number of stratified folds.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Seed of the fold partition.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Dataset name used in the report's first column.
    #[arg(long, default_value = "dataset")]
    pub dataset_name: String,
    /// Report the per-view decision rules alongside the combined rule.
    #[arg(long)]
    pub report_all_rules: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Arguments of `grid`.
#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Tied penalty values (default: 0.001,0.01,…,1000).
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub penalties: Option<Vec<f64>>,
    /// Proximity trade-off values (default: 0.001,0.01,…,1000).
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub gammas: Option<Vec<f64>>,
    /// RBF widths, used with --rbf (default: 0.001,0.01,…,1000).
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub sigmas: Option<Vec<f64>>,
    /// Neighbor counts (default: 3,5,7,9,11).
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub ks: Option<Vec<usize>>,
    /// Search RBF-kernel models instead of raw linear ones.
    #[arg(long)]
    pub rbf: bool,
    /// Lift the slack diagonal in every configuration.
    #[arg(long)]
    pub convexify: bool,
    /// Number of stratified folds.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Seed of the fold partition.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

impl GridArgs {
    fn grid_spec(&self) -> GridSpec {
        let mut spec = GridSpec::default_preset(self.rbf);
        spec.convexify = self.convexify;
        if let Some(v) = &self.penalties {
            spec.penalties = v.clone();
        }
        if let Some(v) = &self.gammas {
            spec.gammas = v.clone();
        }
        if let Some(v) = &self.sigmas {
            spec.sigmas = v.clone();
        }
        if let Some(v) = &self.ks {
            spec.ks = v.clone();
        }
        spec
    }
}

/// Arguments of `bench`.
#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Penalty of the single-view baseline (default: --c-a).
    #[arg(long, value_name = "C")]
    pub baseline_c: Option<f64>,
    /// Number of stratified folds.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Seed of the fold partition.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Dataset name used in the report's first column.
    #[arg(long, default_value = "dataset")]
    pub dataset_name: String,
    /// Also report the multi-view per-view decision rules.
    #[arg(long)]
    pub report_all_rules: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Arguments of `stats`.
#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    /// Accuracy CSV, datasets × algorithms — or average ranks with
    /// --avg-ranks.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Interpret the input as one row (or column) of average ranks.
    #[arg(long)]
    pub avg_ranks: bool,
    /// Dataset count behind the average ranks; required with --avg-ranks.
    #[arg(long, value_name = "N")]
    pub n_datasets: Option<usize>,
    /// Studentized-range constant (default: built-in 0.05-level table).
    #[arg(long, value_name = "Q")]
    pub q_alpha: Option<f64>,
    /// Comma-separated algorithm names for the report.
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    pub names: Option<Vec<String>>,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Manifest written into every output directory. Holds the resolved
/// configuration and versions only — no timestamps — so identical runs
/// produce identical manifests.
#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: Option<u64>,
    config: &'a T,
}

fn write_manifest<T: Serialize>(
    path: &Path,
    command: &'static str,
    seed: Option<u64>,
    config: &T,
) -> Result<()> {
    write_pretty_json(
        path,
        &Manifest {
            schema_version: crate::SCHEMA_VERSION,
            tool: "mpwtsvm",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
        },
    )
}

fn require_files(paths: &[&PathBuf]) -> Result<()> {
    for path in paths {
        std::fs::metadata(path).map_err(|source| Error::Io {
            path: (*path).clone(),
            source,
        })?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One algorithm's per-fold accuracies for the report CSV.
struct AlgoBlock {
    name: &'static str,
    folds: Vec<f64>,
    mean: f64,
    std: f64,
}

impl AlgoBlock {
    fn from_cv(name: &'static str, report: &CvReport, pick: fn(&crate::eval::FoldStats) -> f64) -> Self {
        let folds: Vec<f64> = report.folds.iter().map(pick).collect();
        Self {
            name,
            folds,
            mean: pick(&report.mean),
            std: pick(&report.std),
        }
    }
}

/// Renders `dataset,algorithm,fold,accuracy` rows, folds numbered from 1,
/// followed by `mean` and `std` summary rows per algorithm.
fn render_report_csv(dataset: &str, blocks: &[AlgoBlock]) -> String {
    let mut s = String::from("dataset,algorithm,fold,accuracy\n");
    for b in blocks {
        for (i, acc) in b.folds.iter().enumerate() {
            writeln!(s, "{dataset},{},{},{acc}", b.name, i + 1).expect("string write");
        }
        writeln!(s, "{dataset},{},mean,{}", b.name, b.mean).expect("string write");
        writeln!(s, "{dataset},{},std,{}", b.name, b.std).expect("string write");
    }
    s
}

fn column_csv(path: &Path, v: &DVector<f64>) -> Result<()> {
    write_matrix_csv(path, &DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
}

/// Entry point used by the binary: parses arguments, runs, maps errors to
/// exit codes (argument errors exit 2 via the parser itself).
pub fn run_main() -> i32 {
    let config = RunConfig::parse();
    match run(&config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Executes one parsed run configuration.
pub fn run(config: &RunConfig) -> Result<()> {
    if let Some(jobs) = config.jobs {
        if jobs == 0 {
            return Err(Error::InvalidParameter(
                "--jobs must be at least 1".into(),
            ));
        }
        // Failure means a pool already exists (e.g. repeated in-process
        // runs); results do not depend on the pool size, so continue.
        if rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized; --jobs ignored");
        }
    }
    match &config.command {
        Command::Scale(args) => run_scale(args),
        Command::Train(args) => run_train(args),
        Command::Predict(args) => run_predict(args),
        Command::Cv(args) => run_cv(args),
        Command::Grid(args) => run_grid(args),
        Command::Bench(args) => run_bench(args),
        Command::Stats(args) => run_stats(args),
    }
}

fn run_scale(args: &ScaleArgs) -> Result<()> {
    let ds = args.data.load()?;
    let paths = args.out.prepare(&[
        "view_a.csv",
        "view_b.csv",
        "labels.csv",
        "scaling.json",
        "manifest.json",
    ])?;
    let (scaled, params) = minmax_scale(&ds);
    write_matrix_csv(&paths[0], &scaled.view_a)?;
    write_matrix_csv(&paths[1], &scaled.view_b)?;
    write_labels_csv(&paths[2], &scaled.labels)?;
    write_pretty_json(&paths[3], &params)?;
    write_manifest(&paths[4], "scale", None, args)?;
    println!(
        "scaled {} samples ({} + {} features) into {}",
        scaled.len(),
        scaled.view_a.ncols(),
        scaled.view_b.ncols(),
        args.out.out.display()
    );
    Ok(())
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let params = args.hyper.resolve()?;
    let ds = args.data.load()?;
    let mut names = vec!["model.json", "manifest.json"];
    let dump_names = [
        "qp_positive_h.csv",
        "qp_positive_p.csv",
        "qp_positive_a.csv",
        "qp_positive_b.csv",
        "qp_negative_h.csv",
        "qp_negative_p.csv",
        "qp_negative_a.csv",
        "qp_negative_b.csv",
    ];
    if args.dump_qp {
        names.extend(dump_names);
    }
    let paths = args.out.prepare(&names)?;
    let model = MpwtsvmModel::fit(&ds, &params)?;
    save_model(&model, &paths[0])?;
    write_manifest(&paths[1], "train", None, args)?;
    if args.dump_qp {
        let (scaled, _) = minmax_scale(&ds);
        let graphs = GraphSet::build(&scaled, params.k)?;
        for (d, base) in [(DualDirection::Positive, 2), (DualDirection::Negative, 6)] {
            let dual = assemble_dual(&scaled, &graphs, &params, d)?;
            write_matrix_csv(&paths[base], &dual.qp.h)?;
            column_csv(&paths[base + 1], &dual.qp.p)?;
            write_matrix_csv(&paths[base + 2], &dual.qp.a_ineq)?;
            column_csv(&paths[base + 3], &dual.qp.b)?;
        }
    }
    for (label, diag) in [
        ("positive", &model.diagnostics.positive),
        ("negative", &model.diagnostics.negative),
    ] {
        println!(
            "{label} direction: kkt residual {:.3e} ({}, {} iterations), kept {}/{} constraint-class samples",
            diag.kkt_residual,
            if diag.converged { "converged" } else { "NOT converged" },
            diag.iterations,
            diag.kept,
            diag.constraint_class_size,
        );
    }
    println!("model written to {}", paths[0].display());
    Ok(())
}

fn run_predict(args: &PredictArgs) -> Result<()> {
    require_files(&[&args.model, &args.view_a, &args.view_b])?;
    let model = load_model(&args.model)?;
    let a = parse_matrix_csv(&args.view_a)?;
    let b = parse_matrix_csv(&args.view_b)?;
    if a.nrows() != b.nrows() {
        return Err(Error::RowCountMismatch {
            path_a: args.view_a.clone(),
            rows_a: a.nrows(),
            path_b: args.view_b.clone(),
            rows_b: b.nrows(),
        });
    }
    let paths = args.out.prepare(&["predictions.csv", "manifest.json"])?;
    if args.report_all_rules {
        let pa = model.predict_view_many(&a, View::A)?;
        let pb = model.predict_view_many(&b, View::B)?;
        let pc = model.predict_combined_many(&a, &b)?;
        let mut s = String::from("view_a,view_b,combined\n");
        for i in 0..pa.len() {
            writeln!(s, "{:+},{:+},{:+}", pa[i], pb[i], pc[i]).expect("string write");
        }
        write_text(&paths[0], &s)?;
    } else {
        let labels = match args.rule {
            RuleArg::ViewA => model.predict_view_many(&a, View::A)?,
            RuleArg::ViewB => model.predict_view_many(&b, View::B)?,
            RuleArg::Combined => model.predict_combined_many(&a, &b)?,
        };
        write_labels_csv(&paths[0], &labels)?;
    }
    write_manifest(&paths[1], "predict", None, args)?;
    println!("labelled {} samples into {}", a.nrows(), paths[0].display());
    Ok(())
}

fn run_cv(args: &CvArgs) -> Result<()> {
    let params = args.hyper.resolve()?;
    let ds = args.data.load()?;
    let paths = args.out.prepare(&["report.csv", "manifest.json"])?;
    let report = cross_validate(&ds, &params, args.folds, args.seed)?;
    let mut blocks = Vec::new();
    if args.report_all_rules {
        blocks.push(AlgoBlock::from_cv("mpwtsvm_view_a", &report, |f| f.view_a));
        blocks.push(AlgoBlock::from_cv("mpwtsvm_view_b", &report, |f| f.view_b));
    }
    blocks.push(AlgoBlock::from_cv("mpwtsvm_combined", &report, |f| {
        f.combined
    }));
    write_text(&paths[0], &render_report_csv(&args.dataset_name, &blocks))?;
    write_manifest(&paths[1], "cv", Some(args.seed), args)?;
    println!(
        "{}-fold accuracy (combined rule): {:.4} ± {:.4}",
        args.folds, report.mean.combined, report.std.combined
    );
    Ok(())
}

fn run_grid(args: &GridArgs) -> Result<()> {
    let ds = args.data.load()?;
    let spec = args.grid_spec();
    let paths = args
        .out
        .prepare(&["grid_report.csv", "best.json", "model.json", "manifest.json"])?;
    let outcome = crate::eval::grid_search(&ds, &spec, args.folds, args.seed)?;

    let configurations = spec.configurations();
    let mut s = String::from(
        "index,penalty,gamma,sigma,k,mean_view_a,mean_view_b,mean_combined,std_combined\n",
    );
    for (i, (p, r)) in configurations.iter().zip(&outcome.reports).enumerate() {
        let sigma = match p.kernel {
            Some(KernelSpec::Rbf { sigma }) => sigma.to_string(),
            _ => String::new(),
        };
        writeln!(
            s,
            "{i},{},{},{sigma},{},{},{},{},{}",
            p.c_a,
            p.gamma,
            p.k,
            r.mean.view_a,
            r.mean.view_b,
            r.mean.combined,
            r.std.combined
        )
        .expect("string write");
    }
    write_text(&paths[0], &s)?;

    #[derive(Serialize)]
    struct Best<'a> {
        index: usize,
        mean_combined: f64,
        std_combined: f64,
        params: &'a Hyperparameters,
    }
    write_pretty_json(
        &paths[1],
        &Best {
            index: outcome.best_index,
            mean_combined: outcome.best_report.mean.combined,
            std_combined: outcome.best_report.std.combined,
            params: &outcome.best,
        },
    )?;
    let model = MpwtsvmModel::fit(&ds, &outcome.best)?;
    save_model(&model, &paths[2])?;
    write_manifest(&paths[3], "grid", Some(args.seed), args)?;
    println!(
        "searched {} configurations; best #{}: penalty {}, gamma {}, k {}{} -> {:.4} mean combined accuracy",
        outcome.evaluated,
        outcome.best_index,
        outcome.best.c_a,
        outcome.best.gamma,
        outcome.best.k,
        match outcome.best.kernel {
            Some(KernelSpec::Rbf { sigma }) => format!(", sigma {sigma}"),
            _ => String::new(),
        },
        outcome.best_report.mean.combined
    );
    Ok(())
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    let params = args.hyper.resolve()?;
    let baseline_c = args.baseline_c.unwrap_or(params.c_a);
    let ds = args.data.load()?;
    let paths = args.out.prepare(&["report.csv", "manifest.json"])?;

    let t = Instant::now();
    let mv = cross_validate(&ds, &params, args.folds, args.seed)?;
    let mv_time = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let base_a = cross_validate_wltsvm(
        &ds,
        View::A,
        baseline_c,
        params.k,
        params.kernel.as_ref(),
        args.folds,
        args.seed,
    )?;
    let base_a_time = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let base_b = cross_validate_wltsvm(
        &ds,
        View::B,
        baseline_c,
        params.k,
        params.kernel.as_ref(),
        args.folds,
        args.seed,
    )?;
    let base_b_time = t.elapsed().as_secs_f64();

    let mut blocks = Vec::new();
    if args.report_all_rules {
        blocks.push(AlgoBlock::from_cv("mpwtsvm_view_a", &mv, |f| f.view_a));
        blocks.push(AlgoBlock::from_cv("mpwtsvm_view_b", &mv, |f| f.view_b));
    }
    blocks.push(AlgoBlock::from_cv("mpwtsvm_combined", &mv, |f| f.combined));
    blocks.push(AlgoBlock {
        name: "wltsvm_view_a",
        folds: base_a.folds.clone(),
        mean: base_a.mean,
        std: base_a.std,
    });
    blocks.push(AlgoBlock {
        name: "wltsvm_view_b",
        folds: base_b.folds.clone(),
        mean: base_b.mean,
        std: base_b.std,
    });
    write_text(&paths[0], &render_report_csv(&args.dataset_name, &blocks))?;
    write_manifest(&paths[1], "bench", Some(args.seed), args)?;

    // Wall-clock times go to stdout only: they vary run to run and would
    // break the byte-reproducibility of the report files.
    println!("algorithm         mean_acc   std        time_s");
    for (name, mean, std, time) in [
        ("mpwtsvm_combined", mv.mean.combined, mv.std.combined, mv_time),
        ("wltsvm_view_a   ", base_a.mean, base_a.std, base_a_time),
        ("wltsvm_view_b   ", base_b.mean, base_b.std, base_b_time),
    ] {
        println!("{name}  {mean:.4}     {std:.4}     {time:.3}");
    }
    Ok(())
}

fn run_stats(args: &StatsArgs) -> Result<()> {
    require_files(&[&args.input])?;
    let matrix = parse_matrix_csv(&args.input)?;
    let (ranks, n_datasets) = if args.avg_ranks {
        let n = args.n_datasets.ok_or_else(|| {
            Error::InvalidParameter("--n-datasets is required with --avg-ranks".into())
        })?;
        let ranks: Vec<f64> = if matrix.nrows() == 1 || matrix.ncols() == 1 {
            matrix.iter().copied().collect()
        } else {
            return Err(Error::InvalidParameter(format!(
                "--avg-ranks input must be a single row or column, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        };
        (ranks, n)
    } else {
        if args.n_datasets.is_some() {
            return Err(Error::InvalidParameter(
                "--n-datasets only applies with --avg-ranks".into(),
            ));
        }
        let table = average_ranks(&matrix)?;
        (table.average_ranks, matrix.nrows())
    };
    let k = ranks.len();
    let names = match &args.names {
        Some(names) => {
            if names.len() != k {
                return Err(Error::DimensionMismatch {
                    context: "algorithm names",
                    expected: format!("{k} names"),
                    found: format!("{} names", names.len()),
                });
            }
            names.clone()
        }
        None => (1..=k).map(|i| format!("algo_{i}")).collect(),
    };
    let q = match args.q_alpha {
        Some(q) => q,
        None => nemenyi_q_05(k)?,
    };
    let chi = friedman_statistic(&ranks, n_datasets, k)?;
    let cd = nemenyi_cd(k, n_datasets, q)?;

    let paths = args
        .out
        .prepare(&["ranks.csv", "summary.txt", "manifest.json"])?;
    let mut ranks_csv = String::from("algorithm,average_rank\n");
    for (name, r) in names.iter().zip(&ranks) {
        writeln!(ranks_csv, "{name},{r}").expect("string write");
    }
    write_text(&paths[0], &ranks_csv)?;

    let mut summary = String::new();
    writeln!(summary, "datasets: {n_datasets}").expect("string write");
    writeln!(summary, "algorithms: {k}").expect("string write");
    for (name, r) in names.iter().zip(&ranks) {
        writeln!(summary, "average_rank[{name}]: {r}").expect("string write");
    }
    writeln!(summary, "chi2_f: {chi}").expect("string write");
    writeln!(summary, "q_alpha: {q}").expect("string write");
    writeln!(summary, "critical_difference: {cd}").expect("string write");
    write_text(&paths[1], &summary)?;
    write_manifest(&paths[2], "stats", None, args)?;
    print!("{summary}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{dataset_paths, write_labels_csv, write_matrix_csv};
    use crate::synthetic::two_view_blobs;

    fn write_dataset(dir: &Path, ds: &MultiViewDataset) -> (PathBuf, PathBuf, PathBuf) {
        let (pa, pb, pl) = dataset_paths(dir);
        write_matrix_csv(&pa, &ds.view_a).unwrap();
        write_matrix_csv(&pb, &ds.view_b).unwrap();
        write_labels_csv(&pl, &ds.labels).unwrap();
        (pa, pb, pl)
    }

    #[test]
    fn argument_structure_is_well_formed() {
        use clap::CommandFactory;
        RunConfig::command().debug_assert();
    }

    #[test]
    fn kernel_flag_combinations_resolve_or_fail() {
        let base = || HyperArgs {
            c_a: 1.0,
            c_b: 1.0,
            c_coupling: 1.0,
            c_a2: None,
            c_b2: None,
            c_coupling2: None,
            gamma: 1.0,
            gamma2: None,
            k: 5,
            eps_reg: 0.0,
            kernel: None,
            sigma: None,
            convexify: false,
        };
        assert_eq!(base().resolve().unwrap().kernel, None);

        let mut h = base();
        h.kernel = Some(KernelArg::Rbf);
        h.sigma = Some(0.5);
        assert_eq!(
            h.resolve().unwrap().kernel,
            Some(KernelSpec::Rbf { sigma: 0.5 })
        );

        let mut h = base();
        h.kernel = Some(KernelArg::Rbf);
        assert!(h.resolve().is_err(), "rbf without sigma");

        let mut h = base();
        h.sigma = Some(0.5);
        assert!(h.resolve().is_err(), "sigma without kernel");

        let mut h = base();
        h.kernel = Some(KernelArg::Linear);
        assert_eq!(h.resolve().unwrap().kernel, Some(KernelSpec::Linear));

        let mut h = base();
        h.c_a = 3.0;
        h.gamma = 2.0;
        let p = h.resolve().unwrap();
        assert_eq!(p.c_a2, 3.0, "negative direction mirrors c_a");
        assert_eq!(p.gamma2, 2.0, "negative direction mirrors gamma");
    }

    #[test]
    fn report_csv_has_fold_and_summary_rows() {
        let blocks = [AlgoBlock {
            name: "algo",
            folds: vec![1.0, 0.5],
            mean: 0.75,
            std: 0.25,
        }];
        let csv = render_report_csv("toy", &blocks);
        assert_eq!(
            csv,
            "dataset,algorithm,fold,accuracy\n\
             toy,algo,1,1\n\
             toy,algo,2,0.5\n\
             toy,algo,mean,0.75\n\
             toy,algo,std,0.25\n"
        );
    }

    #[test]
    fn train_then_predict_recovers_training_labels() {
        let dir = tempfile::tempdir().unwrap();
        let ds = two_view_blobs(40, 5.0, 0.3, 17);
        let (pa, pb, pl) = write_dataset(dir.path(), &ds);
        let train_out = dir.path().join("train");
        let config = RunConfig {
            jobs: None,
            command: Command::Train(TrainArgs {
                data: DataArgs {
                    view_a: pa.clone(),
                    view_b: pb.clone(),
                    labels: pl.clone(),
                },
                hyper: HyperArgs {
                    c_a: 1.0,
                    c_b: 1.0,
                    c_coupling: 1.0,
                    c_a2: None,
                    c_b2: None,
                    c_coupling2: None,
                    gamma: 1.0,
                    gamma2: None,
                    k: 5,
                    eps_reg: 0.0,
                    kernel: None,
                    sigma: None,
                    convexify: false,
                },
                dump_qp: true,
                out: OutArgs {
                    out: train_out.clone(),
                    force: false,
                },
            }),
        };
        run(&config).unwrap();
        assert!(train_out.join("model.json").exists());
        assert!(train_out.join("manifest.json").exists());
        assert!(train_out.join("qp_positive_h.csv").exists());
        assert!(train_out.join("qp_negative_b.csv").exists());

        let predict_out = dir.path().join("predict");
        let config = RunConfig {
            jobs: None,
            command: Command::Predict(PredictArgs {
                model: train_out.join("model.json"),
                view_a: pa.clone(),
                view_b: pb.clone(),
                rule: RuleArg::Combined,
                report_all_rules: false,
                out: OutArgs {
                    out: predict_out.clone(),
                    force: false,
                },
            }),
        };
        run(&config).unwrap();
        let emitted = crate::data::parse_labels_csv(&predict_out.join("predictions.csv")).unwrap();
        assert_eq!(emitted, ds.labels, "training labels must be recovered");
    }

    #[test]
    fn existing_outputs_are_guarded_by_force() {
        let dir = tempfile::tempdir().unwrap();
        let ds = two_view_blobs(12, 4.0, 0.3, 3);
        let (pa, pb, pl) = write_dataset(dir.path(), &ds);
        let out = dir.path().join("scaled");
        let make = |force: bool| RunConfig {
            jobs: None,
            command: Command::Scale(ScaleArgs {
                data: DataArgs {
                    view_a: pa.clone(),
                    view_b: pb.clone(),
                    labels: pl.clone(),
                },
                out: OutArgs {
                    out: out.clone(),
                    force,
                },
            }),
        };
        run(&make(false)).unwrap();
        let err = run(&make(false)).unwrap_err();
        assert!(matches!(err, Error::OutputExists { .. }), "{err}");
        assert_eq!(err.exit_code(), 5);
        run(&make(true)).unwrap();
    }

    #[test]
    fn missing_input_file_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            jobs: None,
            command: Command::Predict(PredictArgs {
                model: dir.path().join("no_such_model.json"),
                view_a: dir.path().join("a.csv"),
                view_b: dir.path().join("b.csv"),
                rule: RuleArg::Combined,
                report_all_rules: false,
                out: OutArgs {
                    out: dir.path().join("out"),
                    force: false,
                },
            }),
        };
        let err = run(&config).unwrap_err();
        assert!(
            err.to_string().contains("no_such_model.json"),
            "message must name the missing path, got: {err}"
        );
        assert_ne!(err.exit_code(), 0);
    }

    #[test]
    fn stats_reproduces_published_rank_scenario() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("ranks.csv");
        std::fs::write(&input, "6.678,3.011,5.500,5.756,2.678,2.911,1.467\n").unwrap();
        let out = dir.path().join("stats");
        let config = RunConfig {
            jobs: None,
            command: Command::Stats(StatsArgs {
                input,
                avg_ranks: true,
                n_datasets: Some(45),
                q_alpha: None,
                names: None,
                out: OutArgs {
                    out: out.clone(),
                    force: false,
                },
            }),
        };
        run(&config).unwrap();
        let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
        let grab = |key: &str| -> f64 {
            summary
                .lines()
                .find_map(|l| l.strip_prefix(key))
                .unwrap_or_else(|| panic!("missing {key} in {summary}"))
                .trim()
                .parse()
                .unwrap()
        };
        let chi = grab("chi2_f:");
        assert!((219.0..=225.0).contains(&chi), "chi2_f {chi}");
        assert!((grab("critical_difference:") - 1.343).abs() <= 0.001);
        assert_eq!(grab("q_alpha:"), 2.949);
        assert!(out.join("ranks.csv").exists());
    }

    #[test]
    fn stats_ranks_accuracy_matrices_directly() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("acc.csv");
        std::fs::write(&input, "0.9,0.8\n0.7,0.6\n").unwrap();
        let out = dir.path().join("stats");
        let config = RunConfig {
            jobs: None,
            command: Command::Stats(StatsArgs {
                input,
                avg_ranks: false,
                n_datasets: None,
                q_alpha: None,
                names: Some(vec!["ours".into(), "theirs".into()]),
                out: OutArgs {
                    out: out.clone(),
                    force: false,
                },
            }),
        };
        run(&config).unwrap();
        let ranks = std::fs::read_to_string(out.join("ranks.csv")).unwrap();
        assert_eq!(ranks, "algorithm,average_rank\nours,1\ntheirs,2\n");
        let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
        assert!(summary.contains("chi2_f: 2"), "{summary}");
    }
}
