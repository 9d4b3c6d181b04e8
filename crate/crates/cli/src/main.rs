//! `mfgmix`: fit, evaluate, inspect and export MFG mixture models.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 solver failure.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use mfgmix::ingest::{
    dataset_to_images, filter_by_labels, labeled_dataset, load_idx_images, load_idx_labels,
    quantize, synth_generate, write_idx_images, write_idx_labels,
};
use mfgmix::mixture::{em_baseline_fit, fit, FitConfig, FitResult};
use mfgmix::report::{export_histogram_csv, export_parameter_images, ClusterReport};
use mfgmix::{
    solve_subsystem, CoreError, CostSpec, Dataset, IngestError, MixtureError, MixtureModel,
    ReportError, SimplexVector, SolverConfig,
};

use config::Manifest;

#[derive(Parser)]
#[command(name = "mfgmix", version, about = "Categorical mixture models fitted as mean field games")]
struct Cli {
    /// Worker threads (default: all logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// key=value file supplying any flag; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a mixture to IDX images.
    Fit(FitArgs),
    /// Score a model against labelled images.
    Eval(EvalArgs),
    /// Solve one S-state subsystem and print it.
    Solve(SolveArgs),
    /// Sample a labelled dataset from a model.
    Synth(SynthArgs),
    /// Write one PGM per component.
    Export(ExportArgs),
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Comma list of labels to keep, e.g. 1,3.
    #[arg(long)]
    classes: Option<String>,
    /// Number of components (defaults to the number of classes).
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long = "S", default_value_t = 2)]
    s: usize,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Classical EM instead of the MFG M-step.
    #[arg(long)]
    baseline: bool,
    #[arg(long)]
    out: PathBuf,
    /// Per-iteration CSV (iteration, theta residual, log-likelihood).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Run manifest path (default: <out>.manifest).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    classes: Option<String>,
    /// CSV of the aligned H matrix.
    #[arg(long = "out-h")]
    out_h: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Comma list forming a probability vector, e.g. 0.7,0.3.
    #[arg(long, allow_hyphen_values = true)]
    theta: String,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "out-images")]
    out_images: Option<PathBuf>,
    #[arg(long = "out-labels")]
    out_labels: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    side: usize,
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Solver(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Solver(m) => m,
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<MixtureError> for Failure {
    fn from(e: MixtureError) -> Self {
        match e {
            MixtureError::Subsystem { .. } => Failure::Solver(e.to_string()),
            MixtureError::InvalidConfig(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn parse_classes(list: &str) -> Result<Vec<u32>, Failure> {
    list.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Failure::Usage(format!("bad class label {t:?}")))
        })
        .collect()
}

fn sha256_file(path: &Path) -> Result<String, Failure> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Loads images (and labels), quantizes, and keeps only `classes` if given.
fn load_data(
    images: &Path,
    labels: Option<&Path>,
    classes: Option<&[u32]>,
    num_states: usize,
) -> Result<Dataset, Failure> {
    let raw = load_idx_images(images)?;
    let data = match labels {
        Some(l) => labeled_dataset(&raw, load_idx_labels(l)?, num_states)?,
        None => quantize(&raw, num_states)?,
    };
    let Some(classes) = classes else {
        return Ok(data);
    };
    if data.labels().is_none() {
        return Err(Failure::Usage("--classes needs --labels".into()));
    }
    let filtered = filter_by_labels(&data, classes)?;
    if !filtered.missing.is_empty() {
        eprintln!("warning: labels {:?} do not occur in the data", filtered.missing);
    }
    if filtered.is_empty() {
        return Err(Failure::Data("no samples left after filtering".into()));
    }
    Ok(filtered.data)
}

fn trace_csv(res: &FitResult) -> String {
    let mut out = String::from("iteration,theta_residual,loglik\n");
    for (i, (r, l)) in res
        .theta_residual_trace
        .iter()
        .zip(&res.loglik_trace)
        .enumerate()
    {
        writeln!(out, "{},{r},{l}", i + 1).unwrap();
    }
    out
}

fn cmd_fit(a: &FitArgs, threads: Option<usize>) -> Outcome {
    let classes = a.classes.as_deref().map(parse_classes).transpose()?;
    let k = a
        .k
        .or(classes.as_ref().map(Vec::len))
        .ok_or_else(|| Failure::Usage("--K is required without --classes".into()))?;
    if k == 0 {
        return Err(Failure::Usage("--K must be at least 1".into()));
    }
    if a.s < 2 {
        return Err(Failure::Usage("--S must be at least 2".into()));
    }
    if !(a.eps >= 0.0) || !(a.tol > 0.0) || a.max_iter == 0 {
        return Err(Failure::Usage("need --eps >= 0, --tol > 0, --max-iter >= 1".into()));
    }

    let t = Instant::now();
    let data = load_data(&a.images, a.labels.as_deref(), classes.as_deref(), a.s)?;
    let load_s = t.elapsed().as_secs_f64();

    let cfg = FitConfig {
        tolerance: a.tol,
        max_outer_iterations: a.max_iter,
        ..FitConfig::new(k).with_epsilon(a.eps).with_seed(a.seed)
    };
    let t = Instant::now();
    let res = if a.baseline {
        em_baseline_fit(&data, &cfg)?
    } else {
        fit(&data, &cfg)?
    };
    let fit_s = t.elapsed().as_secs_f64();
    for w in &res.warnings {
        eprintln!("warning: {w}");
    }

    let t = Instant::now();
    res.model.save(&a.out)?;
    if let Some(trace) = &a.trace {
        fs::write(trace, trace_csv(&res))?;
    }
    let write_s = t.elapsed().as_secs_f64();

    let mut m = Manifest::default();
    m.set("images", a.images.display());
    if let Some(l) = &a.labels {
        m.set("labels", l.display());
    }
    if let Some(c) = &a.classes {
        m.set("classes", c);
    }
    m.set("K", k);
    m.set("S", a.s);
    m.set("eps", a.eps);
    m.set("tol", a.tol);
    m.set("max-iter", a.max_iter);
    m.set("seed", a.seed);
    m.set("baseline", a.baseline);
    m.set("out", a.out.display());
    if let Some(t) = &a.trace {
        m.set("trace", t.display());
    }
    m.set("run.command", "fit");
    m.set("run.threads", threads.unwrap_or_else(rayon::current_num_threads));
    m.set("fit.empty_cluster_fraction", cfg.empty_cluster_fraction);
    m.set("fit.residual_gate", cfg.residual_gate);
    m.set("fit.policy_tolerance", cfg.solver.policy_tolerance);
    m.set("fit.inner_root_tolerance", cfg.solver.inner_root_tolerance);
    m.set("fit.max_policy_iterations", cfg.solver.max_policy_iterations);
    m.set("fit.coupling", format!("{:?}", cfg.cost.coupling));
    m.set("fit.transition_cost", format!("{:?}", cfg.cost.transition));
    m.set("data.samples", data.num_samples());
    m.set("data.dims", data.num_dims());
    m.set("digest.images", sha256_file(&a.images)?);
    if let Some(l) = &a.labels {
        m.set("digest.labels", sha256_file(l)?);
    }
    m.set("digest.model", sha256_file(&a.out)?);
    if let Some(t) = &a.trace {
        m.set("digest.trace", sha256_file(t)?);
    }
    m.set("version.mfgmix", env!("CARGO_PKG_VERSION"));
    m.set("result.iterations", res.iterations);
    m.set("result.converged", res.converged);
    m.set("result.loglik", res.loglik_trace.last().copied().unwrap_or(f64::NAN));
    m.set("time.load_s", load_s);
    m.set("time.fit_s", fit_s);
    m.set("time.write_s", write_s);
    let manifest = a.manifest.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".manifest");
        p.into()
    });
    m.write(&manifest)?;

    println!(
        "iterations {} converged {} loglik {}",
        res.iterations,
        res.converged,
        res.loglik_trace.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Outcome {
    let model = MixtureModel::load(&a.model)?;
    let classes = a.classes.as_deref().map(parse_classes).transpose()?;
    if let Some(c) = &classes {
        if c.len() != model.num_components() {
            return Err(Failure::Data(format!(
                "{} classes but the model has K={}",
                c.len(),
                model.num_components()
            )));
        }
    }
    let data = load_data(&a.images, Some(&a.labels), classes.as_deref(), model.num_states())?;
    if data.num_dims() != model.num_dims() {
        return Err(Failure::Data(format!(
            "images have D={}, model has D={}",
            data.num_dims(),
            model.num_dims()
        )));
    }
    let resp = mfgmix::mixture::responsibilities(&model, &data)?;
    let report = ClusterReport::new(&resp, &data)?;
    let names: Vec<String> = match &classes {
        Some(c) => c.iter().map(u32::to_string).collect(),
        None => (0..model.num_components()).map(|k| k.to_string()).collect(),
    };
    println!("diagonal_mean {}", report.diagonal_mean);
    println!("permutation {:?}", report.permutation);
    for (name, row) in names.iter().zip(&report.aligned) {
        println!("{name} {row:?}");
    }
    if let Some(out) = &a.out_h {
        export_histogram_csv(&report, &names, out)?;
    }
    Ok(())
}

fn cmd_solve(a: &SolveArgs) -> Outcome {
    let entries: Vec<f64> = a
        .theta
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("--theta {:?} is not a number list", a.theta)))?;
    let theta =
        SimplexVector::new(entries).map_err(|e| Failure::Usage(format!("--theta: {e}")))?;
    if !(a.eps >= 0.0) {
        return Err(Failure::Usage("--eps must be non-negative".into()));
    }
    let sol = solve_subsystem(&theta, &CostSpec::with_epsilon(a.eps), &SolverConfig::default())
        .map_err(|e| Failure::Solver(e.to_string()))?;
    println!("V {:?}", sol.value.as_slice());
    println!("lambda {}", sol.ergodic_cost);
    println!("pi {:?}", sol.distribution.as_slice());
    println!("P");
    for row in sol.transition.rows() {
        println!("  {row:?}");
    }
    println!("hjb_residual {}", sol.hjb_residual);
    println!("fp_residual {}", sol.fp_residual);
    println!("policy_iterations {}", sol.policy_iterations);
    Ok(())
}

fn square_side(d: usize) -> Option<usize> {
    let side = (d as f64).sqrt().round() as usize;
    (side * side == d).then_some(side)
}

fn cmd_synth(a: &SynthArgs) -> Outcome {
    let model = MixtureModel::load(&a.model)?;
    let side = match &a.out_images {
        Some(_) => Some(square_side(model.num_dims()).ok_or_else(|| {
            Failure::Data(format!("D={} is not a perfect square", model.num_dims()))
        })?),
        None => None,
    };
    let data = synth_generate(&model, a.n, a.seed);
    if let (Some(path), Some(side)) = (&a.out_images, side) {
        write_idx_images(&dataset_to_images(&data, side, side)?, path)?;
    }
    if let Some(path) = &a.out_labels {
        write_idx_labels(data.labels().unwrap_or(&[]), path)?;
    }
    println!("sampled {} images", data.num_samples());
    Ok(())
}

fn cmd_export(a: &ExportArgs) -> Outcome {
    let model = MixtureModel::load(&a.model)?;
    for f in export_parameter_images(&model, a.side, &a.out_dir)? {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match config::expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a, cli.threads),
        Command::Eval(a) => cmd_eval(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
