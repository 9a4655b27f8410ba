//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, invalid settings),
//! 2 on runtime failures (I/O, parse errors, diverged chains).
//!
//! `--config FILE` reads flat `key = value` lines (`#` starts a comment).
//! Each key is a long flag name of the chosen subcommand; flags given on the
//! command line take precedence.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::diagnostics::{diagnose, DiagnosticsReport};
use crate::distributions::derive_seed;
use crate::error::{Error, Result};
use crate::experiments::{
    case_study_settings, global_demo_settings, run_case_study, run_global_demo, run_grid_experiment, run_v_sweep,
    simulate_dataset, v_sweep_settings, Comparison, GridSpec, LambdaGen, RunSettings, DEFAULT_V_VALUES,
};
use crate::gibbs::run_chain_with;
use crate::io;
use crate::model::{HorseshoeUpdate, LambdaPrior, Parameterization, SamplerConfig, Sigma2Mode};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "pxshrink", version, about = "Standard and parameter-expanded Gibbs samplers for shrinkage priors")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat `key = value` file of default flag values for the subcommand
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a dataset and write it as CSV
    Simulate(SimulateArgs),
    /// Run one chain and write its trace and diagnostics report
    Run(RunArgs),
    /// Global-only model, both samplers, p=2000 n=3 tau=0.25 sigma=1.25
    DemoGlobal(ExperimentArgs),
    /// Horseshoe case study 1, 2 or 3, both samplers
    Case(CaseArgs),
    /// Relative-efficiency grid over (n, tau)
    Grid(GridArgs),
    /// PX sampler with truncated-normal local scales over several v
    Vsweep(VsweepArgs),
    /// Diagnostics report for one column of an existing trace CSV
    Diag(DiagArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LambdaGenArg {
    HalfCauchy,
    FixedOne,
}

impl From<LambdaGenArg> for LambdaGen {
    fn from(a: LambdaGenArg) -> Self {
        match a {
            LambdaGenArg::HalfCauchy => LambdaGen::HalfCauchy,
            LambdaGenArg::FixedOne => LambdaGen::FixedOne,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PriorArg {
    Horseshoe,
    Lasso,
    TruncNormal,
    FixedOne,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HorseshoeUpdateArg {
    Auxiliary,
    Slice,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Sigma2ModeArg {
    ExactMarginal,
    AppendixCompat,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Number of coordinates
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    /// Replicates per coordinate
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// True global scale
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    /// True noise standard deviation
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Generator of the true local scales
    #[arg(long, value_enum, default_value_t = LambdaGenArg::HalfCauchy)]
    pub lambda_gen: LambdaGenArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Seed of the simulation
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output dataset CSV
    #[arg(long, default_value = "dataset.csv")]
    pub out: PathBuf,
    /// Also write the true beta and lambda as CSV [default: not written]
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Dataset CSV to analyse [default: simulate one from --p, --n, --tau, --sigma, --lambda-gen]
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Prior on the local scales
    #[arg(long, value_enum, default_value_t = PriorArg::Horseshoe)]
    pub prior: PriorArg,
    /// Variance of the truncated-normal local-scale prior
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    /// Use the parameter-expanded sampler [default: off]
    #[arg(long)]
    pub px: bool,
    /// Update for horseshoe local scales
    #[arg(long, value_enum, default_value_t = HorseshoeUpdateArg::Auxiliary)]
    pub horseshoe_update: HorseshoeUpdateArg,
    /// Order and form of the sigma^2 update
    #[arg(long, value_enum, default_value_t = Sigma2ModeArg::ExactMarginal)]
    pub sigma2_mode: Sigma2ModeArg,
    /// Starting value of tau
    #[arg(long, default_value_t = 1.0)]
    pub tau_init: f64,
    /// Burn-in sweeps
    #[arg(long, default_value_t = 20_000)]
    pub burn: usize,
    /// Kept draws
    #[arg(long, default_value_t = 20_000)]
    pub keep: usize,
    /// Sweeps per kept draw
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Master seed (data from one derived stream, the chain from another)
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Directory for trace_<label>.csv and report_<label>.json
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Label used in output file names
    #[arg(long, default_value = "run")]
    pub label: String,
    /// Suppress the progress tick on stderr [default: off]
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// Master seed
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Burn-in sweeps per chain
    #[arg(long, default_value_t = 20_000)]
    pub burn: usize,
    /// Kept draws per chain
    #[arg(long, default_value_t = 20_000)]
    pub keep: usize,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    /// Case study: 1 (p=1000 n=5 tau=1), 2 (p=2000 n=3 tau=0.1) or 3 (p=5000 n=2 tau=0.01)
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub case: u8,
    #[command(flatten)]
    pub common: ExperimentArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// p=200, T=2e4, burn 5e3, 3 datasets, n in {2,5}, tau in {0.01,1} [default: on unless --full-scale]
    #[arg(long, conflicts_with = "full_scale")]
    pub desk_scale: bool,
    /// p=1000, T=1e5, burn 2e4, 10 datasets, n in {2,3,5,10}, tau in {0.01,0.05,0.1,0.5,1}; hours of CPU [default: off]
    #[arg(long)]
    pub full_scale: bool,
    /// Master seed; every (tau, n, replicate) derives its own streams
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads [default: number of CPUs]
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Override p [default: from the chosen scale]
    #[arg(long)]
    pub p: Option<usize>,
    /// Override the kept iterations T [default: from the chosen scale]
    #[arg(long)]
    pub t: Option<usize>,
    /// Override the burn-in [default: from the chosen scale]
    #[arg(long)]
    pub burn: Option<usize>,
    /// Override the datasets per cell [default: from the chosen scale]
    #[arg(long)]
    pub datasets: Option<usize>,
    /// Override the tau values, comma separated [default: from the chosen scale]
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    /// Override the n values, comma separated [default: from the chosen scale]
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Output directory for grid_result.csv
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct VsweepArgs {
    /// Truncated-normal variances (comma separated) [default: 0.0025,0.25,25]
    #[arg(long, value_delimiter = ',')]
    pub v: Option<Vec<f64>>,
    /// Number of coordinates
    #[arg(long, default_value_t = 1000)]
    pub p: usize,
    /// Replicates per coordinate
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// True global scale
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// True noise standard deviation
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[command(flatten)]
    pub common: ExperimentArgs,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    /// Trace CSV with a header line
    #[arg(long)]
    pub trace: PathBuf,
    /// Column to analyse
    #[arg(long, default_value = "tau")]
    pub column: String,
    /// Write the JSON report here [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a subcommand, split by exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::InvalidConfig(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

/// Parses a flat `key = value` file into flag arguments. `true`/`false`
/// values become a bare flag or nothing.
pub fn config_overlay(text: &str) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(Error::Parse {
            line: idx + 1,
            message: format!("expected key = value, found {line:?}"),
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line: idx + 1,
                message: "empty key".into(),
            });
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            v => {
                out.push(format!("--{key}").into());
                out.push(v.into());
            }
        }
    }
    Ok(out)
}

/// Removes `--config FILE` / `--config=FILE` from `argv`.
fn take_config_path(argv: &mut Vec<OsString>) -> Option<OsString> {
    let pos = argv.iter().position(|a| {
        let s = a.to_string_lossy();
        s == "--config" || s.starts_with("--config=")
    })?;
    let flag = argv.remove(pos).to_string_lossy().into_owned();
    match flag.strip_prefix("--config=") {
        Some(path) => Some(path.into()),
        None if pos < argv.len() => Some(argv.remove(pos)),
        None => None,
    }
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if let Some(path) = take_config_path(&mut argv) {
        let overlay = match std::fs::read_to_string(&path).map_err(Error::from).and_then(|t| config_overlay(&t)) {
            Ok(o) => o,
            Err(e) => {
                eprintln!("error: config file {}: {e}", Path::new(&path).display());
                return 1;
            }
        };
        // Right after the subcommand name, so that later command-line flags win.
        let at = argv
            .iter()
            .skip(1)
            .position(|a| !a.to_string_lossy().starts_with('-'))
            .map_or(argv.len(), |i| i + 2);
        argv.splice(at..at, overlay);
    }
    let parsed = Cli::command()
        .mut_subcommands(|sub| sub.args_override_self(true))
        .try_get_matches_from(argv)
        .and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Run(a) => run(a),
        Command::DemoGlobal(a) => {
            let settings = RunSettings {
                burn: a.burn,
                keep: a.keep,
                ..global_demo_settings(a.seed)
            };
            check_lengths(a.keep)?;
            let cmp = run_global_demo(&settings)?;
            write_comparison(&a.out_dir, &cmp)
        }
        Command::Case(a) => {
            let settings = RunSettings {
                burn: a.common.burn,
                keep: a.common.keep,
                ..case_study_settings(a.case, a.common.seed)?
            };
            check_lengths(a.common.keep)?;
            let cmp = run_case_study(a.case, &settings)?;
            write_comparison(&a.common.out_dir, &cmp)
        }
        Command::Grid(a) => grid(a),
        Command::Vsweep(a) => vsweep(a),
        Command::Diag(a) => {
            let values = io::read_trace_column(&a.trace, &a.column)?;
            let report = diagnose(&values)?;
            let json = io::report_to_json(&report)?;
            match a.out {
                Some(path) => io::write_atomic(&path, json.as_bytes())?,
                None => print!("{json}"),
            }
            Ok(())
        }
    }
}

fn check_lengths(keep: usize) -> std::result::Result<(), Failure> {
    if keep < 4 {
        return Err(Failure::Usage(format!("--keep must be at least 4 to compute diagnostics, got {keep}")));
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> std::result::Result<(), Failure> {
    let s = &a.sim;
    let sim = simulate_dataset(s.p, s.n, s.tau, s.sigma, s.lambda_gen.into(), a.seed)?;
    io::write_atomic(&a.out, io::dataset_to_csv(&sim.dataset).as_bytes())?;
    if let Some(truth) = &a.truth {
        io::write_atomic(truth, io::truth_to_csv(&sim).as_bytes())?;
    }
    Ok(())
}

fn run(a: RunArgs) -> std::result::Result<(), Failure> {
    let lambda_prior = match a.prior {
        PriorArg::Horseshoe => LambdaPrior::Horseshoe,
        PriorArg::Lasso => LambdaPrior::DoubleExponential,
        PriorArg::TruncNormal => LambdaPrior::TruncNormal { v: a.v },
        PriorArg::FixedOne => LambdaPrior::FixedOne,
    };
    let config = SamplerConfig {
        parameterization: if a.px { Parameterization::Px } else { Parameterization::NonPx },
        lambda_prior,
        horseshoe_update: match a.horseshoe_update {
            HorseshoeUpdateArg::Auxiliary => HorseshoeUpdate::Auxiliary,
            HorseshoeUpdateArg::Slice => HorseshoeUpdate::Slice,
        },
        sigma2_mode: match a.sigma2_mode {
            Sigma2ModeArg::ExactMarginal => Sigma2Mode::ExactMarginal,
            Sigma2ModeArg::AppendixCompat => Sigma2Mode::AppendixCompat,
        },
        tau_init: a.tau_init,
        burn: a.burn,
        keep: a.keep,
        thin: a.thin,
        seed: derive_seed(a.seed, &[1]),
        ..SamplerConfig::default()
    };
    config.validate()?;
    check_lengths(a.keep)?;
    if a.label.is_empty() || a.label.contains(['/', '\\']) {
        return Err(Failure::Usage(format!("invalid label {:?}", a.label)));
    }

    let data = match &a.data {
        Some(path) => io::read_dataset(path)?,
        None => {
            let s = &a.sim;
            simulate_dataset(s.p, s.n, s.tau, s.sigma, s.lambda_gen.into(), derive_seed(a.seed, &[0]))?.dataset
        }
    };
    let total = config.total_sweeps();
    let quiet = a.quiet;
    let trace = run_chain_with(&data, &config, |it, state| {
        if !quiet && it % 1000 == 0 {
            eprintln!("{it}/{total} tau={:.6e}", state.tau);
        }
    })?;
    let report = diagnose(&trace.tau)?;
    io::write_run(&a.out_dir, &a.label, &trace, &report)?;
    print_summary(&a.label, &report);
    Ok(())
}

fn print_summary(label: &str, report: &DiagnosticsReport) {
    println!(
        "{label}: T={} kappa={:.4} T_e={:.1} acf1={:.4}",
        report.trace_length,
        report.kappa,
        report.t_e,
        report.acf.first().copied().unwrap_or(f64::NAN)
    );
}

fn write_comparison(dir: &Path, cmp: &Comparison) -> std::result::Result<(), Failure> {
    for run in cmp.runs() {
        io::write_run(dir, &run.label, &run.trace, &run.report)?;
        print_summary(&run.label, &run.report);
    }
    println!("r_e (PX / non-PX) = {:.4}", cmp.relative_efficiency);
    Ok(())
}

fn grid(a: GridArgs) -> std::result::Result<(), Failure> {
    let base = if a.full_scale {
        GridSpec::full_scale(a.seed)
    } else {
        GridSpec::desk_scale(a.seed)
    };
    let spec = GridSpec {
        p: a.p.unwrap_or(base.p),
        t: a.t.unwrap_or(base.t),
        burn: a.burn.unwrap_or(base.burn),
        datasets_per_cell: a.datasets.unwrap_or(base.datasets_per_cell),
        tau_values: a.tau.clone().unwrap_or(base.tau_values.clone()),
        n_values: a.n.clone().unwrap_or(base.n_values.clone()),
        ..base
    };
    spec.validate()?;
    if a.jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Runtime(Error::Io(std::io::Error::other(e))))?;
    let result = pool.install(|| run_grid_experiment(&spec))?;
    io::write_atomic(&a.out_dir.join("grid_result.csv"), io::grid_to_csv(&result).as_bytes())?;
    for cell in &result.cells {
        let failed = cell.entries.iter().filter(|e| e.error.is_some()).count();
        println!(
            "n={} tau={}: mean r_e={:.3} mean T_e px={:.1} non-px={:.1} failed={failed}",
            cell.n, cell.tau, cell.mean_re, cell.mean_te_px, cell.mean_te_nonpx
        );
    }
    Ok(())
}

fn vsweep(a: VsweepArgs) -> std::result::Result<(), Failure> {
    check_lengths(a.common.keep)?;
    let settings = RunSettings {
        p: a.p,
        n: a.n,
        tau: a.tau,
        sigma: a.sigma,
        burn: a.common.burn,
        keep: a.common.keep,
        ..v_sweep_settings(a.common.seed)
    };
    let v_values = a.v.unwrap_or(DEFAULT_V_VALUES.to_vec());
    for r in run_v_sweep(&v_values, &settings)? {
        io::write_run(&a.common.out_dir, &r.run.label, &r.run.trace, &r.run.report)?;
        print!("v={:e} ", r.v);
        print_summary(&r.run.label, &r.run.report);
    }
    Ok(())
}
