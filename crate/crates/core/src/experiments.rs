//! Data simulation and the sampler-efficiency experiments: the global-only
//! demonstration, the three horseshoe case studies, the `(n, τ)` grid of
//! relative efficiencies and the truncated-normal `v` sweep.
//!
//! Every experiment is a pure function of its settings and seed. Within one
//! PX/non-PX comparison both chains see the same dataset, start from the same
//! state and consume a stream started from the same seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{diagnose, DiagnosticsReport};
use crate::distributions::{derive_seed, sample_half_cauchy, RngStream};
use crate::error::{Error, Result};
use crate::gibbs::run_chain;
use crate::model::{Dataset, LambdaPrior, Parameterization, SamplerConfig, Trace};

/// How the true local scales are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaGen {
    HalfCauchy,
    FixedOne,
}

#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub dataset: Dataset,
    pub beta_true: Vec<f64>,
    pub lambda_true: Vec<f64>,
}

/// `λ_j ~ C⁺(0,1)` (or 1), `β_j ~ N(0, (σ λ_j τ)²)`, `y_ij = β_j + N(0, σ²)`.
pub fn simulate_dataset(
    p: usize,
    n: usize,
    tau_true: f64,
    sigma_true: f64,
    lambda_gen: LambdaGen,
    seed: u64,
) -> Result<SimulatedData> {
    if p == 0 || n == 0 {
        return Err(Error::invalid(format!("need p, n >= 1, got p={p}, n={n}")));
    }
    if !(tau_true >= 0.0 && tau_true.is_finite()) {
        return Err(Error::invalid(format!("tau must be finite and >= 0, got {tau_true}")));
    }
    if !(sigma_true > 0.0 && sigma_true.is_finite()) {
        return Err(Error::invalid(format!("sigma must be finite and > 0, got {sigma_true}")));
    }
    let mut s = RngStream::new(seed);
    let lambda_true = match lambda_gen {
        LambdaGen::HalfCauchy => (0..p).map(|_| sample_half_cauchy(&mut s, 1.0)).collect::<Result<Vec<_>>>()?,
        LambdaGen::FixedOne => vec![1.0; p],
    };
    let beta_true: Vec<f64> = lambda_true
        .iter()
        .map(|l| sigma_true * l * tau_true * s.standard_normal())
        .collect();
    // Column by column, as replicates of the whole vector.
    let mut y = vec![0.0; p * n];
    for i in 0..n {
        for j in 0..p {
            y[j * n + i] = beta_true[j] + sigma_true * s.standard_normal();
        }
    }
    Ok(SimulatedData {
        dataset: Dataset::from_row_major(p, n, y)?,
        beta_true,
        lambda_true,
    })
}

/// One chain run with its `τ` diagnostics.
#[derive(Debug, Clone)]
pub struct ChainRun {
    pub label: String,
    pub trace: Trace,
    pub report: DiagnosticsReport,
}

/// A PX and a non-PX run on the same data.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub nonpx: ChainRun,
    pub px: ChainRun,
    /// `T_e(PX) / T_e(non-PX)` for `τ`.
    pub relative_efficiency: f64,
}

impl Comparison {
    pub fn runs(&self) -> [&ChainRun; 2] {
        [&self.nonpx, &self.px]
    }
}

fn run_labeled(data: &Dataset, config: &SamplerConfig, label: String) -> Result<ChainRun> {
    let trace = run_chain(data, config)?;
    let report = diagnose(&trace.tau)?;
    Ok(ChainRun { label, trace, report })
}

/// Runs `base` in both parameterizations with the same seed.
pub fn compare_samplers(data: &Dataset, base: &SamplerConfig, label: &str) -> Result<Comparison> {
    let with = |parameterization| SamplerConfig {
        parameterization,
        ..base.clone()
    };
    let nonpx = run_labeled(data, &with(Parameterization::NonPx), format!("{label}_nonpx"))?;
    let px = run_labeled(data, &with(Parameterization::Px), format!("{label}_px"))?;
    let relative_efficiency = px.report.t_e / nonpx.report.t_e;
    Ok(Comparison {
        nonpx,
        px,
        relative_efficiency,
    })
}

/// Simulation settings shared by the single-dataset experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub p: usize,
    pub n: usize,
    pub tau: f64,
    pub sigma: f64,
    pub burn: usize,
    pub keep: usize,
    pub seed: u64,
}

impl RunSettings {
    fn dataset(&self, lambda_gen: LambdaGen) -> Result<SimulatedData> {
        simulate_dataset(self.p, self.n, self.tau, self.sigma, lambda_gen, derive_seed(self.seed, &[0]))
    }

    fn sampler(&self, lambda_prior: LambdaPrior) -> SamplerConfig {
        SamplerConfig {
            lambda_prior,
            burn: self.burn,
            keep: self.keep,
            seed: derive_seed(self.seed, &[1]),
            ..SamplerConfig::default()
        }
    }
}

/// Global-only model at `p = 2000, n = 3, τ = 0.25, σ = 1.25` with
/// `2×10⁴` burn-in and `2×10⁴` kept draws.
pub fn global_demo_settings(seed: u64) -> RunSettings {
    RunSettings {
        p: 2000,
        n: 3,
        tau: 0.25,
        sigma: 1.25,
        burn: 20_000,
        keep: 20_000,
        seed,
    }
}

/// Both samplers with `λ ≡ 1` on one simulated dataset.
pub fn run_global_demo(settings: &RunSettings) -> Result<Comparison> {
    let data = settings.dataset(LambdaGen::FixedOne)?;
    compare_samplers(&data.dataset, &settings.sampler(LambdaPrior::FixedOne), "global")
}

/// Horseshoe case studies: 1 is `p=1000, n=5, σ=τ=1`; 2 is
/// `p=2000, n=3, σ=1, τ=0.1`; 3 is `p=5000, n=2, σ=1, τ=0.01`.
pub fn case_study_settings(case: u8, seed: u64) -> Result<RunSettings> {
    let (p, n, tau) = match case {
        1 => (1000, 5, 1.0),
        2 => (2000, 3, 0.1),
        3 => (5000, 2, 0.01),
        other => return Err(Error::invalid(format!("case must be 1, 2 or 3, got {other}"))),
    };
    Ok(RunSettings {
        p,
        n,
        tau,
        sigma: 1.0,
        burn: 20_000,
        keep: 20_000,
        seed,
    })
}

pub fn run_case_study(case: u8, settings: &RunSettings) -> Result<Comparison> {
    let data = settings.dataset(LambdaGen::HalfCauchy)?;
    compare_samplers(&data.dataset, &settings.sampler(LambdaPrior::Horseshoe), &format!("case{case}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub p: usize,
    pub sigma_true: f64,
    pub tau_values: Vec<f64>,
    pub n_values: Vec<usize>,
    pub datasets_per_cell: usize,
    /// Kept iterations per chain.
    pub t: usize,
    pub burn: usize,
    pub master_seed: u64,
}

impl GridSpec {
    /// `p = 200`, `T = 2×10⁴`, burn-in `5×10³`, 3 datasets per cell, cells
    /// `n ∈ {2, 5}` × `τ ∈ {0.01, 1}`.
    pub fn desk_scale(master_seed: u64) -> Self {
        Self {
            p: 200,
            sigma_true: 1.0,
            tau_values: vec![0.01, 1.0],
            n_values: vec![2, 5],
            datasets_per_cell: 3,
            t: 20_000,
            burn: 5_000,
            master_seed,
        }
    }

    /// `p = 1000`, `T = 10⁵`, burn-in `2×10⁴`, 10 datasets per cell,
    /// `n ∈ {2, 3, 5, 10}` × `τ ∈ {0.01, 0.05, 0.1, 0.5, 1}`. Hours of CPU.
    pub fn full_scale(master_seed: u64) -> Self {
        Self {
            p: 1000,
            sigma_true: 1.0,
            tau_values: vec![0.01, 0.05, 0.1, 0.5, 1.0],
            n_values: vec![2, 3, 5, 10],
            datasets_per_cell: 10,
            t: 100_000,
            burn: 20_000,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.tau_values.is_empty() || self.n_values.is_empty() {
            return bad("tau_values and n_values must be nonempty");
        }
        if self.datasets_per_cell == 0 {
            return bad("datasets_per_cell must be >= 1");
        }
        if self.p == 0 || self.n_values.contains(&0) {
            return bad("p and every n must be >= 1");
        }
        if self.t < 4 {
            return bad("T must be at least 4");
        }
        if self.tau_values.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return bad("tau values must be finite and >= 0");
        }
        if !(self.sigma_true > 0.0 && self.sigma_true.is_finite()) {
            return bad("sigma must be finite and > 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEntry {
    pub dataset_index: usize,
    pub te_px: f64,
    pub te_nonpx: f64,
    pub re: f64,
    /// Set when either chain failed; the numeric fields are then NaN.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub n: usize,
    pub tau: f64,
    pub mean_re: f64,
    pub mean_te_px: f64,
    pub mean_te_nonpx: f64,
    pub entries: Vec<GridEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub spec: GridSpec,
    /// Ordered by `n` (outer) then `τ` (inner), as listed in the `GridSpec`.
    pub cells: Vec<GridCell>,
}

impl GridResult {
    pub fn cell(&self, n: usize, tau: f64) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.n == n && c.tau == tau)
    }
}

fn grid_entry(spec: &GridSpec, tau_idx: usize, n_idx: usize, rep: usize) -> GridEntry {
    let path = [tau_idx as u64, n_idx as u64, rep as u64];
    let outcome = (|| -> Result<(f64, f64)> {
        let sim = simulate_dataset(
            spec.p,
            spec.n_values[n_idx],
            spec.tau_values[tau_idx],
            spec.sigma_true,
            LambdaGen::HalfCauchy,
            derive_seed(spec.master_seed, &[path[0], path[1], path[2], 0]),
        )?;
        let config = SamplerConfig {
            lambda_prior: LambdaPrior::Horseshoe,
            burn: spec.burn,
            keep: spec.t,
            seed: derive_seed(spec.master_seed, &[path[0], path[1], path[2], 1]),
            ..SamplerConfig::default()
        };
        let cmp = compare_samplers(&sim.dataset, &config, "grid")?;
        Ok((cmp.px.report.t_e, cmp.nonpx.report.t_e))
    })();
    match outcome {
        Ok((te_px, te_nonpx)) => GridEntry {
            dataset_index: rep,
            te_px,
            te_nonpx,
            re: te_px / te_nonpx,
            error: None,
        },
        Err(e) => GridEntry {
            dataset_index: rep,
            te_px: f64::NAN,
            te_nonpx: f64::NAN,
            re: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Runs every `(n, τ)` cell and replicate. Replicates run in parallel on the
/// current rayon pool; the result does not depend on the pool size.
pub fn run_grid_experiment(spec: &GridSpec) -> Result<GridResult> {
    spec.validate()?;
    let jobs: Vec<(usize, usize, usize)> = (0..spec.n_values.len())
        .flat_map(|n_idx| {
            (0..spec.tau_values.len())
                .flat_map(move |tau_idx| (0..spec.datasets_per_cell).map(move |rep| (n_idx, tau_idx, rep)))
        })
        .collect();
    let entries: Vec<GridEntry> = jobs
        .par_iter()
        .map(|&(n_idx, tau_idx, rep)| grid_entry(spec, tau_idx, n_idx, rep))
        .collect();

    let cells = entries
        .chunks(spec.datasets_per_cell)
        .zip(jobs.chunks(spec.datasets_per_cell))
        .map(|(chunk, job)| {
            let (n_idx, tau_idx, _) = job[0];
            let ok = || chunk.iter().filter(|e| e.error.is_none());
            GridCell {
                n: spec.n_values[n_idx],
                tau: spec.tau_values[tau_idx],
                mean_re: mean_of(ok().map(|e| e.re)),
                mean_te_px: mean_of(ok().map(|e| e.te_px)),
                mean_te_nonpx: mean_of(ok().map(|e| e.te_nonpx)),
                entries: chunk.to_vec(),
            }
        })
        .collect();
    Ok(GridResult {
        spec: spec.clone(),
        cells,
    })
}

/// Default truncated-normal variances: `0.05²`, `0.5²`, `5²`.
pub const DEFAULT_V_VALUES: [f64; 3] = [0.05 * 0.05, 0.5 * 0.5, 5.0 * 5.0];

/// `τ = σ = 1, n = 2, p = 1000`, `2×10⁴` burn-in and kept draws.
pub fn v_sweep_settings(seed: u64) -> RunSettings {
    RunSettings {
        p: 1000,
        n: 2,
        tau: 1.0,
        sigma: 1.0,
        burn: 20_000,
        keep: 20_000,
        seed,
    }
}

#[derive(Debug, Clone)]
pub struct VSweepRun {
    pub v: f64,
    pub run: ChainRun,
}

/// PX sampler with `λ_j ~ N⁺(1, v)` for each `v`, all on one dataset
/// simulated with half-Cauchy local scales.
pub fn run_v_sweep(v_values: &[f64], settings: &RunSettings) -> Result<Vec<VSweepRun>> {
    if v_values.is_empty() {
        return Err(Error::invalid("v list must be nonempty"));
    }
    if let Some(v) = v_values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!("v must be finite and > 0, got {v}")));
    }
    let data = settings.dataset(LambdaGen::HalfCauchy)?;
    v_values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let config = SamplerConfig {
                parameterization: Parameterization::Px,
                ..settings.sampler(LambdaPrior::TruncNormal { v })
            };
            let run = run_labeled(&data.dataset, &config, format!("vsweep{k}"))?;
            Ok(VSweepRun { v, run })
        })
        .collect()
}
