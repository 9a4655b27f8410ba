//! Data containers, prior choices, sampler configuration and chain state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Replicated observations `y[j][i]` for `p` coordinates and `n` replicates,
/// with cached per-coordinate sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    p: usize,
    n: usize,
    y: Vec<f64>,
    ybar: Vec<f64>,
    row_sum: Vec<f64>,
    row_sumsq: Vec<f64>,
    within_ss: f64,
}

/// Builds a [`Dataset`] from rows (one row per coordinate).
pub fn build_dataset(rows: &[Vec<f64>]) -> Result<Dataset> {
    let n = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("all rows must have the same number of replicates"));
    }
    Dataset::from_row_major(rows.len(), n, rows.concat())
}

impl Dataset {
    pub fn from_row_major(p: usize, n: usize, y: Vec<f64>) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::invalid(format!("dataset needs p >= 1 and n >= 1, got p={p}, n={n}")));
        }
        if y.len() != p * n {
            return Err(Error::invalid(format!("expected {} values, got {}", p * n, y.len())));
        }
        if let Some(k) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite observation at row {}, column {}",
                k / n,
                k % n
            )));
        }
        let mut row_sum = Vec::with_capacity(p);
        let mut row_sumsq = Vec::with_capacity(p);
        let mut ybar = Vec::with_capacity(p);
        let mut within_ss = 0.0;
        for row in y.chunks_exact(n) {
            let s: f64 = row.iter().sum();
            let m = s / n as f64;
            row_sum.push(s);
            row_sumsq.push(row.iter().map(|v| v * v).sum());
            ybar.push(m);
            within_ss += row.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
        }
        Ok(Self {
            p,
            n,
            y,
            ybar,
            row_sum,
            row_sumsq,
            within_ss,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.y[j * self.n..(j + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.y.chunks_exact(self.n)
    }

    /// All observations, row-major.
    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn ybar(&self) -> &[f64] {
        &self.ybar
    }

    pub fn row_sum(&self) -> &[f64] {
        &self.row_sum
    }

    pub fn row_sumsq(&self) -> &[f64] {
        &self.row_sumsq
    }

    /// `Σ_j Σ_i (y_ij - ȳ_j)²`.
    pub fn within_ss(&self) -> f64 {
        self.within_ss
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Parameterization {
    #[default]
    NonPx,
    Px,
}

/// Prior on the local scales `λ_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LambdaPrior {
    /// `λ_j ~ C⁺(0, 1)`.
    #[default]
    Horseshoe,
    /// `λ_j ~ N⁺(1, v)`.
    TruncNormal { v: f64 },
    /// `λ_j² ~ Exp(1/2)`, the Bayesian lasso.
    DoubleExponential,
    /// `λ_j ≡ 1`: global shrinkage only.
    FixedOne,
}

/// Which update is used for horseshoe local scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HorseshoeUpdate {
    /// Inverse-gamma auxiliary variable, normal draw for `λ_j` given `θ_j`.
    #[default]
    Auxiliary,
    /// Slice sampler on `η_j = 1/λ_j²` given `β_j`.
    Slice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sigma2Mode {
    /// Residual sum of squares of the Gaussian marginal with `β` integrated
    /// out; drawn ahead of the `β` block.
    #[default]
    ExactMarginal,
    /// `Σ y²/(1 + τ²λ²)`, drawn after the `β` block, reproducing the
    /// original reference sampler exactly.
    AppendixCompat,
}

/// Prior on the global scale `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TauPrior {
    #[default]
    HalfCauchy,
    /// `τ = |Δ| g` with `Δ ~ N(m, 1)`, `g² ~ IG(a/2, b/2)`.
    NoncentralT { m: f64, a: f64, b: f64 },
}

impl TauPrior {
    /// `(m, a, b)` of the noncentral-t representation; the half-Cauchy is
    /// `(0, 1, 1)`.
    pub fn noncentral_t_params(&self) -> (f64, f64, f64) {
        match *self {
            TauPrior::HalfCauchy => (0.0, 1.0, 1.0),
            TauPrior::NoncentralT { m, a, b } => (m, a, b),
        }
    }

    pub fn is_half_cauchy(&self) -> bool {
        self.noncentral_t_params() == (0.0, 1.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub parameterization: Parameterization,
    pub lambda_prior: LambdaPrior,
    pub horseshoe_update: HorseshoeUpdate,
    pub sigma2_mode: Sigma2Mode,
    pub tau_prior: TauPrior,
    /// Starting value of `τ` (PX starts from `g = 1`, `Δ = tau_init`).
    pub tau_init: f64,
    pub burn: usize,
    pub keep: usize,
    pub thin: usize,
    pub seed: u64,
    /// Record `β` and `λ` at every kept iteration.
    pub store_vectors: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            parameterization: Parameterization::NonPx,
            lambda_prior: LambdaPrior::Horseshoe,
            horseshoe_update: HorseshoeUpdate::Auxiliary,
            sigma2_mode: Sigma2Mode::ExactMarginal,
            tau_prior: TauPrior::HalfCauchy,
            tau_init: 1.0,
            burn: 20_000,
            keep: 20_000,
            thin: 1,
            seed: 42,
            store_vectors: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.keep == 0 {
            return bad("keep must be >= 1".into());
        }
        if self.thin == 0 {
            return bad("thin must be >= 1".into());
        }
        if !(self.tau_init > 0.0 && self.tau_init.is_finite()) {
            return bad(format!("tau_init must be finite and > 0, got {}", self.tau_init));
        }
        if let LambdaPrior::TruncNormal { v } = self.lambda_prior {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("truncated-normal variance v must be > 0, got {v}"));
            }
        }
        if let TauPrior::NoncentralT { m, a, b } = self.tau_prior {
            if !m.is_finite() || !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
                return bad(format!("noncentral-t prior needs finite m and a, b > 0, got m={m}, a={a}, b={b}"));
            }
        }
        if self.parameterization == Parameterization::NonPx && !self.tau_prior.is_half_cauchy() {
            return bad("the non-PX slice update for tau supports only the half-Cauchy prior".into());
        }
        Ok(())
    }

    /// Total number of sweeps performed by a run.
    pub fn total_sweeps(&self) -> usize {
        self.burn + self.keep * self.thin
    }
}

/// Redundant pair of the parameter-expanded model, `τ = |Δ| g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansion {
    pub delta: f64,
    pub g: f64,
}

/// Current values of every latent quantity of one chain.
///
/// After each sweep `β_j = σ Δ λ_j θ_j` (with `Δ = 1` outside PX). Local
/// scales may carry a sign; only `λ_j²` enters the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub beta: Vec<f64>,
    pub theta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub tau: f64,
    pub sigma2: f64,
    pub expansion: Option<Expansion>,
    /// Sweeps completed so far.
    pub iteration: usize,
    /// Number of times a measure-zero fallback path was taken.
    pub numeric_events: u64,
}

impl ChainState {
    /// `β = 0`, `σ² = 1`, `λ = 1`, `τ = tau_init`; PX adds `g = 1`, `Δ = tau_init`.
    pub fn initial(p: usize, config: &SamplerConfig) -> Self {
        let expansion = match config.parameterization {
            Parameterization::NonPx => None,
            Parameterization::Px => Some(Expansion {
                delta: config.tau_init,
                g: 1.0,
            }),
        };
        Self {
            beta: vec![0.0; p],
            theta: vec![0.0; p],
            lambda: vec![1.0; p],
            tau: config.tau_init,
            sigma2: 1.0,
            expansion,
            iteration: 0,
            numeric_events: 0,
        }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// `Δ` in PX, 1 otherwise.
    pub fn delta(&self) -> f64 {
        self.expansion.map_or(1.0, |e| e.delta)
    }

    pub fn is_px(&self) -> bool {
        self.expansion.is_some()
    }

    /// Checks the consistency invariants with relative tolerance `tol`.
    pub fn check_consistency(&self, tol: f64) -> std::result::Result<(), String> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(format!("tau = {}", self.tau));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(format!("sigma2 = {}", self.sigma2));
        }
        if let Some(e) = self.expansion {
            if !(e.g > 0.0 && e.g.is_finite()) || !e.delta.is_finite() {
                return Err(format!("g = {}, delta = {}", e.g, e.delta));
            }
            if (self.tau - e.delta.abs() * e.g).abs() > tol * self.tau {
                return Err(format!("tau {} != |delta| g = {}", self.tau, e.delta.abs() * e.g));
            }
        }
        let scale = self.sigma() * self.delta();
        for j in 0..self.p() {
            let implied = scale * self.lambda[j] * self.theta[j];
            if !self.beta[j].is_finite() || (self.beta[j] - implied).abs() > tol * self.beta[j].abs().max(1e-300) {
                return Err(format!("beta[{j}] = {} but sigma delta lambda theta = {implied}", self.beta[j]));
            }
        }
        Ok(())
    }
}

/// Draws recorded after burn-in.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Trace {
    pub tau: Vec<f64>,
    pub sigma2: Vec<f64>,
    /// PX only: `Δ` and `g` at each recorded iteration.
    pub delta: Option<Vec<f64>>,
    pub g: Option<Vec<f64>>,
    /// `keep × p`, when `store_vectors` is set.
    pub beta: Option<Vec<Vec<f64>>>,
    pub lambda: Option<Vec<Vec<f64>>>,
    pub config: SamplerConfig,
    pub numeric_events: u64,
    pub wall_time_secs: f64,
}

impl Trace {
    pub(crate) fn with_capacity(config: &SamplerConfig) -> Self {
        let keep = config.keep;
        let px = config.parameterization == Parameterization::Px;
        Self {
            tau: Vec::with_capacity(keep),
            sigma2: Vec::with_capacity(keep),
            delta: px.then(|| Vec::with_capacity(keep)),
            g: px.then(|| Vec::with_capacity(keep)),
            beta: config.store_vectors.then(|| Vec::with_capacity(keep)),
            lambda: config.store_vectors.then(|| Vec::with_capacity(keep)),
            config: config.clone(),
            numeric_events: 0,
            wall_time_secs: 0.0,
        }
    }

    pub(crate) fn record(&mut self, state: &ChainState) {
        self.tau.push(state.tau);
        self.sigma2.push(state.sigma2);
        if let (Some(d), Some(g), Some(e)) = (self.delta.as_mut(), self.g.as_mut(), state.expansion) {
            d.push(e.delta);
            g.push(e.g);
        }
        if let Some(b) = self.beta.as_mut() {
            b.push(state.beta.clone());
        }
        if let Some(l) = self.lambda.as_mut() {
            l.push(state.lambda.clone());
        }
        self.numeric_events = state.numeric_events;
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// Column `j` of the stored `β` draws.
    pub fn beta_column(&self, j: usize) -> Option<Vec<f64>> {
        self.beta.as_ref().map(|rows| rows.iter().map(|r| r[j]).collect())
    }

    /// Posterior mean of `|λ_j|` for each coordinate.
    pub fn lambda_abs_mean(&self) -> Option<Vec<f64>> {
        let rows = self.lambda.as_ref()?;
        let p = rows.first()?.len();
        let mut acc = vec![0.0; p];
        for r in rows {
            for (a, l) in acc.iter_mut().zip(r) {
                *a += l.abs();
            }
        }
        Some(acc.into_iter().map(|s| s / rows.len() as f64).collect())
    }
}
