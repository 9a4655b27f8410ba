//! Conditional updates and the full Gibbs sweep for the standard and the
//! parameter-expanded normal-means models.
//!
//! Notation: `β_j` is the mean of coordinate `j` on the observation scale,
//! `θ_j = β_j / (σ Δ λ_j)` (with `Δ = 1` outside PX), `τ` the global scale and
//! `λ_j` the local scales. Updates that condition on `θ` hold it fixed and
//! rebuild `β`; updates that condition on `β` hold it fixed and rebuild `θ`.

use std::time::Instant;

use crate::distributions::{
    sample_exponential, sample_gamma, sample_inverse_gaussian, sample_truncated_exponential,
    sample_truncated_flat, sample_truncated_gamma, sample_truncated_normal_positive,
    truncated_gamma_from_uniform, RngStream, TruncatedDraw,
};
use crate::error::{Error, Result};
use crate::model::{
    ChainState, Dataset, HorseshoeUpdate, LambdaPrior, Parameterization, SamplerConfig, Sigma2Mode,
    TauPrior, Trace,
};

/// Mean and variance of `β_j` given `a_j = τ²λ_j²`, `n`, `σ²` and `ȳ_j`:
/// `N(b/(1+b) ȳ_j, σ² a_j/(1+b))` with `b = n a_j`.
pub fn beta_conditional(a: f64, n: f64, sigma2: f64, ybar: f64) -> (f64, f64) {
    if a.is_finite() {
        let b = n * a;
        (b / (1.0 + b) * ybar, sigma2 * a / (1.0 + b))
    } else {
        (ybar, sigma2 / n)
    }
}

/// Draws `β_j | σ², τ, λ_j, ȳ_j` for every coordinate, then sets `θ_j`.
pub fn update_beta_block(state: &mut ChainState, data: &Dataset, stream: &mut RngStream) -> Result<()> {
    let n = data.n() as f64;
    let tau2 = state.tau * state.tau;
    for j in 0..state.p() {
        let a = tau2 * state.lambda[j] * state.lambda[j];
        let (mean, var) = beta_conditional(a, n, state.sigma2, data.ybar()[j]);
        state.beta[j] = mean + var.sqrt() * stream.standard_normal();
    }
    theta_from_beta(state);
    Ok(())
}

fn theta_from_beta(state: &mut ChainState) {
    let scale = state.sigma() * state.delta();
    for j in 0..state.p() {
        let denom = scale * state.lambda[j];
        if denom == 0.0 {
            state.theta[j] = 0.0;
            state.numeric_events += 1;
        } else {
            state.theta[j] = state.beta[j] / denom;
        }
    }
}

fn beta_from_theta(state: &mut ChainState) {
    let scale = state.sigma() * state.delta();
    for j in 0..state.p() {
        state.beta[j] = scale * state.lambda[j] * state.theta[j];
    }
}

/// Residual sum of squares driving the `σ²` draw.
///
/// `ExactMarginal` is the quadratic form of the Gaussian marginal of `y_j`
/// with `β_j` integrated out, `Σ_j [Σ_i y_ij² − a_j/(1 + n a_j) (Σ_i y_ij)²]`,
/// evaluated as within-row sum of squares plus `n ȳ_j² / (1 + n a_j)`.
/// `AppendixCompat` is `Σ_j Σ_i y_ij² / (1 + a_j)`.
pub fn residual_sum_of_squares(state: &ChainState, data: &Dataset, mode: Sigma2Mode) -> f64 {
    let n = data.n() as f64;
    let tau2 = state.tau * state.tau;
    match mode {
        Sigma2Mode::ExactMarginal => {
            let between: f64 = (0..data.p())
                .map(|j| {
                    let a = tau2 * state.lambda[j] * state.lambda[j];
                    let ybar = data.ybar()[j];
                    n * ybar * ybar / (1.0 + n * a)
                })
                .sum();
            data.within_ss() + between
        }
        Sigma2Mode::AppendixCompat => (0..data.p())
            .map(|j| data.row_sumsq()[j] / (1.0 + tau2 * state.lambda[j] * state.lambda[j]))
            .sum(),
    }
}

/// `σ² ~ IG(np/2, RSS/2)` under the Jeffreys prior `p(σ) ∝ 1/σ`.
pub fn update_sigma2(
    state: &mut ChainState,
    data: &Dataset,
    stream: &mut RngStream,
    mode: Sigma2Mode,
) -> Result<()> {
    let rss = residual_sum_of_squares(state, data, mode);
    if !(rss > 0.0 && rss.is_finite()) {
        return Err(Error::DegenerateState(format!("residual sum of squares is {rss}")));
    }
    let shape = 0.5 * (data.n() * data.p()) as f64;
    state.sigma2 = 1.0 / sample_gamma(stream, shape, 0.5 * rss)?;
    Ok(())
}

/// One slice step for a precision `η` whose conditional is
/// `∝ η^{shape−1} e^{−rate η} / (1 + η)`, given the slice height `u` in
/// `(0, 1/(1+η))` and the inversion fraction `frac` in `(0, 1)`.
pub fn slice_gamma_step(shape: f64, rate: f64, u: f64, frac: f64) -> TruncatedDraw {
    let bound = (1.0 - u) / u;
    truncated_gamma_from_uniform(shape, rate, bound, frac)
}

/// Slice update of `τ` through `η = 1/τ²` under `τ ~ C⁺(0, 1)` (non-PX).
pub fn update_tau_slice(state: &mut ChainState, stream: &mut RngStream) -> Result<()> {
    if state.is_px() {
        return Err(Error::InvalidConfig("slice update of tau applies to the non-PX model".into()));
    }
    let sum_sq: f64 = state.theta.iter().map(|t| t * t).sum();
    if !(sum_sq > 0.0) {
        return Err(Error::DegenerateState(
            "sum of theta^2 is zero: the conditional for tau is improper".into(),
        ));
    }
    let eta = 1.0 / (state.tau * state.tau);
    let u = stream.open_uniform() / (1.0 + eta);
    let bound = ((1.0 - u) / u).min(f64::MAX);
    let shape = 0.5 * (state.p() as f64 + 1.0);
    let draw = sample_truncated_gamma(stream, shape, 0.5 * sum_sq, bound)?;
    if draw.fallback {
        state.numeric_events += 1;
    }
    state.tau = 1.0 / draw.value.sqrt();
    Ok(())
}

/// Conjugate updates of the redundant pair: `g² | θ` then `Δ | θ, λ, σ, y`,
/// and `τ = |Δ| g`. Under the noncentral-t prior `(m, a, b)`,
/// `g² ~ IG((a + p)/2, (b + Σθ²)/2)` and `Δ` has prior mean `m`.
pub fn update_tau_px(
    state: &mut ChainState,
    data: &Dataset,
    tau_prior: &TauPrior,
    stream: &mut RngStream,
) -> Result<()> {
    let Some(mut expansion) = state.expansion else {
        return Err(Error::InvalidConfig("PX update of tau needs the expanded state".into()));
    };
    let (m, a, b) = tau_prior.noncentral_t_params();
    let p = state.p() as f64;
    let n = data.n() as f64;
    let sigma = state.sigma();

    let sum_sq: f64 = state.theta.iter().map(|t| t * t).sum();
    let g2 = 1.0 / sample_gamma(stream, 0.5 * (a + p), 0.5 * (b + sum_sq))?;
    expansion.g = g2.sqrt();

    // a_j z_j = n λ_j θ_j ȳ_j / σ in product form, so θ_j λ_j = 0 adds nothing.
    let mut precision = 1.0;
    let mut weighted = m;
    for j in 0..state.p() {
        let lt = state.lambda[j] * state.theta[j];
        precision += n * lt * lt;
        weighted += n * lt * data.ybar()[j] / sigma;
    }
    let mean = weighted / precision;
    let sd = precision.recip().sqrt();
    let mut delta = mean + sd * stream.standard_normal();
    if delta == 0.0 {
        delta = mean + sd * stream.standard_normal();
        if delta == 0.0 {
            return Err(Error::DegenerateState("delta drawn as exactly zero twice".into()));
        }
    }
    expansion.delta = delta;
    state.expansion = Some(expansion);
    state.tau = delta.abs() * expansion.g;
    beta_from_theta(state);
    Ok(())
}

/// Horseshoe local scales by slicing `η_j = 1/λ_j²` given
/// `μ_j = β_j / (σ τ)`: the conditional is `∝ e^{−μ_j² η_j / 2} / (1 + η_j)`.
pub fn update_lambda_horseshoe_slice(state: &mut ChainState, stream: &mut RngStream) -> Result<()> {
    let scale = state.sigma() * state.tau;
    for j in 0..state.p() {
        let mu = state.beta[j] / scale;
        let eta = 1.0 / (state.lambda[j] * state.lambda[j]);
        let u = stream.open_uniform() / (1.0 + eta);
        let bound = ((1.0 - u) / u).min(f64::MAX);
        let rate = 0.5 * mu * mu;
        let eta_new = if rate > 0.0 {
            sample_truncated_exponential(stream, rate, bound)?
        } else {
            state.numeric_events += 1;
            sample_truncated_flat(stream, bound)?
        };
        state.lambda[j] = 1.0 / eta_new.sqrt();
    }
    theta_from_beta(state);
    Ok(())
}

/// Mean and variance of `λ_j` given the auxiliary `V_j`, with
/// `dt = Δ θ_j`: `w = n V dt²`, mean `w/(1+w) · ȳ/(σ dt)`, variance `V/(1+w)`.
/// Evaluated in product form, so `dt = 0` yields the prior `N(0, V)`.
pub fn lambda_aux_conditional(v: f64, n: f64, dt: f64, ybar: f64, sigma: f64) -> (f64, f64) {
    let w = n * v * dt * dt;
    (n * v * dt * ybar / sigma / (1.0 + w), v / (1.0 + w))
}

/// Horseshoe local scales through the auxiliary variable
/// `V_j | λ_j ~ IG(1, (1 + λ_j²)/2)` (so that `λ_j | V_j ~ N(0, V_j)` marginally
/// gives `|λ_j| ~ C⁺(0, 1)`), followed by the normal draw of `λ_j` given `θ_j`.
pub fn update_lambda_horseshoe_aux(state: &mut ChainState, data: &Dataset, stream: &mut RngStream) -> Result<()> {
    let n = data.n() as f64;
    let sigma = state.sigma();
    let delta = state.delta();
    for j in 0..state.p() {
        let lam = state.lambda[j];
        let v = 0.5 * (lam * lam + 1.0) / stream.standard_exponential();
        let dt = delta * state.theta[j];
        if dt == 0.0 {
            state.numeric_events += 1;
        }
        let (mean, var) = lambda_aux_conditional(v, n, dt, data.ybar()[j], sigma);
        state.lambda[j] = mean + var.sqrt() * stream.standard_normal();
    }
    beta_from_theta(state);
    Ok(())
}

/// Untruncated mean and variance of `λ_j` under the `N⁺(1, v)` prior, with
/// `dt = Δ θ_j`.
pub fn lambda_truncnormal_conditional(v: f64, n: f64, dt: f64, ybar: f64, sigma: f64) -> (f64, f64) {
    let prior_precision = 1.0 / v;
    let precision = prior_precision + n * dt * dt;
    ((prior_precision + n * dt * ybar / sigma) / precision, 1.0 / precision)
}

/// Local scales under `λ_j ~ N⁺(1, v)`: the precision-weighted combination of
/// the prior and the likelihood `ȳ_j ~ N(σ Δ θ_j λ_j, σ²/n)`, truncated to
/// `(0, ∞)`.
pub fn update_lambda_truncnormal(
    state: &mut ChainState,
    data: &Dataset,
    stream: &mut RngStream,
    v: f64,
) -> Result<()> {
    let n = data.n() as f64;
    let sigma = state.sigma();
    let delta = state.delta();
    for j in 0..state.p() {
        let dt = delta * state.theta[j];
        if dt == 0.0 {
            state.numeric_events += 1;
        }
        let (mean, var) = lambda_truncnormal_conditional(v, n, dt, data.ybar()[j], sigma);
        state.lambda[j] = sample_truncated_normal_positive(stream, mean, var)?;
    }
    beta_from_theta(state);
    Ok(())
}

/// Bayesian-lasso local scales, `λ_j² ~ Exp(1/2)`: given `μ_j = β_j/(σ τ)`,
/// `1/λ_j²` is inverse Gaussian with mean `1/|μ_j|` and shape 1.
pub fn update_lambda_lasso(state: &mut ChainState, stream: &mut RngStream) -> Result<()> {
    let scale = state.sigma() * state.tau;
    for j in 0..state.p() {
        let mu = (state.beta[j] / scale).abs();
        let ig_mean = 1.0 / mu;
        state.lambda[j] = if mu > 0.0 && ig_mean.is_finite() {
            1.0 / sample_inverse_gaussian(stream, ig_mean, 1.0)?.sqrt()
        } else {
            state.numeric_events += 1;
            sample_exponential(stream, 0.5)?.sqrt()
        };
    }
    theta_from_beta(state);
    Ok(())
}

fn update_tau(state: &mut ChainState, data: &Dataset, config: &SamplerConfig, stream: &mut RngStream) -> Result<()> {
    match config.parameterization {
        Parameterization::NonPx => update_tau_slice(state, stream),
        Parameterization::Px => update_tau_px(state, data, &config.tau_prior, stream),
    }
}

fn update_lambda(state: &mut ChainState, data: &Dataset, config: &SamplerConfig, stream: &mut RngStream) -> Result<()> {
    match config.lambda_prior {
        LambdaPrior::Horseshoe => match config.horseshoe_update {
            HorseshoeUpdate::Auxiliary => update_lambda_horseshoe_aux(state, data, stream),
            HorseshoeUpdate::Slice => update_lambda_horseshoe_slice(state, stream),
        },
        LambdaPrior::TruncNormal { v } => update_lambda_truncnormal(state, data, stream, v),
        LambdaPrior::DoubleExponential => update_lambda_lasso(state, stream),
        LambdaPrior::FixedOne => {
            // σ may have moved since θ was formed.
            theta_from_beta(state);
            Ok(())
        }
    }
}

/// One full Gibbs sweep: the `(σ², β)` block, then `τ`, then `λ`.
///
/// In `ExactMarginal` mode `σ²` is drawn from its `β`-marginal conditional
/// first and `β` is then drawn given the new `σ²`, so the pair is a joint
/// draw. `AppendixCompat` keeps the reference order (`β` first, `θ` formed
/// with the previous `σ`, then `σ²`).
pub fn sweep(state: &mut ChainState, data: &Dataset, config: &SamplerConfig, stream: &mut RngStream) -> Result<()> {
    match config.sigma2_mode {
        Sigma2Mode::ExactMarginal => {
            update_sigma2(state, data, stream, config.sigma2_mode)?;
            update_beta_block(state, data, stream)?;
        }
        Sigma2Mode::AppendixCompat => {
            update_beta_block(state, data, stream)?;
            update_sigma2(state, data, stream, config.sigma2_mode)?;
        }
    }
    update_tau(state, data, config, stream)?;
    update_lambda(state, data, config, stream)?;
    state.iteration += 1;
    check_finite(state)
}

fn check_finite(state: &ChainState) -> Result<()> {
    let scalar_ok = state.tau.is_finite()
        && state.tau > 0.0
        && state.sigma2.is_finite()
        && state.sigma2 > 0.0
        && state.expansion.is_none_or(|e| e.delta.is_finite() && e.g.is_finite() && e.g > 0.0);
    let vectors_ok = state
        .beta
        .iter()
        .chain(&state.theta)
        .chain(&state.lambda)
        .all(|v| v.is_finite());
    if scalar_ok && vectors_ok {
        Ok(())
    } else {
        Err(Error::ChainDiverged {
            iteration: state.iteration,
            reason: format!(
                "non-finite state (tau = {}, sigma2 = {}, vectors finite: {vectors_ok})",
                state.tau, state.sigma2
            ),
            partial: Box::default(),
        })
    }
}

/// Runs `burn + keep × thin` sweeps from [`ChainState::initial`] and records
/// every `thin`-th post-burn-in state.
pub fn run_chain(data: &Dataset, config: &SamplerConfig) -> Result<Trace> {
    run_chain_with(data, config, |_, _| {})
}

/// [`run_chain`] with a callback invoked after every sweep.
pub fn run_chain_with(
    data: &Dataset,
    config: &SamplerConfig,
    mut on_sweep: impl FnMut(usize, &ChainState),
) -> Result<Trace> {
    config.validate()?;
    let start = Instant::now();
    let mut state = ChainState::initial(data.p(), config);
    let mut stream = RngStream::new(config.seed);
    let mut trace = Trace::with_capacity(config);
    for it in 0..config.total_sweeps() {
        if let Err(err) = sweep(&mut state, data, config, &mut stream) {
            trace.numeric_events = state.numeric_events;
            trace.wall_time_secs = start.elapsed().as_secs_f64();
            let reason = match err {
                Error::ChainDiverged { reason, .. } => reason,
                Error::DegenerateState(msg) => msg,
                other => return Err(other),
            };
            return Err(Error::ChainDiverged {
                iteration: it + 1,
                reason,
                partial: Box::new(trace),
            });
        }
        on_sweep(it + 1, &state);
        if it >= config.burn && (it - config.burn + 1).is_multiple_of(config.thin) {
            trace.record(&state);
        }
    }
    trace.numeric_events = state.numeric_events;
    trace.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(trace)
}

#[cfg(test)]
mod tests;
