//! Autocorrelation, integrated autocorrelation time, effective sample size
//! and relative efficiency of scalar traces.
//!
//! Conventions: autocovariances use the fixed denominator `T` (so every
//! `|ρ_t| <= 1`); the infinite sum in `κ = 1 + 2 Σ ρ_t` is truncated by
//! Geyer's initial positive sequence and `κ` is floored at 1, which keeps
//! `T_e = T/κ <= T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of autocorrelations kept in a report.
pub const REPORT_ACF_LAGS: usize = 50;

/// Hard cap on the lags considered.
pub const MAX_LAG_CAP: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// `ρ_1, ρ_2, ...`
    pub acf: Vec<f64>,
    /// Integrated autocorrelation time.
    pub kappa: f64,
    /// Effective sample size `T / κ`.
    pub t_e: f64,
    pub trace_length: usize,
    pub truncation_lag: usize,
}

/// Largest lag used for a trace of length `t`: `min(t/2, 5000)`.
pub fn lag_cap(t: usize) -> usize {
    (t / 2).min(MAX_LAG_CAP)
}

/// Centered trace and its lag-0 autocovariance.
struct Centered {
    x: Vec<f64>,
    c0: f64,
}

impl Centered {
    fn new(trace: &[f64]) -> Result<Self> {
        if trace.len() < 2 {
            return Err(Error::DegenerateTrace(format!("trace of length {} is too short", trace.len())));
        }
        if let Some(k) = trace.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateTrace(format!("non-finite value at index {k}")));
        }
        let t = trace.len() as f64;
        let mean = trace.iter().sum::<f64>() / t;
        let x: Vec<f64> = trace.iter().map(|v| v - mean).collect();
        let c0 = x.iter().map(|v| v * v).sum::<f64>() / t;
        if !(c0 > 0.0) {
            return Err(Error::DegenerateTrace("trace has zero variance".into()));
        }
        Ok(Self { x, c0 })
    }

    fn rho(&self, lag: usize) -> f64 {
        let x = &self.x;
        let ct: f64 = x[..x.len() - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
        ct / (x.len() as f64 * self.c0)
    }
}

/// `ρ_1 ..= ρ_max_lag`.
pub fn autocorrelation(trace: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if trace.len() < max_lag + 2 {
        return Err(Error::invalid(format!(
            "trace length {} is too short for max_lag {max_lag}",
            trace.len()
        )));
    }
    let c = Centered::new(trace)?;
    Ok((1..=max_lag).map(|t| c.rho(t)).collect())
}

/// `κ` and the truncation lag from a sequence `ρ_1, ρ_2, ...`.
///
/// Pairs `ρ_{2k−1} + ρ_{2k}` are summed while they stay positive.
pub fn kappa_from_acf(acf: &[f64]) -> (f64, usize) {
    let mut sum = 0.0;
    let mut m = 0;
    while m + 2 <= acf.len() {
        let pair = acf[m] + acf[m + 1];
        if !(pair > 0.0) {
            break;
        }
        sum += pair;
        m += 2;
    }
    ((1.0 + 2.0 * sum).max(1.0), m)
}

/// Integrated autocorrelation time `κ` and the truncation lag used.
pub fn integrated_autocorr_time(trace: &[f64]) -> Result<(f64, usize)> {
    let r = diagnose(trace)?;
    Ok((r.kappa, r.truncation_lag))
}

pub fn effective_sample_size(trace: &[f64]) -> Result<f64> {
    Ok(diagnose(trace)?.t_e)
}

/// `T_e(PX) / T_e(non-PX)`; above 1 means the PX sampler is more efficient.
pub fn relative_efficiency(trace_px: &[f64], trace_nonpx: &[f64]) -> Result<f64> {
    Ok(effective_sample_size(trace_px)? / effective_sample_size(trace_nonpx)?)
}

/// Full report for one scalar trace. Lags are computed lazily, only as far as
/// the truncation rule needs (and at least [`REPORT_ACF_LAGS`]).
pub fn diagnose(trace: &[f64]) -> Result<DiagnosticsReport> {
    let c = Centered::new(trace)?;
    let cap = lag_cap(trace.len());
    let mut acf: Vec<f64> = Vec::new();
    let mut sum = 0.0;
    let mut m = 0;
    while m + 2 <= cap {
        while acf.len() < m + 2 {
            acf.push(c.rho(acf.len() + 1));
        }
        let pair = acf[m] + acf[m + 1];
        if !(pair > 0.0) {
            break;
        }
        sum += pair;
        m += 2;
    }
    let report_len = REPORT_ACF_LAGS.max(m).min(cap);
    while acf.len() < report_len {
        acf.push(c.rho(acf.len() + 1));
    }
    acf.truncate(report_len.max(m));
    let kappa = (1.0 + 2.0 * sum).max(1.0);
    Ok(DiagnosticsReport {
        acf,
        kappa,
        t_e: trace.len() as f64 / kappa,
        trace_length: trace.len(),
        truncation_lag: m,
    })
}
