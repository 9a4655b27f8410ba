use super::*;
use crate::distributions::truncated_exponential_from_uniform;
use crate::model::{build_dataset, Expansion};
use statrs::distribution::{ContinuousCDF, Normal as NormalLaw};

// Composite Simpson on [lo, hi] with an even number of panels.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut acc = f(lo) + f(hi);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h);
    }
    acc * h / 3.0
}

/// Mean and variance of an unnormalized 1-D density by quadrature.
fn quadrature_moments(density: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let z = simpson(&density, lo, hi, 20_000);
    let m = simpson(|x| x * density(x), lo, hi, 20_000) / z;
    let v = simpson(|x| (x - m).powi(2) * density(x), lo, hi, 20_000) / z;
    (m, v)
}

fn gauss(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v)
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn state_with(p: usize, px: bool) -> ChainState {
    let cfg = SamplerConfig {
        parameterization: if px { Parameterization::Px } else { Parameterization::NonPx },
        ..Default::default()
    };
    ChainState::initial(p, &cfg)
}

#[test]
fn beta_zero_when_tau_zero() {
    let data = build_dataset(&[vec![3.0, 1.0], vec![-2.0, 5.0]]).unwrap();
    let mut state = state_with(2, false);
    state.tau = 0.0;
    let mut s = RngStream::new(1);
    update_beta_block(&mut state, &data, &mut s).unwrap();
    assert_eq!(state.beta, vec![0.0, 0.0]);
    assert_eq!(state.theta, vec![0.0, 0.0]);
}

#[test]
fn beta_conditional_matches_quadrature() {
    // N(ȳ | β, σ²/n) N(β | 0, σ² a)
    for &(a, n, sigma2, ybar) in &[(1.0, 1.0, 1.0, 2.0), (1.0, 99.0, 1.0, 1.0), (0.3, 3.0, 2.0, -1.5)] {
        let (qm, qv) = quadrature_moments(
            |b| gauss(ybar, b, sigma2 / n) * gauss(b, 0.0, sigma2 * a),
            -20.0,
            20.0,
        );
        let (m, v) = beta_conditional(a, n, sigma2, ybar);
        assert!((m - qm).abs() < 1e-8, "mean {m} vs {qm}");
        assert!((v - qv).abs() < 1e-8, "var {v} vs {qv}");
    }
    assert_eq!(beta_conditional(1.0, 1.0, 1.0, 2.0), (1.0, 0.5));
    assert!((beta_conditional(1.0, 99.0, 1.0, 1.0).0 - 0.99).abs() < 1e-15);
}

#[test]
fn beta_block_draws_have_conditional_moments() {
    let data = build_dataset(&[vec![2.0]]).unwrap();
    let mut state = state_with(1, false);
    let mut s = RngStream::new(2);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| {
            update_beta_block(&mut state, &data, &mut s).unwrap();
            state.beta[0]
        })
        .collect();
    let (m, v) = mean_var(&draws);
    assert!((m - 1.0).abs() < 4.0 * (0.5f64 / 1e5).sqrt());
    assert!((v - 0.5).abs() < 0.01);
}

#[test]
fn rss_modes() {
    // n = 1: (I + aJ)^-1 is 1/(1+a), both modes agree.
    let data = build_dataset(&[vec![1.5], vec![-0.4], vec![2.0]]).unwrap();
    let mut state = state_with(3, false);
    state.tau = 0.7;
    state.lambda = vec![0.5, 2.0, 1.3];
    let exact = residual_sum_of_squares(&state, &data, Sigma2Mode::ExactMarginal);
    let compat = residual_sum_of_squares(&state, &data, Sigma2Mode::AppendixCompat);
    assert!((exact - compat).abs() < 1e-12);

    // p = 1, n = 2, y = (1, 1), a = 1: y'(I + J)^-1 y = 2 - 4/3.
    let data = build_dataset(&[vec![1.0, 1.0]]).unwrap();
    let mut state = state_with(1, false);
    state.tau = 1.0;
    let exact = residual_sum_of_squares(&state, &data, Sigma2Mode::ExactMarginal);
    assert!((exact - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(residual_sum_of_squares(&state, &data, Sigma2Mode::AppendixCompat), 1.0);

    // tau = 0: no shrinkage, RSS = Σ y² = 1 + 4 + 9 + 0.25.
    let data = build_dataset(&[vec![1.0, 2.0], vec![-3.0, 0.5]]).unwrap();
    let mut state = state_with(2, false);
    state.tau = 0.0;
    for mode in [Sigma2Mode::ExactMarginal, Sigma2Mode::AppendixCompat] {
        assert!((residual_sum_of_squares(&state, &data, mode) - 14.25).abs() < 1e-12);
    }
}

#[test]
fn rss_exact_matches_matrix_quadratic_form() {
    // Direct y'(I + aJ)^-1 y via Sherman–Morrison for a random row.
    let mut s = RngStream::new(3);
    let n = 4;
    let rows: Vec<Vec<f64>> = (0..5).map(|_| (0..n).map(|_| s.standard_normal() * 3.0).collect()).collect();
    let data = build_dataset(&rows).unwrap();
    let mut state = state_with(5, false);
    state.tau = 0.8;
    state.lambda = vec![0.1, 1.0, 3.0, 0.5, 2.0];
    let direct: f64 = rows
        .iter()
        .zip(&state.lambda)
        .map(|(r, l)| {
            let a = 0.64 * l * l;
            let sum: f64 = r.iter().sum();
            r.iter().map(|v| v * v).sum::<f64>() - a / (1.0 + n as f64 * a) * sum * sum
        })
        .sum();
    let exact = residual_sum_of_squares(&state, &data, Sigma2Mode::ExactMarginal);
    assert!((exact - direct).abs() < 1e-10 * direct);
}

#[test]
fn sigma2_rejects_zero_rss() {
    let data = build_dataset(&[vec![0.0], vec![0.0]]).unwrap();
    let mut state = state_with(2, false);
    let mut s = RngStream::new(0);
    assert!(matches!(
        update_sigma2(&mut state, &data, &mut s, Sigma2Mode::ExactMarginal),
        Err(Error::DegenerateState(_))
    ));
}

#[test]
fn tau_slice_inversion_arithmetic() {
    // p = 1, θ = 2: shape 1, rate 2; η = 1 so u ∈ (0, 1/2), u = 0.25 gives bound 3.
    let draw = slice_gamma_step(1.0, 2.0, 0.25, 0.5);
    let expected = -(1.0 - 0.5 * (1.0 - (-6.0f64).exp())).ln() / 2.0;
    assert!((draw.value - expected).abs() < 1e-12);
    assert!((draw.value - 0.345336).abs() < 1e-6);
    assert!((1.0 / draw.value.sqrt() - 1.70169).abs() < 1e-5);
    // u near 0: bound huge, so the draw is an unconstrained Exp(2) quantile.
    let draw = slice_gamma_step(1.0, 2.0, 1e-300, 0.5);
    assert!((draw.value - std::f64::consts::LN_2 / 2.0).abs() < 1e-12);
}

#[test]
fn tau_slice_rejects_degenerate_and_px() {
    let mut state = state_with(1, false);
    let mut s = RngStream::new(0);
    assert!(matches!(update_tau_slice(&mut state, &mut s), Err(Error::DegenerateState(_))));
    let mut px = state_with(1, true);
    px.theta = vec![1.0];
    assert!(update_tau_slice(&mut px, &mut s).is_err());
}

#[test]
fn lambda_slice_inversion_arithmetic() {
    // μ² = 2 gives rate 1; η = 1 so u ∈ (0, 1/2), u = 0.25 gives bound 3.
    let eta = truncated_exponential_from_uniform(1.0, 3.0, 0.5);
    let expected = -(1.0 - 0.5 * (1.0 - (-3.0f64).exp())).ln();
    assert!((eta - expected).abs() < 1e-14);
    assert!((eta - 0.644560).abs() < 1e-6);
}

#[test]
fn lambda_slice_zero_mu_uses_flat_fallback() {
    let mut state = state_with(3, false);
    state.beta = vec![0.0, 1.0, 0.0];
    let mut s = RngStream::new(4);
    update_lambda_horseshoe_slice(&mut state, &mut s).unwrap();
    assert_eq!(state.numeric_events, 2);
    assert!(state.lambda.iter().all(|l| l.is_finite() && *l > 0.0));
    assert!(state.check_consistency(1e-12).is_ok());
}

#[test]
fn tau_px_prior_paths() {
    // Σθ² = 0 and λθ = 0: g² ~ IG((p+1)/2, 1/2), Δ ~ N(0, 1).
    let data = build_dataset(&[vec![0.3, 1.0], vec![2.0, -1.0], vec![0.0, 0.0]]).unwrap();
    let mut state = state_with(3, true);
    let mut s = RngStream::new(5);
    let mut precisions = Vec::new();
    let mut deltas = Vec::new();
    for _ in 0..20_000 {
        update_tau_px(&mut state, &data, &TauPrior::HalfCauchy, &mut s).unwrap();
        let e = state.expansion.unwrap();
        precisions.push(1.0 / (e.g * e.g));
        deltas.push(e.delta);
        assert_eq!(state.tau, e.delta.abs() * e.g);
    }
    // 1/g² ~ Gamma(2, 1/2): CDF 1 - e^{-x/2}(1 + x/2)
    let d = ks_statistic(precisions, |x| 1.0 - (-x / 2.0).exp() * (1.0 + x / 2.0));
    assert!(d < 0.02, "g ks={d}");
    let std = NormalLaw::new(0.0, 1.0).unwrap();
    let d = ks_statistic(deltas, |x| std.cdf(x));
    assert!(d < 0.02, "delta ks={d}");
}

#[test]
fn tau_px_delta_conditional() {
    // p = 1, n = 1, σ = 1, λθ = 1, ȳ = 2: Δ ~ N(1, 1/2).
    let data = build_dataset(&[vec![2.0]]).unwrap();
    let (qm, qv) = quadrature_moments(|d| gauss(2.0, d, 1.0) * gauss(d, 0.0, 1.0), -20.0, 20.0);
    assert!((qm - 1.0).abs() < 1e-8 && (qv - 0.5).abs() < 1e-8);
    let mut state = state_with(1, true);
    let mut s = RngStream::new(6);
    let deltas: Vec<f64> = (0..100_000)
        .map(|_| {
            state.theta = vec![1.0];
            state.lambda = vec![1.0];
            update_tau_px(&mut state, &data, &TauPrior::HalfCauchy, &mut s).unwrap();
            state.expansion.unwrap().delta
        })
        .collect();
    let (m, v) = mean_var(&deltas);
    assert!((m - qm).abs() < 4.0 * (qv / 1e5).sqrt());
    assert!((v - qv).abs() < 0.01);
}

#[test]
fn tau_px_noncentral_t_generalization() {
    // With p = 2, Σθ² = 1.5, λ = 0 (no likelihood for Δ):
    //   Δ ~ N(m, 1), g² ~ IG((a + p)/2, (b + Σθ²)/2).
    let (m, a, b) = (0.7, 3.0, 2.0);
    let prior = TauPrior::NoncentralT { m, a, b };
    let data = build_dataset(&[vec![1.0], vec![-1.0]]).unwrap();
    let mut state = state_with(2, true);
    let mut s = RngStream::new(7);
    let mut deltas = Vec::new();
    let mut prec = Vec::new();
    for _ in 0..50_000 {
        state.theta = vec![1.0, (0.5f64).sqrt()];
        state.lambda = vec![0.0, 0.0];
        update_tau_px(&mut state, &data, &prior, &mut s).unwrap();
        let e = state.expansion.unwrap();
        deltas.push(e.delta);
        prec.push(1.0 / (e.g * e.g));
    }
    let (dm, dv) = mean_var(&deltas);
    assert!((dm - m).abs() < 0.02 && (dv - 1.0).abs() < 0.03);
    // 1/g² ~ Gamma(2.5, 1.75): quadrature of the conjugate posterior
    // g^{-2(a/2+1)} e^{-b/(2g²)} Π N(θ_j | 0, g²) in x = 1/g².
    let post = |x: f64| x.powf(0.5 * a - 1.0) * (-0.5 * b * x).exp() * x * (-0.5 * 1.5 * x).exp();
    let (qm, qv) = quadrature_moments(post, 0.0, 60.0);
    let (pm, pv) = mean_var(&prec);
    assert!((pm - qm).abs() < 0.02 * qm, "{pm} vs {qm}");
    assert!((pv - qv).abs() < 0.05 * qv, "{pv} vs {qv}");
}

#[test]
fn lambda_aux_conditional_matches_quadrature() {
    // V = 1, n = 1, θ = 1, σ = 1, ȳ = 2: N(2 | λ, 1) N(λ | 0, 1) = N(1, 1/2).
    let (m, v) = lambda_aux_conditional(1.0, 1.0, 1.0, 2.0, 1.0);
    let (qm, qv) = quadrature_moments(|l| gauss(2.0, l, 1.0) * gauss(l, 0.0, 1.0), -20.0, 20.0);
    assert!((m - qm).abs() < 1e-8 && (v - qv).abs() < 1e-8);
    assert_eq!((m, v), (1.0, 0.5));
    // General case: likelihood ȳ ~ N(σ dt λ, σ²/n), prior N(0, V).
    let (vv, n, dt, ybar, sigma) = (2.5, 3.0, -0.4, 1.2, 1.7);
    let (m, v) = lambda_aux_conditional(vv, n, dt, ybar, sigma);
    let (qm, qv) = quadrature_moments(
        |l| gauss(ybar, sigma * dt * l, sigma * sigma / n) * gauss(l, 0.0, vv),
        -40.0,
        40.0,
    );
    assert!((m - qm).abs() < 1e-8 && (v - qv).abs() < 1e-8);
    // dt = 0: prior.
    assert_eq!(lambda_aux_conditional(3.0, 2.0, 0.0, 5.0, 1.0), (0.0, 3.0));
}

#[test]
fn lambda_aux_zero_theta_counts_events() {
    let data = build_dataset(&[vec![1.0], vec![2.0]]).unwrap();
    let mut state = state_with(2, false);
    let mut s = RngStream::new(8);
    update_lambda_horseshoe_aux(&mut state, &data, &mut s).unwrap();
    assert_eq!(state.numeric_events, 2);
    assert_eq!(state.beta, vec![0.0, 0.0]);
}

#[test]
fn lambda_truncnormal_conditional_matches_quadrature() {
    // n = 1, θ = 1, σ = 1, Δ = 1, ȳ = 2, v = 1: N(1.5, 1/2) before truncation.
    let (m, v) = lambda_truncnormal_conditional(1.0, 1.0, 1.0, 2.0, 1.0);
    assert!((m - 1.5).abs() < 1e-15 && (v - 0.5).abs() < 1e-15);
    let (qm, qv) = quadrature_moments(|l| gauss(2.0, l, 1.0) * gauss(l, 1.0, 1.0), -20.0, 20.0);
    assert!((m - qm).abs() < 1e-8 && (v - qv).abs() < 1e-8);
    // No data: prior N⁺(1, v).
    assert_eq!(lambda_truncnormal_conditional(0.3, 2.0, 0.0, 5.0, 1.0), (1.0, 0.3));
}

#[test]
fn lambda_truncnormal_small_v_pins_lambda() {
    let data = build_dataset(&[vec![3.0, 2.0], vec![-1.0, 0.5], vec![0.1, 0.2]]).unwrap();
    let mut state = state_with(3, true);
    state.theta = vec![2.0, -1.0, 0.1];
    let mut s = RngStream::new(9);
    update_lambda_truncnormal(&mut state, &data, &mut s, 1e-8).unwrap();
    assert!(state.lambda.iter().all(|l| (l - 1.0).abs() < 1e-3));
    assert!(state.check_consistency(1e-12).is_ok());
}

#[test]
fn lambda_truncnormal_prior_draw() {
    // θ = 0, v = 1: N⁺(1, 1). Mean = 1 + φ(1)/Φ(1).
    let std = NormalLaw::new(0.0, 1.0).unwrap();
    let expected = 1.0 + (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt() / std.cdf(1.0);
    let data = build_dataset(&[vec![1.0]]).unwrap();
    let mut state = state_with(1, false);
    let mut s = RngStream::new(10);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| {
            update_lambda_truncnormal(&mut state, &data, &mut s, 1.0).unwrap();
            state.lambda[0]
        })
        .collect();
    assert!(xs.iter().all(|&x| x > 0.0));
    assert!((mean_var(&xs).0 - expected).abs() < 0.01);
    assert_eq!(state.numeric_events, 100_000);
}

#[test]
fn lambda_lasso_paths() {
    let mut state = state_with(2, false);
    state.tau = 1.0;
    let mut s = RngStream::new(11);
    // β = (0, σ τ): μ = (0, 1).
    let mut prior_sq = Vec::new();
    let mut eta = Vec::new();
    for _ in 0..20_000 {
        state.beta = vec![0.0, 1.0];
        update_lambda_lasso(&mut state, &mut s).unwrap();
        prior_sq.push(state.lambda[0].powi(2));
        eta.push(1.0 / state.lambda[1].powi(2));
    }
    assert_eq!(state.numeric_events, 20_000);
    // λ² ~ Exp(1/2)
    let d = ks_statistic(prior_sq, |x| 1.0 - (-x / 2.0).exp());
    assert!(d < 0.02, "prior ks={d}");
    // 1/λ² ~ IG(mean 1, shape 1): F(x) = Φ(√(1/x)(x − 1)) + e² Φ(−√(1/x)(x + 1)).
    let std = NormalLaw::new(0.0, 1.0).unwrap();
    let ig_cdf = |x: f64| {
        let r = (1.0 / x).sqrt();
        std.cdf(r * (x - 1.0)) + (2.0f64).exp() * std.cdf(-r * (x + 1.0))
    };
    let d = ks_statistic(eta, ig_cdf);
    assert!(d < 0.02, "posterior ks={d}");
}

fn small_data(seed: u64) -> Dataset {
    let sim = crate::experiments::simulate_dataset(
        25,
        3,
        0.3,
        1.0,
        crate::experiments::LambdaGen::HalfCauchy,
        seed,
    )
    .unwrap();
    sim.dataset
}

fn all_configs() -> Vec<SamplerConfig> {
    let mut out = Vec::new();
    for parameterization in [Parameterization::NonPx, Parameterization::Px] {
        for lambda_prior in [
            LambdaPrior::Horseshoe,
            LambdaPrior::TruncNormal { v: 0.25 },
            LambdaPrior::DoubleExponential,
            LambdaPrior::FixedOne,
        ] {
            for horseshoe_update in [HorseshoeUpdate::Auxiliary, HorseshoeUpdate::Slice] {
                for sigma2_mode in [Sigma2Mode::ExactMarginal, Sigma2Mode::AppendixCompat] {
                    out.push(SamplerConfig {
                        parameterization,
                        lambda_prior,
                        horseshoe_update,
                        sigma2_mode,
                        burn: 50,
                        keep: 100,
                        ..Default::default()
                    });
                }
            }
        }
    }
    out
}

#[test]
fn sweeps_preserve_state_invariants() {
    let data = small_data(12);
    for cfg in all_configs() {
        let mut state = ChainState::initial(data.p(), &cfg);
        let mut s = RngStream::new(13);
        for _ in 0..300 {
            sweep(&mut state, &data, &cfg, &mut s).unwrap();
            if let Err(e) = state.check_consistency(1e-10) {
                panic!("{cfg:?}: {e}");
            }
            if cfg.lambda_prior == LambdaPrior::FixedOne {
                assert!(state.lambda.iter().all(|&l| l == 1.0));
            }
        }
        assert_eq!(state.iteration, 300);
    }
}

#[test]
fn px_trace_satisfies_tau_identity_exactly() {
    let data = small_data(14);
    let cfg = SamplerConfig {
        parameterization: Parameterization::Px,
        burn: 10,
        keep: 500,
        ..Default::default()
    };
    let trace = run_chain(&data, &cfg).unwrap();
    let (d, g) = (trace.delta.as_ref().unwrap(), trace.g.as_ref().unwrap());
    for k in 0..trace.len() {
        assert_eq!(trace.tau[k], d[k].abs() * g[k]);
    }
}

#[test]
fn run_chain_lengths_and_determinism() {
    let data = small_data(15);
    let cfg = SamplerConfig {
        burn: 20,
        keep: 1,
        ..Default::default()
    };
    let t = run_chain(&data, &cfg).unwrap();
    assert_eq!((t.tau.len(), t.sigma2.len()), (1, 1));

    let cfg = SamplerConfig {
        burn: 30,
        keep: 40,
        thin: 3,
        store_vectors: true,
        parameterization: Parameterization::Px,
        ..Default::default()
    };
    let a = run_chain(&data, &cfg).unwrap();
    let b = run_chain(&data, &cfg).unwrap();
    assert_eq!(a.tau, b.tau);
    assert_eq!(a.sigma2, b.sigma2);
    assert_eq!(a.beta, b.beta);
    assert_eq!(a.lambda, b.lambda);
    assert_eq!(a.len(), 40);
    assert_eq!(a.beta.as_ref().unwrap().len(), 40);
    assert_eq!(a.lambda_abs_mean().unwrap().len(), data.p());

    // Thinning keeps every third post-burn-in sweep of the same chain.
    let unthinned = run_chain(
        &data,
        &SamplerConfig {
            thin: 1,
            keep: 120,
            ..cfg.clone()
        },
    )
    .unwrap();
    for k in 0..40 {
        assert_eq!(a.tau[k], unthinned.tau[3 * k + 2]);
    }
}

#[test]
fn recorded_draws_match_manual_sweeps() {
    let data = small_data(16);
    let cfg = SamplerConfig {
        burn: 5,
        keep: 5,
        ..Default::default()
    };
    let trace = run_chain(&data, &cfg).unwrap();
    let mut state = ChainState::initial(data.p(), &cfg);
    let mut s = RngStream::new(cfg.seed);
    for _ in 0..5 {
        sweep(&mut state, &data, &cfg, &mut s).unwrap();
    }
    for k in 0..5 {
        sweep(&mut state, &data, &cfg, &mut s).unwrap();
        assert_eq!(trace.tau[k], state.tau);
        assert_eq!(trace.sigma2[k], state.sigma2);
    }
}

#[test]
fn global_only_reduction() {
    // FixedOne never touches λ, so the NonPX sweep is the global sampler: the
    // β block, σ², τ by slicing. Replaying those steps by hand agrees.
    let data = small_data(17);
    let cfg = SamplerConfig {
        lambda_prior: LambdaPrior::FixedOne,
        ..Default::default()
    };
    let mut a = ChainState::initial(data.p(), &cfg);
    let mut b = a.clone();
    let mut sa = RngStream::new(3);
    let mut sb = RngStream::new(3);
    for _ in 0..50 {
        sweep(&mut a, &data, &cfg, &mut sa).unwrap();
        update_sigma2(&mut b, &data, &mut sb, Sigma2Mode::ExactMarginal).unwrap();
        update_beta_block(&mut b, &data, &mut sb).unwrap();
        update_tau_slice(&mut b, &mut sb).unwrap();
        assert_eq!(a.tau, b.tau);
        assert_eq!(a.beta, b.beta);
    }

    let cfg = SamplerConfig {
        parameterization: Parameterization::Px,
        ..cfg
    };
    let mut a = ChainState::initial(data.p(), &cfg);
    let mut b = a.clone();
    let mut sa = RngStream::new(3);
    let mut sb = RngStream::new(3);
    for _ in 0..50 {
        sweep(&mut a, &data, &cfg, &mut sa).unwrap();
        update_sigma2(&mut b, &data, &mut sb, Sigma2Mode::ExactMarginal).unwrap();
        update_beta_block(&mut b, &data, &mut sb).unwrap();
        update_tau_px(&mut b, &data, &TauPrior::HalfCauchy, &mut sb).unwrap();
        assert_eq!(a.tau, b.tau);
        assert_eq!(a.expansion, b.expansion);
    }
}

#[test]
fn divergence_reports_iteration_and_partial_trace() {
    let data = small_data(18);
    let cfg = SamplerConfig {
        burn: 2,
        keep: 10,
        ..Default::default()
    };
    let mut state = ChainState::initial(data.p(), &cfg);
    state.iteration = 7;
    state.beta[3] = f64::NAN;
    match check_finite(&state) {
        Err(Error::ChainDiverged { iteration, .. }) => assert_eq!(iteration, 7),
        other => panic!("expected divergence, got {other:?}"),
    }

    // A dataset of zeros makes σ² improper on the first sweep.
    let zeros = build_dataset(&vec![vec![0.0; 2]; 4]).unwrap();
    match run_chain(&zeros, &cfg) {
        Err(Error::ChainDiverged { iteration, partial, .. }) => {
            assert_eq!(iteration, 1);
            assert!(partial.is_empty());
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let data = small_data(19);
    let cfg = SamplerConfig {
        keep: 0,
        ..Default::default()
    };
    assert!(matches!(run_chain(&data, &cfg), Err(Error::InvalidConfig(_))));
}

#[test]
fn px_state_has_expected_shape() {
    let s = state_with(2, true);
    assert_eq!(s.expansion, Some(Expansion { delta: 1.0, g: 1.0 }));
}
