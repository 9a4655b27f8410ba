//! Gibbs samplers for sparse Bayesian normal-means models built on normal
//! scale mixtures (horseshoe, Bayesian lasso, truncated-normal local scales),
//! in both the standard and the parameter-expanded (PX) form.
//!
//! The crate is organised bottom-up:
//!
//! - [`distributions`]: seeded random streams and every primitive law the
//!   samplers draw from, including truncated laws sampled by CDF inversion.
//! - [`model`]: datasets, prior and sampler configuration, chain state, traces.
//! - [`gibbs`]: the conditional updates, the full sweep and [`gibbs::run_chain`].
//! - [`diagnostics`]: autocorrelation, integrated autocorrelation time,
//!   effective sample size and relative efficiency.
//! - [`experiments`]: data simulation and the efficiency comparisons.
//! - [`cli`]: the `pxshrink` command-line front end.
//!
//! ```
//! use pxshrink::experiments::{simulate_dataset, LambdaGen};
//! use pxshrink::gibbs::run_chain;
//! use pxshrink::model::{Parameterization, SamplerConfig};
//!
//! let sim = simulate_dataset(50, 2, 0.5, 1.0, LambdaGen::HalfCauchy, 7).unwrap();
//! let config = SamplerConfig {
//!     parameterization: Parameterization::Px,
//!     burn: 100,
//!     keep: 200,
//!     ..SamplerConfig::default()
//! };
//! let trace = run_chain(&sim.dataset, &config).unwrap();
//! assert_eq!(trace.tau.len(), 200);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod gibbs;
pub mod io;
pub mod model;

pub use error::{Error, Result};
