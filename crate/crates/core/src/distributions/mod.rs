//! Seeded random streams and the primitive laws used by the samplers.
//!
//! Every sampler takes an explicit [`RngStream`]; there is no global or
//! thread-local generator anywhere in the crate. Truncated laws are drawn by
//! inverting the CDF, and each has a pure `*_from_uniform` counterpart so the
//! inversion arithmetic can be checked against fixed uniforms.

pub mod special;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, InverseGaussian, Open01, StandardNormal};

use crate::error::{Error, Result};

/// A deterministic stream of random variates.
///
/// One stream belongs to one chain. Parallel work derives its own streams
/// with [`RngStream::derive`].
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for a sub-task identified by `path` under `master`.
    pub fn derive(master: u64, path: &[u64]) -> Self {
        Self::new(derive_seed(master, path))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on the open interval (0, 1).
    pub fn open_uniform(&mut self) -> f64 {
        Open01.sample(&mut self.rng)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn standard_exponential(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Mixes a master seed with a path of indices (splitmix64 finalizer per step).
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ 0x5851_f42d_4c95_7f2d);
    for (depth, &idx) in path.iter().enumerate() {
        h = splitmix64(h ^ splitmix64(idx.wrapping_add((depth as u64 + 1) << 56)));
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Result of a truncated draw. `fallback` is set when the inversion could not
/// be carried out and the left-tail power-law approximation was used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedDraw {
    pub value: f64,
    pub fallback: bool,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {v}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn check_upper(upper: f64) -> Result<()> {
    if upper > 0.0 && !upper.is_nan() {
        Ok(())
    } else {
        Err(Error::invalid(format!("upper bound must be > 0, got {upper}")))
    }
}

// Largest double strictly below `upper`.
fn below(upper: f64) -> f64 {
    f64::from_bits(upper.to_bits() - 1)
}

fn inside(x: f64, upper: f64) -> f64 {
    if x >= upper {
        below(upper)
    } else if x <= 0.0 {
        f64::MIN_POSITIVE.min(below(upper))
    } else {
        x
    }
}

pub fn sample_normal(stream: &mut RngStream, mean: f64, sd: f64) -> Result<f64> {
    check_finite("mean", mean)?;
    check_finite("sd", sd)?;
    if sd < 0.0 {
        return Err(Error::invalid(format!("sd must be >= 0, got {sd}")));
    }
    if sd == 0.0 {
        return Ok(mean);
    }
    Ok(mean + sd * stream.standard_normal())
}

/// Gamma with the given shape and *rate* (mean `shape / rate`).
pub fn sample_gamma(stream: &mut RngStream, shape: f64, rate: f64) -> Result<f64> {
    check_positive("shape", shape)?;
    check_positive("rate", rate)?;
    if shape == 1.0 {
        return Ok(stream.standard_exponential() / rate);
    }
    let g = Gamma::new(shape, 1.0).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(g.sample(stream) / rate)
}

/// Reciprocal of a Gamma(shape, rate) draw.
pub fn sample_inverse_gamma(stream: &mut RngStream, shape: f64, rate: f64) -> Result<f64> {
    Ok(1.0 / sample_gamma(stream, shape, rate)?)
}

pub fn sample_exponential(stream: &mut RngStream, rate: f64) -> Result<f64> {
    check_positive("rate", rate)?;
    Ok(stream.standard_exponential() / rate)
}

/// Gamma(shape, rate) conditioned on `(0, upper)`, by inversion of the CDF at
/// a uniform fraction `frac` of `F(upper)`. Works in log space so that bounds
/// with `F(upper)` far below the smallest double are still inverted exactly;
/// the power-law fallback `upper * frac^(1/shape)` is only reached when even
/// `ln F(upper)` is not representable.
pub fn truncated_gamma_from_uniform(shape: f64, rate: f64, upper: f64, frac: f64) -> TruncatedDraw {
    let upper_std = upper * rate;
    let ln_cdf_upper = special::ln_gamma_p(shape, upper_std);
    if !ln_cdf_upper.is_finite() && ln_cdf_upper != 0.0 {
        let value = inside(upper * frac.powf(1.0 / shape), upper);
        return TruncatedDraw { value, fallback: true };
    }
    let ln_target = frac.ln() + ln_cdf_upper;
    let x = special::inverse_ln_gamma_p(shape, ln_target, upper_std) / rate;
    TruncatedDraw {
        value: inside(x, upper),
        fallback: false,
    }
}

pub fn sample_truncated_gamma(
    stream: &mut RngStream,
    shape: f64,
    rate: f64,
    upper: f64,
) -> Result<TruncatedDraw> {
    check_positive("shape", shape)?;
    check_positive("rate", rate)?;
    check_upper(upper)?;
    if upper.is_infinite() {
        return Ok(TruncatedDraw {
            value: sample_gamma(stream, shape, rate)?,
            fallback: false,
        });
    }
    let frac = stream.open_uniform();
    Ok(truncated_gamma_from_uniform(shape, rate, upper, frac))
}

/// Exponential(rate) conditioned on `(0, upper)` at uniform fraction `frac`.
pub fn truncated_exponential_from_uniform(rate: f64, upper: f64, frac: f64) -> f64 {
    // F(upper) = 1 - exp(-rate * upper), kept accurate for tiny rate * upper.
    let cdf_upper = -(-rate * upper).exp_m1();
    let x = -(-frac * cdf_upper).ln_1p() / rate;
    if upper.is_finite() {
        inside(x, upper)
    } else {
        x
    }
}

pub fn sample_truncated_exponential(stream: &mut RngStream, rate: f64, upper: f64) -> Result<f64> {
    check_positive("rate", rate)?;
    check_upper(upper)?;
    let frac = stream.open_uniform();
    Ok(truncated_exponential_from_uniform(rate, upper, frac))
}

/// Uniform on `(0, upper)`; the rate-zero limit of the truncated exponential.
pub fn sample_truncated_flat(stream: &mut RngStream, upper: f64) -> Result<f64> {
    check_positive("upper", upper)?;
    Ok(inside(upper * stream.open_uniform(), upper))
}

/// Switch point (in standard deviations) between inversion and rejection.
const TRUNC_NORMAL_INVERSION_LIMIT: f64 = 8.0;

/// N(mean, var) conditioned on `(0, inf)`.
///
/// Inversion when the truncation point lies within 8 sd of the mean;
/// otherwise rejection (exponential proposal in the far upper tail, plain
/// normal proposals when the truncated mass is negligible).
pub fn sample_truncated_normal_positive(stream: &mut RngStream, mean: f64, var: f64) -> Result<f64> {
    check_finite("mean", mean)?;
    check_positive("var", var)?;
    let sd = var.sqrt();
    let alpha = -mean / sd;
    loop {
        let z = if alpha > TRUNC_NORMAL_INVERSION_LIMIT {
            // Robert (1995) optimal exponential proposal.
            let rate = 0.5 * (alpha + (alpha * alpha + 4.0).sqrt());
            loop {
                let z = alpha + stream.standard_exponential() / rate;
                let d = z - rate;
                if stream.open_uniform() <= (-0.5 * d * d).exp() {
                    break z;
                }
            }
        } else if alpha < -TRUNC_NORMAL_INVERSION_LIMIT {
            stream.standard_normal()
        } else {
            let tail = special::normal_sf(alpha);
            special::normal_isf(stream.open_uniform() * tail)
        };
        let x = sd * (z - alpha);
        if x > 0.0 && x.is_finite() {
            return Ok(x);
        }
    }
}

pub fn sample_half_cauchy(stream: &mut RngStream, scale: f64) -> Result<f64> {
    check_positive("scale", scale)?;
    Ok(scale * (std::f64::consts::FRAC_PI_2 * stream.open_uniform()).tan())
}

/// Inverse Gaussian (Wald) with the given mean and shape, via the
/// Michael–Schucany–Haas transformation.
pub fn sample_inverse_gaussian(stream: &mut RngStream, mean: f64, shape: f64) -> Result<f64> {
    check_positive("mean", mean)?;
    check_positive("shape", shape)?;
    let ig = InverseGaussian::new(mean, shape).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(ig.sample(stream))
}
