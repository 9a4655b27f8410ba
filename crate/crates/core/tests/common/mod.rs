#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

/// Two-sided Kolmogorov–Smirnov distance between a sample and a CDF.
pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// CDF of an unnormalised density on `[lo, hi]`, tabulated by composite
/// Simpson quadrature on `cells` panels and interpolated linearly.
pub struct QuadratureCdf {
    lo: f64,
    step: f64,
    cum: Vec<f64>,
}

impl QuadratureCdf {
    pub fn new(density: impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> Self {
        let step = (hi - lo) / cells as f64;
        let mut cum = Vec::with_capacity(cells + 1);
        cum.push(0.0);
        let mut total = 0.0;
        for k in 0..cells {
            let a = lo + k as f64 * step;
            let b = a + step;
            total += step / 6.0 * (density(a) + 4.0 * density(0.5 * (a + b)) + density(b));
            cum.push(total);
        }
        for c in &mut cum {
            *c /= total;
        }
        Self { lo, step, cum }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let t = (x - self.lo) / self.step;
        if t <= 0.0 {
            return 0.0;
        }
        let k = t.floor() as usize;
        if k + 1 >= self.cum.len() {
            return 1.0;
        }
        let w = t - k as f64;
        self.cum[k] * (1.0 - w) + self.cum[k + 1] * w
    }
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

pub fn pxshrink(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pxshrink"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to launch pxshrink")
}

/// Every regular file in `dir` with its contents, sorted by name.
pub fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}
