//! Small statistics kit: least squares, medians, bootstrap.

#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;
use rand::Rng as _;

use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (0 for exact fits or fewer than 3 points).
    pub slope_stderr: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - (slope * x + intercept);
                r * r
            })
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LinearFit { slope, intercept, slope_stderr })
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Linear-interpolation quantile, `q ∈ [0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let v = sorted(xs);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    v[lo] * (1.0 - w) + v[hi] * w
}

/// Drop the lowest and highest `fraction` of the values.
pub fn trimmed(xs: &[f64], fraction: f64) -> Vec<f64> {
    let v = sorted(xs);
    let k = (fraction * v.len() as f64).floor() as usize;
    if 2 * k >= v.len() {
        return v;
    }
    v[k..v.len() - k].to_vec()
}

/// Half-width of the central 95% bootstrap interval of the least-squares slope,
/// resampling `(x, y)` pairs.
pub fn bootstrap_slope_halfwidth(xs: &[f64], ys: &[f64], resamples: usize, seed: u64) -> f64 {
    let n = xs.len();
    if n < 3 {
        return 0.0;
    }
    let mut rng = rng::rng(seed);
    let mut slopes = Vec::with_capacity(resamples);
    let mut bx = Vec::with_capacity(n);
    let mut by = Vec::with_capacity(n);
    for _ in 0..resamples {
        bx.clear();
        by.clear();
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            bx.push(xs[i]);
            by.push(ys[i]);
        }
        if let Some(fit) = linear_fit(&bx, &by) {
            slopes.push(fit.slope);
        }
    }
    if slopes.is_empty() {
        return 0.0;
    }
    0.5 * (quantile(&slopes, 0.975) - quantile(&slopes, 0.025))
}
