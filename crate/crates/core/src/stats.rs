//! Summary statistics with a fixed reduction order.
//!
//! All sums go through [`pairwise_sum`], whose reduction tree depends only on
//! the slice length, so aggregates are bit-identical however the per-replicate
//! values were produced.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance (divisor n - 1).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() - 1) as f64
}

pub fn stderr_of_mean(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

pub type Statistic = dyn Fn(&[f64]) -> f64;

/// Bootstrap standard errors for several statistics of the same sample.
///
/// Each resample draws indices with replacement from a stream seeded by
/// `seed`; the returned value for statistic `k` is the sample standard
/// deviation of its `resamples` replicate values.
pub fn bootstrap_stderr(
    xs: &[f64],
    resamples: usize,
    seed: u64,
    stats: &[&Statistic],
) -> Vec<f64> {
    let n = xs.len();
    let mut rng = rng_from_seed(seed);
    let mut buf = vec![0.0; n];
    let mut reps: Vec<Vec<f64>> = vec![Vec::with_capacity(resamples); stats.len()];
    for _ in 0..resamples {
        for slot in buf.iter_mut() {
            *slot = xs[rng.random_range(0..n)];
        }
        for (k, stat) in stats.iter().enumerate() {
            reps[k].push(stat(&buf));
        }
    }
    reps.iter().map(|r| variance(r).sqrt()).collect()
}

/// Wilson score interval upper limit for `successes / trials` at z (1.96 for 95%).
pub fn wilson_upper(successes: usize, trials: usize, z: f64) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre + spread) / (1.0 + z2 / n)).min(1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic sup |F_a - F_b|.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous cdf.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn ks_vs_standard_normal(xs: &[f64]) -> f64 {
    ks_one_sample(xs, standard_normal_cdf)
}

/// Model used by [`ScalingFit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// value = A * N^slope
    PurePower,
    /// value = A * log(N) * N^slope
    PowerWithLog,
}

/// Log-log least-squares fit of a value against N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub points: Vec<(f64, f64)>,
    pub model: FitModel,
    pub slope: f64,
    pub intercept: f64,
    /// exp(intercept)
    pub prefactor: f64,
    pub r2: f64,
    pub residuals: Vec<f64>,
}

impl ScalingFit {
    pub fn fit(points: &[(f64, f64)], model: FitModel) -> Result<Self> {
        if points.len() < 3 {
            return Err(invalid(format!(
                "scaling fit needs at least 3 points, got {}",
                points.len()
            )));
        }
        let mut xs = Vec::with_capacity(points.len());
        let mut ys = Vec::with_capacity(points.len());
        for &(n, v) in points {
            if !(n > 1.0 && v > 0.0) {
                return Err(invalid(format!("non-positive fit point ({n}, {v})")));
            }
            xs.push(n.ln());
            ys.push(match model {
                FitModel::PurePower => v.ln(),
                FitModel::PowerWithLog => (v / n.ln()).ln(),
            });
        }
        let (slope, intercept) = ols(&xs, &ys);
        let residuals: Vec<f64> = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| y - (intercept + slope * x))
            .collect();
        let ybar = mean(&ys);
        let ss_tot: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
        let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
        let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
        Ok(Self {
            points: points.to_vec(),
            model,
            slope,
            intercept,
            prefactor: intercept.exp(),
            r2,
            residuals,
        })
    }
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let xbar = mean(xs);
    let ybar = mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - xbar) * (y - ybar);
        sxx += (x - xbar) * (x - xbar);
    }
    let slope = sxy / sxx;
    (slope, ybar - slope * xbar)
}

/// max / min of a positive series.
pub fn spread_ratio(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law_slope() {
        let pts: Vec<(f64, f64)> = [64.0f64, 128.0, 256.0].iter().map(|&n| (n, n.powi(-2))).collect();
        let fit = ScalingFit::fit(&pts, FitModel::PurePower).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_with_log_recovers_unit_prefactor() {
        let pts: Vec<(f64, f64)> =
            [64.0f64, 128.0, 256.0, 512.0].iter().map(|&n| (n, n.ln() / (n * n))).collect();
        let fit = ScalingFit::fit(&pts, FitModel::PowerWithLog).unwrap();
        assert!((fit.prefactor - 1.0).abs() < 1e-10);
        assert!((fit.slope + 2.0).abs() < 1e-10);
    }

    #[test]
    fn short_grid_is_refused() {
        assert!(ScalingFit::fit(&[(2.0, 1.0), (4.0, 0.5)], FitModel::PurePower).is_err());
    }

    #[test]
    fn wilson_limits() {
        assert!(wilson_upper(0, 100, 1.96) > 0.0);
        assert!(wilson_upper(0, 100, 1.96) < 0.05);
        assert!(wilson_upper(50, 100, 1.96) > 0.5);
        assert!((wilson_upper(100, 100, 1.96) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_statistics() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
        // single point at the median of the uniform cdf
        let d = ks_one_sample(&[0.5], |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn pairwise_sum_is_accurate(xs in proptest::collection::vec(-1e3f64..1e3, 0..500)) {
            let naive: f64 = xs.iter().sum();
            prop_assert!((pairwise_sum(&xs) - naive).abs() <= 1e-9 * (1.0 + naive.abs()));
        }

        #[test]
        fn variance_is_shift_invariant(xs in proptest::collection::vec(-10f64..10.0, 2..100), s in -5f64..5.0) {
            let shifted: Vec<f64> = xs.iter().map(|x| x + s).collect();
            prop_assert!((variance(&xs) - variance(&shifted)).abs() < 1e-9);
        }
    }
}
