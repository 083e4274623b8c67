//! Distances between an empirical spectral measure and the semicircle law.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::ensembles::{replicate_map, sample_spectrum, EnsembleSpec};
use crate::error::{invalid, Error, Result};
use crate::laws::{gamma_table, sc_cdf, sc_quantile, QuantileTable};
use crate::quadrature::GaussLegendre;
use crate::stats;

const NODES_PER_INTERVAL: usize = 16;
/// Number of geometric levels used in intervals touching p = 0 or p = 1.
const EDGE_LEVELS: usize = 40;

/// Uniform-weight measure on a sorted support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    support: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(mut support: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(invalid("empirical measure needs at least one point"));
        }
        if support.iter().any(|x| !x.is_finite()) {
            return Err(invalid("empirical measure support must be finite"));
        }
        support.sort_by(f64::total_cmp);
        Ok(Self { support })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// F_N(x) = #{j : lambda_j <= x} / N
    pub fn cdf(&self, x: f64) -> f64 {
        self.support.partition_point(|&l| l <= x) as f64 / self.len() as f64
    }

    /// Left-continuous generalised inverse of F_N.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let j = ((p * n as f64).ceil() as usize).clamp(1, n);
        self.support[j - 1]
    }
}

fn segments(a: f64, b: f64, grade_lo: bool, grade_hi: bool, out: &mut Vec<(f64, f64)>) {
    if grade_lo && grade_hi {
        let mid = 0.5 * (a + b);
        segments(a, mid, true, false, out);
        segments(mid, b, false, true, out);
    } else if grade_lo {
        let mut right = b;
        for _ in 0..EDGE_LEVELS {
            let left = a + 0.5 * (right - a);
            out.push((left, right));
            right = left;
        }
        out.push((a, right));
    } else if grade_hi {
        let mut left = a;
        for _ in 0..EDGE_LEVELS {
            let right = b - 0.5 * (b - left);
            out.push((left, right));
            left = right;
        }
        out.push((left, b));
    } else {
        out.push((a, b));
    }
}

/// Quadrature points (weight, G^{-1}(x)) for each interval [(j-1)/N, j/N].
#[derive(Debug)]
pub struct QuantileGrid {
    pub n: usize,
    intervals: Vec<Vec<(f64, f64)>>,
}

fn interval_segments(n: usize, j: usize) -> Vec<(f64, f64)> {
    let nf = n as f64;
    let mut segs = Vec::new();
    segments((j - 1) as f64 / nf, j as f64 / nf, j == 1, j == n, &mut segs);
    segs
}

impl QuantileGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("quantile grid needs N >= 1"));
        }
        let rule = GaussLegendre::new(NODES_PER_INTERVAL);
        let intervals = (1..=n)
            .map(|j| {
                let mut pts = Vec::new();
                for (a, b) in interval_segments(n, j) {
                    for (x, w) in rule.mapped(a, b) {
                        pts.push((w, sc_quantile(x)?));
                    }
                }
                Ok(pts)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, intervals })
    }

    /// Shared grid for size N, built on first use.
    pub fn cached(n: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuantileGrid>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(g) = cache.lock().expect("grid cache poisoned").get(&n) {
            return Ok(Arc::clone(g));
        }
        let grid = Arc::new(Self::new(n)?);
        cache.lock().expect("grid cache poisoned").insert(n, Arc::clone(&grid));
        Ok(grid)
    }
}

/// W_2^2(mu, semicircle) = sum_j int_{(j-1)/N}^{j/N} (lambda_j - G^{-1}(x))^2 dx.
pub fn w2_squared_to_semicircle(mu: &EmpiricalMeasure) -> Result<f64> {
    let grid = QuantileGrid::cached(mu.len())?;
    Ok(w2_squared_on_grid(mu, &grid))
}

pub fn w2_squared_on_grid(mu: &EmpiricalMeasure, grid: &QuantileGrid) -> f64 {
    let per: Vec<f64> = mu
        .support
        .iter()
        .zip(&grid.intervals)
        .map(|(&l, pts)| pts.iter().map(|&(w, q)| w * (l - q) * (l - q)).sum::<f64>())
        .collect();
    stats::pairwise_sum(&per)
}

/// Upper bound for W_2^2 from the locations gamma_j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct W2Decomposition {
    /// (2/N) sum (lambda_j - gamma_j)^2
    pub term1: f64,
    /// (2/N) sum (gamma_j - gamma_{j-1})^2 with gamma_0 = -2
    pub term2: f64,
    pub bound: f64,
}

pub fn w2_upper_bound_decomposition(mu: &EmpiricalMeasure, gammas: &QuantileTable) -> Result<W2Decomposition> {
    if gammas.n != mu.len() {
        return Err(Error::SizeMismatch { expected: gammas.n, actual: mu.len() });
    }
    let n = mu.len() as f64;
    let d1: Vec<f64> = mu.support.iter().enumerate().map(|(k, l)| (l - gammas.gamma(k + 1)).powi(2)).collect();
    let d2: Vec<f64> = (1..=gammas.n).map(|j| (gammas.gamma(j) - gammas.gamma(j - 1)).powi(2)).collect();
    let term1 = 2.0 / n * stats::pairwise_sum(&d1);
    let term2 = 2.0 / n * stats::pairwise_sum(&d2);
    Ok(W2Decomposition { term1, term2, bound: term1 + term2 })
}

/// W_1(mu, semicircle) = int_0^1 |F_N^{-1}(x) - G^{-1}(x)| dx, with each
/// interval split where the integrand changes sign.
pub fn w1_to_semicircle(mu: &EmpiricalMeasure) -> Result<f64> {
    let n = mu.len();
    let rule = GaussLegendre::new(NODES_PER_INTERVAL);
    let mut per = Vec::with_capacity(n);
    for (k, &l) in mu.support.iter().enumerate() {
        let j = k + 1;
        let kink = sc_cdf(l);
        let mut pieces = Vec::new();
        for (pa, pb) in interval_segments(n, j) {
            if kink > pa && kink < pb {
                pieces.push((pa, kink));
                pieces.push((kink, pb));
            } else {
                pieces.push((pa, pb));
            }
        }
        let mut acc = 0.0;
        for (pa, pb) in pieces {
            for (x, w) in rule.mapped(pa, pb) {
                acc += w * (l - sc_quantile(x)?).abs();
            }
        }
        per.push(acc);
    }
    Ok(stats::pairwise_sum(&per))
}

/// sup_x |F_N(x) - G(x)|, attained at the jumps of F_N.
pub fn kolmogorov_to_semicircle(mu: &EmpiricalMeasure) -> f64 {
    let nf = mu.len() as f64;
    mu.support
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let g = sc_cdf(l);
            ((k + 1) as f64 / nf - g).abs().max((k as f64 / nf - g).abs())
        })
        .fold(0.0, f64::max)
}

/// Exact W_2^2 between two empirical measures of equal size.
pub fn w2_squared_between(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch { expected: a.len(), actual: b.len() });
    }
    let d: Vec<f64> = a.support.iter().zip(&b.support).map(|(x, y)| (x - y) * (x - y)).collect();
    Ok(stats::pairwise_sum(&d) / a.len() as f64)
}

/// Per-sample W_2^2 values with their decomposition bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct W2Experiment {
    pub spec: EnsembleSpec,
    pub replicates: usize,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: Vec<f64>,
    pub bounds: Vec<W2Decomposition>,
    pub w1: Vec<f64>,
    pub kolmogorov: Vec<f64>,
}

impl W2Experiment {
    /// Index of the first sample whose W_2^2 exceeds its bound by more than 1e-9.
    pub fn first_violation(&self) -> Option<usize> {
        self.samples.iter().zip(&self.bounds).position(|(w, d)| *w > d.bound + 1e-9)
    }

    /// Index of the first sample with W_1 > sqrt(W_2^2).
    pub fn first_jensen_violation(&self) -> Option<usize> {
        self.samples.iter().zip(&self.w1).position(|(w2, w1)| *w1 > w2.sqrt() * (1.0 + 1e-9) + 1e-12)
    }
}

pub fn expected_w2_experiment(spec: &EnsembleSpec, replicates: usize, seed: u64) -> Result<W2Experiment> {
    if replicates < 100 {
        return Err(invalid(format!("W2 experiment needs R >= 100, got {replicates}")));
    }
    if spec.kind.is_covariance() {
        return Err(invalid("semicircle distances apply to Wigner ensembles"));
    }
    let grid = QuantileGrid::cached(spec.n)?;
    let gammas = gamma_table(spec.n)?;
    let rows = replicate_map(replicates, seed, |s| {
        let mu = EmpiricalMeasure::new(sample_spectrum(spec, s, spec.kind.has_fast_path())?.eigenvalues)?;
        Ok((
            w2_squared_on_grid(&mu, &grid),
            w2_upper_bound_decomposition(&mu, &gammas)?,
            w1_to_semicircle(&mu)?,
            kolmogorov_to_semicircle(&mu),
        ))
    })?;
    let samples: Vec<f64> = rows.iter().map(|r| r.0).collect();
    Ok(W2Experiment {
        spec: spec.clone(),
        replicates,
        seed,
        mean: stats::mean(&samples),
        stderr: stats::stderr_of_mean(&samples),
        bounds: rows.iter().map(|r| r.1).collect(),
        w1: rows.iter().map(|r| r.2).collect(),
        kolmogorov: rows.iter().map(|r| r.3).collect(),
        samples,
    })
}
