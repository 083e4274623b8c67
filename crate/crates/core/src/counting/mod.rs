//! The GUE eigenvalue counting function N_t through its determinantal kernel.
//!
//! Restricted to (-inf, t], the kernel is a finite-rank positive operator
//! with spectrum in [0, 1]; N_t is distributed as a sum of independent
//! Bernoulli variables with those eigenvalues as success probabilities.

mod bounds;
mod kernel;

pub use bounds::{
    bernstein_bound, counting_deviation_bound, eigenvalue_deviation_bound_bulk,
    eigenvalue_deviation_bound_intermediate, goe_counting_bound, intermediate_bound_at_log_gap,
    intermediate_constant, intermediate_scale,
};
pub use kernel::{kernel_eval, scaled_oscillators, KernelConfig, KernelModel};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::ensembles::{real_symmetric_eigenvalues, replicate_map, SymmetricMatrix};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Largest magnitude by which a Nystrom eigenvalue may leave [0, 1].
pub const CLAMP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingStats {
    pub t: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliRepresentation {
    pub probabilities: Vec<f64>,
}

impl BernoulliRepresentation {
    pub fn mean(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn variance(&self) -> f64 {
        self.probabilities.iter().map(|p| p * (1.0 - p)).sum()
    }
}

/// E[N_t] = integral of K(x, x) over [-2 - delta, t].
pub fn counting_mean(model: &KernelModel, t: f64) -> Result<f64> {
    model.check_in_window(t)?;
    let rule = model.rule_up_to(t);
    let mut f = vec![0.0; model.n];
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| {
            scaled_oscillators(model.n, x, &mut f);
            w * f.iter().map(|v| v * v).sum::<f64>()
        })
        .sum())
}

/// Gram matrix G_kl = integral over [lo, t] of f_k f_l, lower triangle filled.
///
/// With F_ik = sqrt(w_i) f_k(x_i), G = F^T F and the Nystrom matrix
/// A_ij = sqrt(w_i w_j) K(x_i, x_j) = F F^T share their nonzero spectrum.
fn restricted_gram(model: &KernelModel, t: f64) -> SymmetricMatrix {
    let n = model.n;
    let rule = model.rule_up_to(t);
    let mut g = SymmetricMatrix::zeros(n);
    let mut f = vec![0.0; n];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        scaled_oscillators(n, x, &mut f);
        for k in 0..n {
            let s = w * f[k];
            if s == 0.0 {
                continue;
            }
            let row = &mut g.data[k * n..k * n + k + 1];
            for (r, fl) in row.iter_mut().zip(&f[..=k]) {
                *r += s * fl;
            }
        }
    }
    for k in 0..n {
        for l in 0..k {
            g.data[l * n + k] = g.data[k * n + l];
        }
    }
    g
}

/// Nystrom matrix on the nodes of [lo, t] (used when there are fewer nodes than N).
fn nystrom_matrix(model: &KernelModel, t: f64) -> SymmetricMatrix {
    let n = model.n;
    let rule = model.rule_up_to(t);
    let m = rule.len();
    let rows: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| {
            let mut f = vec![0.0; n];
            scaled_oscillators(n, x, &mut f);
            let sw = w.sqrt();
            f.iter_mut().for_each(|v| *v *= sw);
            f
        })
        .collect();
    let mut a = SymmetricMatrix::zeros(m);
    for i in 0..m {
        for j in 0..=i {
            let v: f64 = rows[i].iter().zip(&rows[j]).map(|(p, q)| p * q).sum();
            a.set_sym(i, j, v);
        }
    }
    a
}

/// Var(N_t) = integral of K(x,x) - double integral of K(x,y)^2 over (-inf, t]^2,
/// both truncated to the window; clamped at 0.
pub fn counting_variance(model: &KernelModel, t: f64) -> Result<f64> {
    model.check_in_window(t)?;
    let g = restricted_gram(model, t);
    let n = model.n;
    let trace: f64 = (0..n).map(|k| g.data[k * n + k]).sum();
    let frob: f64 = g.data.iter().map(|v| v * v).sum();
    let var = trace - frob;
    if var < -1e-8 {
        return Err(Error::NumericGuard(format!("counting variance {var:e} is negative")));
    }
    Ok(var.max(0.0))
}

pub fn counting_stats(model: &KernelModel, t: f64) -> Result<CountingStats> {
    Ok(CountingStats { t, mean: counting_mean(model, t)?, variance: counting_variance(model, t)? })
}

/// Bernoulli parameters of N_t: the eigenvalues of the Nystrom discretisation
/// of K on (-2 - delta, t], clamped to [0, 1].
pub fn bernoulli_representation(model: &KernelModel, t: f64) -> Result<BernoulliRepresentation> {
    model.check_in_window(t)?;
    let nodes = model.rule_up_to(t).len();
    if nodes == 0 {
        return Ok(BernoulliRepresentation { probabilities: Vec::new() });
    }
    let matrix = if nodes < model.n { nystrom_matrix(model, t) } else { restricted_gram(model, t) };
    let eig = real_symmetric_eigenvalues(&matrix)?;
    let mut probabilities = Vec::with_capacity(eig.len());
    for p in eig {
        if !(-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&p) {
            return Err(Error::NumericGuard(format!(
                "Nystrom eigenvalue {p} outside [0, 1]; quadrature too coarse"
            )));
        }
        probabilities.push(p.clamp(0.0, 1.0));
    }
    probabilities.reverse();
    Ok(BernoulliRepresentation { probabilities })
}

/// One draw of the Bernoulli sum.
pub fn sample_counting(rep: &BernoulliRepresentation, seed: u64) -> usize {
    let mut rng = rng_from_seed(seed);
    rep.probabilities.iter().filter(|&&p| rng.random::<f64>() < p).count()
}

/// `count` draws under `master`, one child seed per draw.
pub fn sample_countings(rep: &BernoulliRepresentation, count: usize, master: u64) -> Result<Vec<usize>> {
    replicate_map(count, master, |s| Ok(sample_counting(rep, s)))
}

/// Number of eigenvalues <= t in an ascending spectrum.
pub fn count_below(eigenvalues: &[f64], t: f64) -> usize {
    eigenvalues.partition_point(|&x| x <= t)
}
