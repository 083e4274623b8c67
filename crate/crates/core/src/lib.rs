//! Numerical laboratory for eigenvalue fluctuations of random matrices.
//!
//! * [`ensembles`]: GUE/GOE, moment-matched Wigner and covariance samplers.
//! * [`laws`]: semicircle and Marchenko–Pastur laws, eigenvalue locations.
//! * [`counting`]: the GUE counting function through its determinantal kernel.
//! * [`estimators`]: Monte Carlo fluctuation statistics and scaling fits.
//! * [`transport`]: Wasserstein and Kolmogorov distances to the semicircle.
//! * [`cli`]: the experiment runner behind the `rmt-lab` binary.

pub mod cli;
pub mod counting;
pub mod ensembles;
pub mod error;
pub mod estimators;
pub mod laws;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod transport;

pub use error::{Error, Result};
