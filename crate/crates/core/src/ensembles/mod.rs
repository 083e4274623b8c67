//! Random-matrix ensembles and their spectra.

mod eigen;
mod entries;
mod matrix;

pub use eigen::{
    householder_tridiagonalize, real_symmetric_eigenvalues, symmetric_eigenvalues,
    tridiagonal_eigenvalues, MAX_SWEEPS, SYMMETRY_TOLERANCE,
};
pub use entries::{entry_moments, moments_match, Atom, EntryDistribution};
pub use matrix::{HermitianMatrix, SampledMatrix, SymmetricMatrix, MAX_DENSE_DIM};

use rand::Rng as _;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{child_seed, rng_from_seed, Rng};
use crate::stats;
use matrix::check_dense_dim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Gue,
    Goe,
    WignerComplexMatched,
    WignerRealMatched,
    Lue,
    Loe,
    CovarianceMatched,
}

impl EnsembleKind {
    pub fn is_covariance(self) -> bool {
        matches!(self, Self::Lue | Self::Loe | Self::CovarianceMatched)
    }

    /// Kinds whose spectrum has an equal-in-law tridiagonal model.
    pub fn has_fast_path(self) -> bool {
        matches!(self, Self::Gue | Self::Goe | Self::Lue | Self::Loe)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Gue => "gue",
            Self::Goe => "goe",
            Self::WignerComplexMatched => "wigner-complex-matched",
            Self::WignerRealMatched => "wigner-real-matched",
            Self::Lue => "lue",
            Self::Loe => "loe",
            Self::CovarianceMatched => "covariance-matched",
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "gue" => Self::Gue,
            "goe" => Self::Goe,
            "wigner-complex-matched" | "complex-matched" => Self::WignerComplexMatched,
            "wigner-real-matched" | "real-matched" => Self::WignerRealMatched,
            "lue" => Self::Lue,
            "loe" => Self::Loe,
            "covariance-matched" => Self::CovarianceMatched,
            other => return Err(Error::InvalidArgument(format!("unknown ensemble '{other}'"))),
        })
    }
}

/// Which ensemble to draw, at which size.
///
/// For Wigner kinds `n` is the matrix dimension and `m` is unused. For
/// covariance kinds the data matrix X is m x n and the sampled matrix is
/// X*X / n; entries of X follow `offdiag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub m: usize,
    pub offdiag: EntryDistribution,
    pub diag: EntryDistribution,
}

impl EnsembleSpec {
    fn wigner(kind: EnsembleKind, n: usize, offdiag: EntryDistribution, diag: EntryDistribution) -> Self {
        Self { kind, n, m: n, offdiag, diag }
    }

    pub fn gue(n: usize) -> Self {
        Self::wigner(
            EnsembleKind::Gue,
            n,
            EntryDistribution::gaussian_complex_halves(),
            EntryDistribution::gaussian_real_unit(),
        )
    }

    pub fn goe(n: usize) -> Self {
        Self::wigner(
            EnsembleKind::Goe,
            n,
            EntryDistribution::gaussian_real_unit(),
            EntryDistribution::gaussian_real_var2(),
        )
    }

    pub fn wigner_complex_matched(n: usize) -> Self {
        Self::wigner(
            EnsembleKind::WignerComplexMatched,
            n,
            EntryDistribution::three_point_complex_halves(),
            EntryDistribution::rademacher_real(),
        )
    }

    pub fn wigner_real_matched(n: usize) -> Self {
        Self::wigner(
            EnsembleKind::WignerRealMatched,
            n,
            EntryDistribution::three_point_real_unit(),
            EntryDistribution::three_point_real_var2(),
        )
    }

    pub fn lue(n: usize, m: usize) -> Self {
        let e = EntryDistribution::gaussian_complex_halves();
        Self { kind: EnsembleKind::Lue, n, m, offdiag: e.clone(), diag: e }
    }

    pub fn loe(n: usize, m: usize) -> Self {
        let e = EntryDistribution::gaussian_real_unit();
        Self { kind: EnsembleKind::Loe, n, m, offdiag: e.clone(), diag: e }
    }

    pub fn covariance_matched(n: usize, m: usize) -> Self {
        let e = EntryDistribution::three_point_real_unit();
        Self { kind: EnsembleKind::CovarianceMatched, n, m, offdiag: e.clone(), diag: e }
    }

    /// Default spec of `kind`; `m` is ignored for Wigner kinds.
    pub fn of_kind(kind: EnsembleKind, n: usize, m: usize) -> Self {
        match kind {
            EnsembleKind::Gue => Self::gue(n),
            EnsembleKind::Goe => Self::goe(n),
            EnsembleKind::WignerComplexMatched => Self::wigner_complex_matched(n),
            EnsembleKind::WignerRealMatched => Self::wigner_real_matched(n),
            EnsembleKind::Lue => Self::lue(n, m),
            EnsembleKind::Loe => Self::loe(n, m),
            EnsembleKind::CovarianceMatched => Self::covariance_matched(n, m),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.offdiag.validate()?;
        self.diag.validate()?;
        if self.n == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        let spec_err = |msg: &str| Err(Error::InvalidSpec(format!("{}: {msg}", self.kind.name())));
        let gch = EntryDistribution::gaussian_complex_halves();
        let gru = EntryDistribution::gaussian_real_unit();
        let grv2 = EntryDistribution::gaussian_real_var2();
        match self.kind {
            EnsembleKind::Gue => {
                if self.offdiag != gch || self.diag != gru {
                    return spec_err("entries must be the standard GUE Gaussians");
                }
            }
            EnsembleKind::Goe => {
                if self.offdiag != gru || self.diag != grv2 {
                    return spec_err("entries must be the standard GOE Gaussians");
                }
            }
            EnsembleKind::WignerComplexMatched => {
                if !self.offdiag.is_complex() || !moments_match(&self.offdiag, &gch, 4, 1e-14) {
                    return spec_err("off-diagonal parts must match the complex Gaussian to order 4");
                }
                if self.diag.is_complex() || !moments_match(&self.diag, &gru, 2, 1e-14) {
                    return spec_err("diagonal must be real and match N(0,1) to order 2");
                }
            }
            EnsembleKind::WignerRealMatched => {
                if self.offdiag.is_complex() || !moments_match(&self.offdiag, &gru, 4, 1e-14) {
                    return spec_err("off-diagonal must match N(0,1) to order 4");
                }
                if self.diag.is_complex() || !moments_match(&self.diag, &grv2, 2, 1e-14) {
                    return spec_err("diagonal must match N(0,2) to order 2");
                }
            }
            EnsembleKind::Lue | EnsembleKind::Loe | EnsembleKind::CovarianceMatched => {
                if self.m < self.n {
                    return spec_err("covariance kinds need m >= n");
                }
                let [m1, m2, ..] = entry_moments(&self.offdiag);
                let total = if self.offdiag.is_complex() { 2.0 * m2 } else { m2 };
                if m1.abs() > 1e-14 || (total - 1.0).abs() > 1e-14 {
                    return spec_err("data entries must be centred with unit variance");
                }
                if self.kind == EnsembleKind::Lue && self.offdiag != gch {
                    return spec_err("LUE entries must be complex Gaussian");
                }
                if self.kind == EnsembleKind::Loe && self.offdiag != gru {
                    return spec_err("LOE entries must be real Gaussian");
                }
            }
        }
        Ok(())
    }

    /// Dyson index of the symmetry class (2 for complex, 1 for real).
    pub fn beta(&self) -> u32 {
        if self.offdiag.is_complex() {
            2
        } else {
            1
        }
    }
}

/// One realization's sorted spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub spec: EnsembleSpec,
    pub seed: u64,
    pub eigenvalues: Vec<f64>,
}

/// Draw W = M / sqrt(N) (Wigner kinds) or S = X*X / n (covariance kinds).
pub fn sample_matrix(spec: &EnsembleSpec, seed: u64) -> Result<SampledMatrix> {
    spec.validate()?;
    check_dense_dim(spec.n)?;
    let mut rng = rng_from_seed(seed);
    if spec.kind.is_covariance() {
        check_dense_dim(spec.m)?;
        return Ok(sample_covariance(spec, &mut rng));
    }
    let n = spec.n;
    let scale = 1.0 / (n as f64).sqrt();
    if spec.offdiag.is_complex() {
        let mut h = HermitianMatrix::zeros(n);
        for i in 0..n {
            h.set_herm(i, i, spec.diag.draw_part(&mut rng) * scale, 0.0);
            for j in i + 1..n {
                let (re, im) = spec.offdiag.draw(&mut rng);
                h.set_herm(i, j, re * scale, im * scale);
            }
        }
        Ok(SampledMatrix::Complex(h))
    } else {
        let mut s = SymmetricMatrix::zeros(n);
        for i in 0..n {
            s.set_sym(i, i, spec.diag.draw_part(&mut rng) * scale);
            for j in i + 1..n {
                s.set_sym(i, j, spec.offdiag.draw_part(&mut rng) * scale);
            }
        }
        Ok(SampledMatrix::Real(s))
    }
}

fn sample_covariance(spec: &EnsembleSpec, rng: &mut Rng) -> SampledMatrix {
    let (rows, n) = (spec.m, spec.n);
    let complex = spec.offdiag.is_complex();
    // X stored column-major so that column dot products are contiguous
    let mut xr = vec![0.0; rows * n];
    let mut xi = vec![0.0; rows * n];
    for i in 0..rows {
        for k in 0..n {
            let (re, im) = spec.offdiag.draw(rng);
            xr[k * rows + i] = re;
            xi[k * rows + i] = im;
        }
    }
    let inv = 1.0 / n as f64;
    if complex {
        let mut h = HermitianMatrix::zeros(n);
        for k in 0..n {
            let (ak, bk) = (&xr[k * rows..(k + 1) * rows], &xi[k * rows..(k + 1) * rows]);
            for l in k..n {
                let (al, bl) = (&xr[l * rows..(l + 1) * rows], &xi[l * rows..(l + 1) * rows]);
                let mut re = 0.0;
                let mut im = 0.0;
                for i in 0..rows {
                    re += ak[i] * al[i] + bk[i] * bl[i];
                    im += ak[i] * bl[i] - bk[i] * al[i];
                }
                let im = if k == l { 0.0 } else { im * inv };
                h.set_herm(k, l, re * inv, im);
            }
        }
        SampledMatrix::Complex(h)
    } else {
        let mut s = SymmetricMatrix::zeros(n);
        for k in 0..n {
            let ak = &xr[k * rows..(k + 1) * rows];
            for l in k..n {
                let al = &xr[l * rows..(l + 1) * rows];
                let dot: f64 = ak.iter().zip(al).map(|(x, y)| x * y).sum();
                s.set_sym(k, l, dot * inv);
            }
        }
        SampledMatrix::Real(s)
    }
}

fn chi(rng: &mut Rng, dof: f64) -> f64 {
    ChiSquared::new(dof).expect("positive degrees of freedom").sample(rng).sqrt()
}

/// Tridiagonal (Hermite) or bidiagonal-squared (Laguerre) model with the
/// same spectral law as the dense ensemble.
fn fast_tridiagonal(spec: &EnsembleSpec, rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
    let n = spec.n;
    let beta = f64::from(spec.beta());
    let inv_sqrt_beta = beta.sqrt().recip();
    if spec.kind.is_covariance() {
        let m = spec.m;
        let d: Vec<f64> = (0..n).map(|k| chi(rng, beta * (m - k) as f64) * inv_sqrt_beta).collect();
        let e: Vec<f64> = (0..n.saturating_sub(1))
            .map(|k| chi(rng, beta * (n - 1 - k) as f64) * inv_sqrt_beta)
            .collect();
        let inv = 1.0 / n as f64;
        let diag = (0..n)
            .map(|k| (d[k] * d[k] + if k > 0 { e[k - 1] * e[k - 1] } else { 0.0 }) * inv)
            .collect();
        let off = (0..n.saturating_sub(1)).map(|k| d[k] * e[k] * inv).collect();
        (diag, off)
    } else {
        let scale = 1.0 / (n as f64).sqrt();
        let diag_sd = (2.0 / beta).sqrt();
        let diag = (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                z * diag_sd * scale
            })
            .collect();
        let off = (1..n).rev().map(|k| chi(rng, beta * k as f64) * inv_sqrt_beta * scale).collect();
        (diag, off)
    }
}

/// Sorted spectrum of one draw. `fast` selects the tridiagonal model and is
/// only legal for the Gaussian kinds.
pub fn sample_spectrum(spec: &EnsembleSpec, seed: u64, fast: bool) -> Result<SpectrumSample> {
    spec.validate()?;
    let eigenvalues = if fast {
        if !spec.kind.has_fast_path() {
            return Err(Error::InvalidArgument(format!(
                "no tridiagonal model for {}",
                spec.kind.name()
            )));
        }
        let mut rng = rng_from_seed(seed);
        let (d, e) = fast_tridiagonal(spec, &mut rng);
        tridiagonal_eigenvalues(d, e)?
    } else {
        symmetric_eigenvalues(&sample_matrix(spec, seed)?)?
    };
    Ok(SpectrumSample { spec: spec.clone(), seed, eigenvalues })
}

/// Run `f` on the child seeds 0..count of `master`, in the ambient rayon pool.
/// Output order is replicate order.
pub fn replicate_map<T, F>(count: usize, master: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..count as u64).into_par_iter().map(|r| f(child_seed(master, r))).collect()
}

/// `count` spectra under `master`, replicate r drawn from child seed r.
pub fn sample_spectra(spec: &EnsembleSpec, count: usize, master: u64, fast: bool) -> Result<Vec<SpectrumSample>> {
    replicate_map(count, master, |s| sample_spectrum(spec, s, fast))
}

/// Monte Carlo (mean, stderr) of Tr(W^power).
pub fn trace_power_mean(spec: &EnsembleSpec, power: u32, replicates: usize, seed: u64) -> Result<(f64, f64)> {
    if replicates < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicates".into()));
    }
    let values = replicate_map(replicates, seed, |s| sample_matrix(spec, s)?.trace_even_power(power))?;
    Ok((stats::mean(&values), stats::stderr_of_mean(&values)))
}
