//! Monte Carlo statistics of individual eigenvalues and the scaling checks
//! built on them.

use serde::{Deserialize, Serialize};

use crate::counting::{
    count_below, eigenvalue_deviation_bound_bulk, eigenvalue_deviation_bound_intermediate,
    intermediate_constant, intermediate_scale,
};
use crate::ensembles::{replicate_map, sample_spectrum, EnsembleKind, EnsembleSpec};
use crate::error::{invalid, Error, Result};
use crate::laws::{gamma_table, sc_density, MarchenkoPasturLaw, QuantileTable};
use crate::rng::stream_seed;
use crate::stats::{self, FitModel, ScalingFit};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Bulk,
    Edge,
    Intermediate,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bulk" => Ok(Self::Bulk),
            "edge" => Ok(Self::Edge),
            "intermediate" => Ok(Self::Intermediate),
            other => Err(invalid(format!("unknown regime '{other}'"))),
        }
    }
}

/// Index selection rule for a variance scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub regime: Regime,
    /// Bulk fraction, in (0, 1/2].
    pub eta: f64,
    /// Intermediate cutoff multiplier.
    pub k: f64,
    /// Explicit (N, j) pairs for the intermediate regime.
    pub j_map: Vec<(usize, usize)>,
}

impl RegimeSpec {
    pub fn new(regime: Regime) -> Self {
        Self { regime, eta: 0.5, k: 30.0, j_map: Vec::new() }
    }

    pub fn with_j_map(mut self, map: Vec<(usize, usize)>) -> Self {
        self.j_map = map;
        self
    }

    /// Index scanned at size N: bulk ceil(N/2), edge N, intermediate from the
    /// map or else N - 2 ceil(sqrt N).
    pub fn index_for(&self, n: usize) -> Result<usize> {
        let j = match self.regime {
            Regime::Bulk => n.div_ceil(2),
            Regime::Edge => n,
            Regime::Intermediate => match self.j_map.iter().find(|(m, _)| *m == n) {
                Some(&(_, j)) => j,
                None => {
                    let gap = 2 * (n as f64).sqrt().ceil() as usize;
                    n.checked_sub(gap).filter(|&j| j >= 1).ok_or_else(|| {
                        invalid(format!("N = {n} too small for the intermediate rule"))
                    })?
                }
            },
        };
        if j == 0 || j > n {
            return Err(invalid(format!("index {j} outside 1..={n}")));
        }
        Ok(j)
    }

    /// Whether (N, j) lies in the regime's asymptotic index range.
    pub fn contains(&self, n: usize, j: usize) -> bool {
        let nf = n as f64;
        let jf = j as f64;
        match self.regime {
            Regime::Bulk => self.eta * nf <= jf && jf <= (1.0 - self.eta) * nf + 1.0,
            Regime::Edge => j == n || j == 1,
            Regime::Intermediate => {
                let gap = j.min(n - j) as f64;
                self.k * nf.ln() <= gap && gap <= self.eta * nf
            }
        }
    }

    /// Normalised series value for a variance at (N, j).
    pub fn ratio(&self, n: usize, j: usize, variance: f64) -> f64 {
        let nf = n as f64;
        match self.regime {
            Regime::Bulk => variance * nf * nf / nf.ln(),
            Regime::Edge => variance * nf.powf(4.0 / 3.0),
            Regime::Intermediate => {
                let gap = (n - j) as f64;
                variance * nf.powf(4.0 / 3.0) * gap.powf(2.0 / 3.0) / gap.ln()
            }
        }
    }
}

/// Monte Carlo statistics of lambda_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueStats {
    pub spec: EnsembleSpec,
    pub j: usize,
    pub replicates: usize,
    pub seed: u64,
    pub gamma: f64,
    pub mean: f64,
    /// Population variance (divisor R), so that msd = variance + (mean - gamma)^2.
    pub variance: f64,
    /// E[(lambda_j - gamma_j)^2]
    pub msd: f64,
    pub mean_stderr: f64,
    pub variance_stderr: f64,
    pub msd_stderr: f64,
    /// The sampled lambda_j values.
    #[serde(skip)]
    pub values: Vec<f64>,
}

fn population_variance(xs: &[f64]) -> f64 {
    let m = stats::mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    stats::mean(&sq)
}

impl EigenvalueStats {
    /// Statistics of the sample `values` of lambda_j against location `gamma`.
    pub fn from_values(spec: &EnsembleSpec, j: usize, gamma: f64, seed: u64, values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("need at least 2 replicates"));
        }
        let msd_of = move |xs: &[f64]| {
            let sq: Vec<f64> = xs.iter().map(|x| (x - gamma) * (x - gamma)).collect();
            stats::mean(&sq)
        };
        let se = stats::bootstrap_stderr(
            values,
            BOOTSTRAP_RESAMPLES,
            stream_seed(seed, "bootstrap"),
            &[&stats::mean, &population_variance, &msd_of],
        );
        Ok(Self {
            spec: spec.clone(),
            j,
            replicates: values.len(),
            seed,
            gamma,
            mean: stats::mean(values),
            variance: population_variance(values),
            msd: msd_of(values),
            mean_stderr: se[0],
            variance_stderr: se[1],
            msd_stderr: se[2],
            values: values.to_vec(),
        })
    }
}

/// Theoretical locations for the spec's limiting law.
pub fn locations_for(spec: &EnsembleSpec) -> Result<QuantileTable> {
    if spec.kind.is_covariance() {
        MarchenkoPasturLaw::from_dims(spec.m, spec.n)?.gamma_table(spec.n)
    } else {
        gamma_table(spec.n)
    }
}

/// lambda_j for each j in `js` across `replicates` draws; one column per index.
/// The tridiagonal model is used whenever the kind has one.
pub fn collect_eigenvalues(spec: &EnsembleSpec, js: &[usize], replicates: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    for &j in js {
        if j == 0 || j > spec.n {
            return Err(invalid(format!("index {j} outside 1..={}", spec.n)));
        }
    }
    let fast = spec.kind.has_fast_path();
    let rows = replicate_map(replicates, seed, |s| {
        let ev = sample_spectrum(spec, s, fast)?.eigenvalues;
        Ok(js.iter().map(|&j| ev[j - 1]).collect::<Vec<f64>>())
    })?;
    Ok((0..js.len()).map(|k| rows.iter().map(|r| r[k]).collect()).collect())
}

pub fn estimate_eigenvalue_stats(spec: &EnsembleSpec, j: usize, replicates: usize, seed: u64) -> Result<EigenvalueStats> {
    let values = collect_eigenvalues(spec, &[j], replicates, seed)?.remove(0);
    let gamma = locations_for(spec)?.gamma(j);
    EigenvalueStats::from_values(spec, j, gamma, seed, &values)
}

/// Per-N statistics for one regime plus the log-log fit of variance against N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceScan {
    pub regime: RegimeSpec,
    pub stats: Vec<EigenvalueStats>,
    /// Normalised variance series (see [`RegimeSpec::ratio`]).
    pub ratios: Vec<f64>,
    pub ratio_spread: f64,
    pub fit: Option<ScalingFit>,
    /// Variance / log N fit, bulk regime only.
    pub log_fit: Option<ScalingFit>,
}

/// Scans several regimes over the same draws: at each N one set of spectra
/// is drawn and every regime's index is read from it.
pub fn variance_scan_multi(
    family: &(dyn Fn(usize) -> EnsembleSpec + Sync),
    grid: &[usize],
    regimes: &[RegimeSpec],
    replicates: usize,
    seed: u64,
    require_fit: bool,
) -> Result<Vec<VarianceScan>> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("N grid must be nonempty and strictly ascending"));
    }
    if require_fit && grid.len() < 3 {
        return Err(invalid(format!("scaling fit needs at least 3 grid points, got {}", grid.len())));
    }
    let mut per_regime: Vec<Vec<EigenvalueStats>> = vec![Vec::new(); regimes.len()];
    for &n in grid {
        let spec = family(n);
        let js = regimes.iter().map(|r| r.index_for(n)).collect::<Result<Vec<_>>>()?;
        let n_seed = stream_seed(seed, &format!("n={n}"));
        let columns = collect_eigenvalues(&spec, &js, replicates, n_seed)?;
        let table = locations_for(&spec)?;
        for (k, (&j, column)) in js.iter().zip(&columns).enumerate() {
            per_regime[k].push(EigenvalueStats::from_values(&spec, j, table.gamma(j), n_seed, column)?);
        }
    }
    regimes
        .iter()
        .zip(per_regime)
        .map(|(regime, stats)| {
            let ratios: Vec<f64> = stats.iter().map(|s| regime.ratio(s.spec.n, s.j, s.variance)).collect();
            let points: Vec<(f64, f64)> = stats.iter().map(|s| (s.spec.n as f64, s.variance)).collect();
            let fit = if points.len() >= 3 { Some(ScalingFit::fit(&points, FitModel::PurePower)?) } else { None };
            let log_fit = if points.len() >= 3 && regime.regime == Regime::Bulk {
                Some(ScalingFit::fit(&points, FitModel::PowerWithLog)?)
            } else {
                None
            };
            Ok(VarianceScan {
                regime: regime.clone(),
                ratio_spread: stats::spread_ratio(&ratios),
                ratios,
                stats,
                fit,
                log_fit,
            })
        })
        .collect()
}

pub fn variance_scan(
    family: &(dyn Fn(usize) -> EnsembleSpec + Sync),
    grid: &[usize],
    regime: &RegimeSpec,
    replicates: usize,
    seed: u64,
) -> Result<VarianceScan> {
    Ok(variance_scan_multi(family, grid, std::slice::from_ref(regime), replicates, seed, true)?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalityGap {
    pub a: EigenvalueStats,
    pub b: EigenvalueStats,
    /// msd(a) - msd(b)
    pub gap: f64,
    pub pooled_stderr: f64,
}

/// Difference of E[(lambda_j - gamma_j)^2] between two ensembles of equal size.
pub fn universality_gap(a: &EnsembleSpec, b: &EnsembleSpec, j: usize, replicates: usize, seed: u64) -> Result<UniversalityGap> {
    if a.n != b.n {
        return Err(Error::SizeMismatch { expected: a.n, actual: b.n });
    }
    let sa = estimate_eigenvalue_stats(a, j, replicates, seed)?;
    let sb = estimate_eigenvalue_stats(b, j, replicates, seed)?;
    Ok(UniversalityGap {
        gap: sa.msd - sb.msd,
        pooled_stderr: sa.msd_stderr.hypot(sb.msd_stderr),
        a: sa,
        b: sb,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingCheck {
    pub t: f64,
    pub gue_mean: f64,
    pub goe_mean: f64,
    pub goe_prime_mean: f64,
    pub delta: f64,
    pub stderr: f64,
}

/// |E N_t(GUE) - (E N_t(GOE) + E N_t(GOE')) / 2| from independent streams.
pub fn interlacing_mean_check(n: usize, t: f64, replicates: usize, seed: u64) -> Result<InterlacingCheck> {
    if replicates < 1000 {
        return Err(invalid(format!("interlacing check needs R >= 1000, got {replicates}")));
    }
    let counts = |spec: EnsembleSpec, tag: &str| -> Result<Vec<f64>> {
        replicate_map(replicates, stream_seed(seed, tag), |s| {
            Ok(count_below(&sample_spectrum(&spec, s, true)?.eigenvalues, t) as f64)
        })
    };
    let gue = counts(EnsembleSpec::gue(n), "gue")?;
    let goe = counts(EnsembleSpec::goe(n), "goe")?;
    let goe2 = counts(EnsembleSpec::goe(n), "goe-prime")?;
    let (mg, m1, m2) = (stats::mean(&gue), stats::mean(&goe), stats::mean(&goe2));
    let r = replicates as f64;
    let stderr = (stats::variance(&gue) / r + 0.25 * (stats::variance(&goe) + stats::variance(&goe2)) / r).sqrt();
    Ok(InterlacingCheck { t, gue_mean: mg, goe_mean: m1, goe_prime_mean: m2, delta: (mg - 0.5 * (m1 + m2)).abs(), stderr })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedSample {
    pub n: usize,
    pub j: usize,
    pub gamma: f64,
    pub scale: f64,
    pub values: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub ks_normal: f64,
}

/// (lambda - gamma) / sqrt(2 log N / ((4 - gamma^2) N^2)) for each value.
pub fn standardize_bulk(n: usize, j: usize, gamma: f64, lambdas: &[f64]) -> Result<StandardizedSample> {
    let room = 4.0 - gamma * gamma;
    if j == 0 || j >= n || room <= 1e-12 || n < 2 {
        return Err(invalid(format!("index {j} of {n} is at the spectral edge")));
    }
    let nf = n as f64;
    let scale = (2.0 * nf.ln() / (room * nf * nf)).sqrt();
    let values: Vec<f64> = lambdas.iter().map(|x| (x - gamma) / scale).collect();
    Ok(StandardizedSample {
        n,
        j,
        gamma,
        scale,
        mean: stats::mean(&values),
        variance: stats::variance(&values),
        ks_normal: stats::ks_vs_standard_normal(&values),
        values,
    })
}

pub fn gustavsson_standardized(spec: &EnsembleSpec, j: usize, replicates: usize, seed: u64) -> Result<StandardizedSample> {
    if spec.kind.is_covariance() {
        return Err(invalid("standardisation applies to Wigner ensembles"));
    }
    let gamma = gamma_table(spec.n)?.gamma(j);
    // fail before sampling if the index is at the edge
    standardize_bulk(spec.n, j, gamma, &[])?;
    let values = collect_eigenvalues(spec, &[j], replicates, seed)?.remove(0);
    standardize_bulk(spec.n, j, gamma, &values)
}

/// Constants for the eigenvalue deviation bounds, measured rather than assumed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationCalibration {
    /// Density constant: rho(gamma + s) - rho(gamma) >= 2 c s on the probed range.
    pub c: f64,
    /// Variance constant: bulk c_delta with sup Var(N_t) = c_delta log N, or the
    /// intermediate C' with 2 sup Var(N_t) = C' log(N - j).
    pub variance_constant: f64,
    /// Largest pilot counting variance over the probed thresholds.
    pub sup_count_variance: f64,
    pub t_range: (f64, f64),
    pub pilot_replicates: usize,
}

/// One row of an empirical-tail-versus-bound comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub u: f64,
    pub threshold: f64,
    pub exceedances: usize,
    pub replicates: usize,
    pub empirical: f64,
    pub wilson_upper: f64,
    pub bound: f64,
}

impl TailRow {
    pub fn dominated(&self) -> bool {
        self.wilson_upper <= self.bound
    }
}

fn pilot_count_variance(spec: &EnsembleSpec, lo: f64, hi: f64, replicates: usize, seed: u64) -> Result<f64> {
    const GRID: usize = 17;
    let ts: Vec<f64> = (0..GRID).map(|k| lo + (hi - lo) * k as f64 / (GRID - 1) as f64).collect();
    let rows = replicate_map(replicates, seed, |s| {
        let ev = sample_spectrum(spec, s, spec.kind.has_fast_path())?.eigenvalues;
        Ok(ts.iter().map(|&t| count_below(&ev, t) as f64).collect::<Vec<f64>>())
    })?;
    Ok((0..GRID)
        .map(|k| stats::variance(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .fold(0.0, f64::max))
}

fn density_constant(gamma: f64, reach: f64) -> f64 {
    const GRID: usize = 64;
    let (lo, hi) = (gamma - reach, gamma + reach);
    let min = (0..=GRID)
        .map(|k| sc_density(lo + (hi - lo) * k as f64 / GRID as f64))
        .fold(f64::INFINITY, f64::min);
    0.5 * min
}

/// Calibrate (C, c_delta) for the bulk bound at index j from a pilot run on
/// an independent stream.
pub fn calibrate_bulk(spec: &EnsembleSpec, j: usize, u_max: f64, pilot: usize, seed: u64) -> Result<DeviationCalibration> {
    let n = spec.n;
    let gamma = gamma_table(n)?.gamma(j);
    let reach = u_max / n as f64;
    let (lo, hi) = (gamma - reach, gamma + reach);
    if lo <= -2.0 || hi >= 2.0 {
        return Err(invalid("probed range leaves the bulk"));
    }
    let sup = pilot_count_variance(spec, lo, hi, pilot, stream_seed(seed, "pilot-bulk"))?;
    Ok(DeviationCalibration {
        c: density_constant(gamma, reach),
        variance_constant: sup / (n as f64).ln(),
        sup_count_variance: sup,
        t_range: (lo, hi),
        pilot_replicates: pilot,
    })
}

/// Calibrate C' for the intermediate bound; C is the fixed constant.
pub fn calibrate_intermediate(spec: &EnsembleSpec, j: usize, u_max: f64, pilot: usize, seed: u64) -> Result<DeviationCalibration> {
    let n = spec.n;
    if j >= n {
        return Err(invalid("intermediate index must be below N"));
    }
    let gamma = gamma_table(n)?.gamma(j);
    let reach = u_max * intermediate_scale(n, j);
    let (lo, hi) = (gamma - reach, (gamma + reach).min(2.0));
    let sup = pilot_count_variance(spec, lo, hi, pilot, stream_seed(seed, "pilot-intermediate"))?;
    Ok(DeviationCalibration {
        c: intermediate_constant(),
        variance_constant: 2.0 * sup / ((n - j) as f64).ln(),
        sup_count_variance: sup,
        t_range: (lo, hi),
        pilot_replicates: pilot,
    })
}

fn tail_rows(values: &[f64], gamma: f64, us: &[f64], scale: f64, bound: impl Fn(f64) -> f64) -> Vec<TailRow> {
    us.iter()
        .map(|&u| {
            let threshold = u * scale;
            let exceedances = values.iter().filter(|&&x| (x - gamma).abs() >= threshold).count();
            TailRow {
                u,
                threshold,
                exceedances,
                replicates: values.len(),
                empirical: exceedances as f64 / values.len() as f64,
                wilson_upper: stats::wilson_upper(exceedances, values.len(), 1.96),
                bound: bound(u),
            }
        })
        .collect()
}

/// Empirical P(|lambda_j - gamma_j| >= u / N) against the calibrated bulk bound.
pub fn bulk_deviation_tails(
    spec: &EnsembleSpec,
    j: usize,
    us: &[f64],
    cal: &DeviationCalibration,
    replicates: usize,
    seed: u64,
) -> Result<Vec<TailRow>> {
    let n = spec.n;
    let gamma = gamma_table(n)?.gamma(j);
    let values = collect_eigenvalues(spec, &[j], replicates, seed)?.remove(0);
    Ok(tail_rows(&values, gamma, us, 1.0 / n as f64, |u| {
        eigenvalue_deviation_bound_bulk(n, u, cal.c, cal.variance_constant)
    }))
}

/// Empirical P(|lambda_j - gamma_j| >= u / (N^(2/3)(N-j)^(1/3))) against the
/// intermediate bound.
pub fn intermediate_deviation_tails(
    spec: &EnsembleSpec,
    j: usize,
    us: &[f64],
    cal: &DeviationCalibration,
    replicates: usize,
    seed: u64,
) -> Result<Vec<TailRow>> {
    let n = spec.n;
    let gamma = gamma_table(n)?.gamma(j);
    let values = collect_eigenvalues(spec, &[j], replicates, seed)?.remove(0);
    Ok(tail_rows(&values, gamma, us, intermediate_scale(n, j), |u| {
        eigenvalue_deviation_bound_intermediate(n, j, u, cal.variance_constant)
    }))
}

/// Default ensemble family of a kind, with m = ratio * n for covariance kinds.
pub fn family_of(kind: EnsembleKind, m_ratio: f64) -> impl Fn(usize) -> EnsembleSpec + Sync {
    move |n| EnsembleSpec::of_kind(kind, n, (m_ratio * n as f64).round() as usize)
}
