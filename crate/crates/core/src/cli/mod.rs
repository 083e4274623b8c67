//! Command-line experiment runner.
//!
//! Every subcommand produces a CSV table, a JSON summary and optionally a
//! plot-data file of `(x, y, yerr)` triples. With `--out DIR` these are
//! written to `DIR` together with `manifest.json`; otherwise the CSV goes to
//! standard output.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::counting::{bernoulli_representation, count_below, counting_stats, sample_countings, KernelModel};
use crate::ensembles::{replicate_map, sample_spectrum, EnsembleKind, EnsembleSpec};
use crate::error::{invalid, Error, Result};
use crate::estimators::{
    bulk_deviation_tails, calibrate_bulk, calibrate_intermediate, intermediate_deviation_tails,
    interlacing_mean_check, universality_gap, variance_scan_multi, EigenvalueStats, Regime, RegimeSpec,
};
use crate::laws::{gamma_table, MarchenkoPasturLaw};
use crate::stats;
use crate::transport::expected_w2_experiment;
use output::{Cell, Table};

pub const SEED_ENV: &str = "RMT_LAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "rmt-lab", version, about = "Random-matrix Monte Carlo laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quantile locations gamma_j of the semicircle or Marchenko-Pastur law
    Gamma(Params),
    /// Raw spectra
    Sample(Params),
    /// Kernel counting statistics against direct eigenvalue counts
    Counting(Params),
    /// Eigenvalue variance scan over an N grid
    Scan(Params),
    /// Mean-square deviation gap between two ensembles
    Universality(Params),
    /// GUE counts against the average of two independent GOE counts
    Interlace(Params),
    /// Wasserstein and Kolmogorov distances to the semicircle law
    Transport(Params),
    /// Edge scans for sample covariance ensembles
    Covariance(Params),
}

/// Options shared by all subcommands; each reads the ones it needs.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Params {
    /// Flat key = value file; command-line flags override it
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated ascending N values
    #[arg(long)]
    pub grid: Option<String>,
    /// Rows of X for covariance ensembles (single n only)
    #[arg(long)]
    pub m: Option<usize>,
    /// m / n for covariance ensembles on a grid
    #[arg(long)]
    pub m_ratio: Option<f64>,
    /// Eigenvalue index, or N:j pairs separated by commas
    #[arg(long)]
    pub j: Option<String>,
    /// Intermediate index rule: `default` or `sqrt-gap=C` (N - j = ceil(C sqrt N))
    #[arg(long)]
    pub j_rule: Option<String>,
    /// bulk, edge, intermediate; comma-separated for several
    #[arg(long)]
    pub regime: Option<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    /// Replicates
    #[arg(long)]
    pub r: Option<usize>,
    /// Master seed (falls back to RMT_LAB_SEED)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the tridiagonal model where available
    #[arg(long)]
    pub fast: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub emit_plotdata: bool,
    /// Counting threshold
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub ensemble: Option<String>,
    /// First ensemble of a universality comparison
    #[arg(long)]
    pub a: Option<String>,
    /// Second ensemble of a universality comparison
    #[arg(long)]
    pub b: Option<String>,
    /// Deviation levels u for tail-versus-bound checks in `scan`
    #[arg(long)]
    pub tails: Option<String>,
    /// Pilot replicates for bound calibration
    #[arg(long)]
    pub pilot: Option<usize>,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| invalid(format!("invalid value '{v}' for '{key}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(invalid(format!("invalid boolean '{v}' for '{key}'"))),
    }
}

fn fill<T: FromStr>(slot: &mut Option<T>, map: &BTreeMap<String, String>, key: &str) -> Result<()> {
    if slot.is_none() {
        if let Some(v) = map.get(key) {
            *slot = Some(parse_value(key, v)?);
        }
    }
    Ok(())
}

fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    s.split(',').map(|x| parse_value(key, x.trim())).collect()
}

impl Params {
    /// Fill unset options from a config map; flags already given win.
    pub fn merge_config(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        const KNOWN: &[&str] = &[
            "n", "grid", "m", "m-ratio", "j", "j-rule", "regime", "eta", "k", "r", "seed", "fast", "workers", "out",
            "emit-plotdata", "t", "ensemble", "a", "b", "tails", "pilot",
        ];
        if let Some(k) = map.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(invalid(format!("unknown config key '{k}'")));
        }
        fill(&mut self.n, map, "n")?;
        fill(&mut self.grid, map, "grid")?;
        fill(&mut self.m, map, "m")?;
        fill(&mut self.m_ratio, map, "m-ratio")?;
        fill(&mut self.j, map, "j")?;
        fill(&mut self.j_rule, map, "j-rule")?;
        fill(&mut self.regime, map, "regime")?;
        fill(&mut self.eta, map, "eta")?;
        fill(&mut self.k, map, "k")?;
        fill(&mut self.r, map, "r")?;
        fill(&mut self.seed, map, "seed")?;
        fill(&mut self.workers, map, "workers")?;
        fill(&mut self.out, map, "out")?;
        fill(&mut self.t, map, "t")?;
        fill(&mut self.ensemble, map, "ensemble")?;
        fill(&mut self.a, map, "a")?;
        fill(&mut self.b, map, "b")?;
        fill(&mut self.tails, map, "tails")?;
        fill(&mut self.pilot, map, "pilot")?;
        if let Some(v) = map.get("fast") {
            self.fast |= parse_bool("fast", v)?;
        }
        if let Some(v) = map.get("emit-plotdata") {
            self.emit_plotdata |= parse_bool("emit-plotdata", v)?;
        }
        Ok(())
    }

    fn grid(&self) -> Result<Vec<usize>> {
        let grid = match (&self.grid, self.n) {
            (Some(g), _) => parse_list::<usize>("grid", g)?,
            (None, Some(n)) => vec![n],
            (None, None) => return Err(invalid("one of --n or --grid is required")),
        };
        if grid.is_empty() || grid.contains(&0) || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("N grid must be nonempty, positive and strictly ascending"));
        }
        Ok(grid)
    }

    fn single_n(&self) -> Result<usize> {
        let g = self.grid()?;
        if g.len() != 1 {
            return Err(invalid("this command takes a single --n"));
        }
        Ok(g[0])
    }

    fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| invalid(format!("a master seed is required (--seed or {SEED_ENV})")))
    }

    fn replicates(&self, default: usize) -> Result<usize> {
        let r = self.r.unwrap_or(default);
        if r == 0 {
            return Err(invalid("--r must be at least 1"));
        }
        Ok(r)
    }

    fn kind(&self, default: EnsembleKind) -> Result<EnsembleKind> {
        self.ensemble.as_deref().map_or(Ok(default), EnsembleKind::from_str)
    }

    fn spec_for(&self, kind: EnsembleKind, n: usize) -> Result<EnsembleSpec> {
        let m = if kind.is_covariance() {
            match (self.m, self.m_ratio) {
                (Some(m), _) => m,
                (None, ratio) => (ratio.unwrap_or(2.0) * n as f64).round() as usize,
            }
        } else {
            n
        };
        let spec = EnsembleSpec::of_kind(kind, n, m);
        spec.validate()?;
        Ok(spec)
    }

    fn regimes(&self, default: Regime, grid: &[usize]) -> Result<Vec<RegimeSpec>> {
        let names = self.regime.clone().unwrap_or_else(|| format!("{default:?}").to_lowercase());
        let explicit: Option<Vec<(usize, usize)>> = match &self.j {
            None => None,
            Some(s) if s.contains(':') => Some(
                s.split(',')
                    .map(|pair| {
                        let (n, j) = pair
                            .split_once(':')
                            .ok_or_else(|| invalid(format!("invalid N:j pair '{pair}'")))?;
                        Ok((parse_value("j", n.trim())?, parse_value("j", j.trim())?))
                    })
                    .collect::<Result<_>>()?,
            ),
            Some(s) => {
                let j: usize = parse_value("j", s)?;
                Some(grid.iter().map(|&n| (n, j)).collect())
            }
        };
        let rule_map = match self.j_rule.as_deref() {
            None | Some("default") => None,
            Some(rule) => {
                let c: f64 = rule
                    .strip_prefix("sqrt-gap=")
                    .ok_or_else(|| invalid(format!("unknown j rule '{rule}'")))
                    .and_then(|c| parse_value("j-rule", c))?;
                Some(
                    grid.iter()
                        .map(|&n| (n, n.saturating_sub((c * (n as f64).sqrt()).ceil() as usize)))
                        .collect::<Vec<_>>(),
                )
            }
        };
        names
            .split(',')
            .map(|name| {
                let mut spec = RegimeSpec::new(name.trim().parse()?);
                if let Some(eta) = self.eta {
                    if !(eta > 0.0 && eta <= 0.5) {
                        return Err(invalid("--eta must lie in (0, 1/2]"));
                    }
                    spec.eta = eta;
                }
                if let Some(k) = self.k {
                    spec.k = k;
                }
                if spec.regime == Regime::Intermediate {
                    if let Some(map) = explicit.clone().or_else(|| rule_map.clone()) {
                        spec = spec.with_j_map(map);
                    }
                }
                Ok(spec)
            })
            .collect()
    }
}

/// Result of one command before serialisation.
struct Report {
    table: Table,
    summary: serde_json::Value,
    plot: Option<Table>,
}

fn plot_table() -> Table {
    Table::new(&["x", "y", "yerr"])
}

fn cmd_gamma(p: &Params) -> Result<Report> {
    let kind = p.kind(EnsembleKind::Gue)?;
    let mut table = Table::new(&["n", "j", "gamma"]);
    let mut plot = plot_table();
    let mut laws = Vec::new();
    for n in p.grid()? {
        let gammas = if kind.is_covariance() {
            let spec = p.spec_for(kind, n)?;
            MarchenkoPasturLaw::from_dims(spec.m, spec.n)?.gamma_table(n)?
        } else {
            gamma_table(n)?
        };
        for (k, g) in gammas.values.iter().enumerate() {
            table.push(vec![n.into(), (k + 1).into(), (*g).into()]);
            plot.push(vec![((k + 1) as f64 / n as f64).into(), (*g).into(), 0.0.into()]);
        }
        laws.push(json!({ "n": n, "law": gammas.law }));
    }
    Ok(Report { table, summary: json!({ "command": "gamma", "tables": laws }), plot: Some(plot) })
}

fn cmd_sample(p: &Params) -> Result<Report> {
    let kind = p.kind(EnsembleKind::Gue)?;
    let seed = p.seed()?;
    let r = p.replicates(1)?;
    let mut table = Table::new(&["n", "replicate", "j", "eigenvalue"]);
    let mut summary = Vec::new();
    for n in p.grid()? {
        let spec = p.spec_for(kind, n)?;
        let spectra = replicate_map(r, seed, |s| Ok(sample_spectrum(&spec, s, p.fast)?.eigenvalues))?;
        for (rep, ev) in spectra.iter().enumerate() {
            for (k, x) in ev.iter().enumerate() {
                table.push(vec![n.into(), rep.into(), (k + 1).into(), (*x).into()]);
            }
        }
        summary.push(json!({ "spec": spec, "replicates": r }));
    }
    Ok(Report { table, summary: json!({ "command": "sample", "seed": seed, "fast": p.fast, "runs": summary }), plot: None })
}

fn cmd_counting(p: &Params) -> Result<Report> {
    let n = p.single_n()?;
    let t = p.t.unwrap_or(0.0);
    let r = p.replicates(1000)?;
    let seed = p.seed()?;
    let model = KernelModel::new(n)?;
    let kernel = counting_stats(&model, t)?;
    let rep = bernoulli_representation(&model, t)?;
    let bern = sample_countings(&rep, r, crate::rng::stream_seed(seed, "bernoulli"))?;
    let spec = EnsembleSpec::gue(n);
    let direct = replicate_map(r, crate::rng::stream_seed(seed, "direct"), |s| {
        Ok(count_below(&sample_spectrum(&spec, s, p.fast)?.eigenvalues, t))
    })?;
    let bf: Vec<f64> = bern.iter().map(|&c| c as f64).collect();
    let df: Vec<f64> = direct.iter().map(|&c| c as f64).collect();
    let mut table = Table::new(&["replicate", "bernoulli_count", "direct_count"]);
    for (k, (b, d)) in bern.iter().zip(&direct).enumerate() {
        table.push(vec![k.into(), (*b).into(), (*d).into()]);
    }
    let mut plot = plot_table();
    let rf = r as f64;
    for c in 0..=n {
        let freq = bern.iter().filter(|&&b| b == c).count() as f64 / rf;
        if freq > 0.0 {
            plot.push(vec![c.into(), freq.into(), (freq * (1.0 - freq) / rf).sqrt().into()]);
        }
    }
    let direct_var_se = if r >= 2 {
        stats::bootstrap_stderr(&df, 1000, crate::rng::stream_seed(seed, "bootstrap"), &[&stats::variance])[0]
    } else {
        f64::NAN
    };
    let summary = json!({
        "command": "counting",
        "n": n,
        "t": t,
        "replicates": r,
        "seed": seed,
        "kernel_mean": kernel.mean,
        "kernel_variance": kernel.variance,
        "bernoulli_mean": rep.mean(),
        "bernoulli_variance": rep.variance(),
        "bernoulli_terms": rep.probabilities.len(),
        "bernoulli_sample_mean": stats::mean(&bf),
        "bernoulli_sample_variance": if r >= 2 { stats::variance(&bf) } else { f64::NAN },
        "direct_sample_mean": stats::mean(&df),
        "direct_sample_variance": if r >= 2 { stats::variance(&df) } else { f64::NAN },
        "direct_variance_stderr": direct_var_se,
        "ks_bernoulli_vs_direct": stats::ks_two_sample(&bf, &df),
    });
    Ok(Report { table, summary, plot: Some(plot) })
}

fn stats_row(regime: &str, s: &EigenvalueStats, ratio: f64, in_regime: bool) -> Vec<Cell> {
    vec![
        regime.into(),
        s.spec.n.into(),
        s.spec.m.into(),
        s.j.into(),
        s.replicates.into(),
        s.gamma.into(),
        s.mean.into(),
        s.variance.into(),
        s.msd.into(),
        s.mean_stderr.into(),
        s.variance_stderr.into(),
        s.msd_stderr.into(),
        ratio.into(),
        in_regime.into(),
    ]
}

const STATS_HEADER: &[&str] = &[
    "regime", "n", "m", "j", "replicates", "gamma", "mean", "variance", "msd", "mean_stderr", "variance_stderr",
    "msd_stderr", "ratio", "in_regime",
];

fn cmd_scan(p: &Params, default_kind: EnsembleKind, default_regime: Regime, name: &str) -> Result<Report> {
    let kind = p.kind(default_kind)?;
    let grid = p.grid()?;
    let regimes = p.regimes(default_regime, &grid)?;
    let r = p.replicates(2000)?;
    let seed = p.seed()?;
    let specs = grid.iter().map(|&n| Ok((n, p.spec_for(kind, n)?))).collect::<Result<BTreeMap<_, _>>>()?;
    let family = |n: usize| specs[&n].clone();
    let scans = variance_scan_multi(&family, &grid, &regimes, r, seed, false)?;
    let mut table = Table::new(STATS_HEADER);
    let mut plot = plot_table();
    let mut out = Vec::new();
    for scan in &scans {
        let label = format!("{:?}", scan.regime.regime).to_lowercase();
        for (s, ratio) in scan.stats.iter().zip(&scan.ratios) {
            table.push(stats_row(&label, s, *ratio, scan.regime.contains(s.spec.n, s.j)));
            plot.push(vec![s.spec.n.into(), s.variance.into(), s.variance_stderr.into()]);
        }
        let mut entry = json!({
            "regime": scan.regime,
            "ratios": scan.ratios,
            "ratio_spread": scan.ratio_spread,
            "fit": scan.fit,
            "log_fit": scan.log_fit,
        });
        if let Some(tails) = &p.tails {
            entry["tails"] = deviation_tails(p, &scan.regime, &grid, &specs, &parse_list::<f64>("tails", tails)?, seed)?;
        }
        out.push(entry);
    }
    if kind.is_covariance() {
        let edges = grid
            .iter()
            .map(|n| {
                let s = &specs[n];
                let law = MarchenkoPasturLaw::from_dims(s.m, s.n)?;
                Ok(json!({ "n": n, "m": s.m, "rho": law.rho, "lower_edge": law.a, "upper_edge": law.b }))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(Report {
            table,
            summary: json!({ "command": name, "ensemble": kind.name(), "seed": seed, "replicates": r, "scans": out, "laws": edges }),
            plot: Some(plot),
        });
    }
    Ok(Report {
        table,
        summary: json!({ "command": name, "ensemble": kind.name(), "seed": seed, "replicates": r, "scans": out }),
        plot: Some(plot),
    })
}

fn deviation_tails(
    p: &Params,
    regime: &RegimeSpec,
    grid: &[usize],
    specs: &BTreeMap<usize, EnsembleSpec>,
    us: &[f64],
    seed: u64,
) -> Result<serde_json::Value> {
    let pilot = p.pilot.unwrap_or(1000);
    let r = p.replicates(2000)?;
    let u_max = us.iter().cloned().fold(0.0, f64::max);
    let mut rows = Vec::new();
    for &n in grid {
        let spec = &specs[&n];
        let j = regime.index_for(n)?;
        let tail_seed = crate::rng::stream_seed(seed, &format!("tails n={n}"));
        let (cal, tails) = match regime.regime {
            Regime::Bulk => {
                let cal = calibrate_bulk(spec, j, u_max, pilot, seed)?;
                let tails = bulk_deviation_tails(spec, j, us, &cal, r, tail_seed)?;
                (cal, tails)
            }
            Regime::Intermediate => {
                let cal = calibrate_intermediate(spec, j, u_max, pilot, seed)?;
                let tails = intermediate_deviation_tails(spec, j, us, &cal, r, tail_seed)?;
                (cal, tails)
            }
            Regime::Edge => return Err(invalid("tail bounds are defined for the bulk and intermediate regimes")),
        };
        let dominated = tails.iter().all(|t| t.dominated());
        rows.push(json!({ "n": n, "j": j, "calibration": cal, "rows": tails, "dominated": dominated }));
    }
    Ok(serde_json::Value::Array(rows))
}

fn cmd_universality(p: &Params) -> Result<Report> {
    let n = p.single_n()?;
    let a = p.spec_for(p.a.as_deref().map_or(Ok(EnsembleKind::Gue), EnsembleKind::from_str)?, n)?;
    let b = p.spec_for(
        p.b.as_deref().map_or(Ok(EnsembleKind::WignerComplexMatched), EnsembleKind::from_str)?,
        n,
    )?;
    let j = match &p.j {
        Some(s) => parse_value("j", s)?,
        None => n.div_ceil(2),
    };
    let r = p.replicates(4000)?;
    let seed = p.seed()?;
    let gap = universality_gap(&a, &b, j, r, seed)?;
    let mut table = Table::new(&[
        "ensemble", "n", "j", "replicates", "gamma", "mean", "variance", "msd", "mean_stderr", "variance_stderr",
        "msd_stderr",
    ]);
    let mut plot = plot_table();
    for (k, s) in [&gap.a, &gap.b].into_iter().enumerate() {
        table.push(vec![
            s.spec.kind.name().into(),
            s.spec.n.into(),
            s.j.into(),
            s.replicates.into(),
            s.gamma.into(),
            s.mean.into(),
            s.variance.into(),
            s.msd.into(),
            s.mean_stderr.into(),
            s.variance_stderr.into(),
            s.msd_stderr.into(),
        ]);
        plot.push(vec![k.into(), s.msd.into(), s.msd_stderr.into()]);
    }
    let summary = json!({
        "command": "universality",
        "a": a.kind.name(),
        "b": b.kind.name(),
        "n": n,
        "j": j,
        "replicates": r,
        "seed": seed,
        "gap": gap.gap,
        "pooled_stderr": gap.pooled_stderr,
        "z": gap.gap / gap.pooled_stderr,
    });
    Ok(Report { table, summary, plot: Some(plot) })
}

fn cmd_interlace(p: &Params) -> Result<Report> {
    let n = p.single_n()?;
    let t = p.t.unwrap_or(0.0);
    let r = p.replicates(5000)?;
    let seed = p.seed()?;
    let c = interlacing_mean_check(n, t, r, seed)?;
    let mut table = Table::new(&["n", "t", "replicates", "gue_mean", "goe_mean", "goe_prime_mean", "delta", "stderr"]);
    table.push(vec![
        n.into(),
        t.into(),
        r.into(),
        c.gue_mean.into(),
        c.goe_mean.into(),
        c.goe_prime_mean.into(),
        c.delta.into(),
        c.stderr.into(),
    ]);
    let mut plot = plot_table();
    plot.push(vec![t.into(), c.delta.into(), c.stderr.into()]);
    let summary = json!({
        "command": "interlace",
        "n": n,
        "seed": seed,
        "replicates": r,
        "check": c,
        "within_limit": c.delta <= 1.0 + 3.0 * c.stderr,
    });
    Ok(Report { table, summary, plot: Some(plot) })
}

fn cmd_transport(p: &Params) -> Result<Report> {
    let kind = p.kind(EnsembleKind::Gue)?;
    let r = p.replicates(500)?;
    let seed = p.seed()?;
    let mut table = Table::new(&["n", "replicate", "w2_squared", "term1", "term2", "bound", "w1", "kolmogorov"]);
    let mut plot = plot_table();
    let mut per_n = Vec::new();
    let mut ratios = Vec::new();
    for n in p.grid()? {
        let spec = p.spec_for(kind, n)?;
        let exp = expected_w2_experiment(&spec, r, crate::rng::stream_seed(seed, &format!("n={n}")))?;
        for k in 0..exp.samples.len() {
            let d = exp.bounds[k];
            table.push(vec![
                n.into(),
                k.into(),
                exp.samples[k].into(),
                d.term1.into(),
                d.term2.into(),
                d.bound.into(),
                exp.w1[k].into(),
                exp.kolmogorov[k].into(),
            ]);
        }
        let nf = n as f64;
        let ratio = exp.mean * nf * nf / nf.ln();
        ratios.push(ratio);
        plot.push(vec![n.into(), exp.mean.into(), exp.stderr.into()]);
        per_n.push(json!({
            "n": n,
            "mean_w2_squared": exp.mean,
            "stderr": exp.stderr,
            "ratio": ratio,
            "mean_w1": stats::mean(&exp.w1),
            "mean_kolmogorov": stats::mean(&exp.kolmogorov),
            "bound_violations": exp.samples.iter().zip(&exp.bounds).filter(|(w, d)| **w > d.bound + 1e-9).count(),
            "first_jensen_violation": exp.first_jensen_violation(),
        }));
    }
    let summary = json!({
        "command": "transport",
        "ensemble": kind.name(),
        "seed": seed,
        "replicates": r,
        "per_n": per_n,
        "ratio_spread": stats::spread_ratio(&ratios),
    });
    Ok(Report { table, summary, plot: Some(plot) })
}

fn execute(command: &Command) -> Result<(&'static str, Report)> {
    Ok(match command {
        Command::Gamma(p) => ("gamma", cmd_gamma(p)?),
        Command::Sample(p) => ("sample", cmd_sample(p)?),
        Command::Counting(p) => ("counting", cmd_counting(p)?),
        Command::Scan(p) => ("scan", cmd_scan(p, EnsembleKind::Gue, Regime::Bulk, "scan")?),
        Command::Universality(p) => ("universality", cmd_universality(p)?),
        Command::Interlace(p) => ("interlace", cmd_interlace(p)?),
        Command::Transport(p) => ("transport", cmd_transport(p)?),
        Command::Covariance(p) => ("covariance", cmd_scan(p, EnsembleKind::Lue, Regime::Edge, "covariance")?),
    })
}

fn params_mut(command: &mut Command) -> &mut Params {
    match command {
        Command::Gamma(p)
        | Command::Sample(p)
        | Command::Counting(p)
        | Command::Scan(p)
        | Command::Universality(p)
        | Command::Interlace(p)
        | Command::Transport(p)
        | Command::Covariance(p) => p,
    }
}

/// Exit code for an error: 2 for numerical failures, 1 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NumericGuard(_) | Error::NoConvergence { .. } => 2,
        _ => 1,
    }
}

fn run_inner(mut cli: Cli, env_seed: Option<&str>, stdout: &mut dyn Write) -> Result<()> {
    let started = Instant::now();
    let params = params_mut(&mut cli.command);
    if let Some(path) = params.config.clone() {
        params.merge_config(&config::load(&path)?)?;
    }
    if params.seed.is_none() {
        if let Some(s) = env_seed {
            params.seed = Some(parse_value(SEED_ENV, s.trim())?);
        }
    }
    let params = params.clone();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = params.workers {
        if w == 0 {
            return Err(invalid("--workers must be at least 1"));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    let (name, report) = pool.install(|| execute(&cli.command))?;
    let csv = report.table.to_csv();
    let summary = serde_json::to_string_pretty(&report.summary).map_err(|e| invalid(e.to_string()))? + "\n";
    match &params.out {
        None => stdout.write_all(csv.as_bytes()).map_err(|e| invalid(format!("cannot write output: {e}")))?,
        Some(dir) => {
            let mut files = vec![(format!("{name}.csv"), csv), ("summary.json".to_string(), summary)];
            if params.emit_plotdata {
                if let Some(plot) = &report.plot {
                    files.push(("plotdata.csv".to_string(), plot.to_csv()));
                }
            }
            let checksums = output::write_files(dir, &files)?;
            let manifest = output::RunManifest {
                command: name,
                version: env!("CARGO_PKG_VERSION"),
                config: &params,
                wall_clock_seconds: started.elapsed().as_secs_f64(),
                files: checksums,
            };
            let body = serde_json::to_string_pretty(&manifest).map_err(|e| invalid(e.to_string()))? + "\n";
            output::write_files(dir, &[("manifest.json".to_string(), body)])?;
        }
    }
    Ok(())
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, env_seed: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run_inner(cli, env_seed, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["rmt-lab"];
        full.extend_from_slice(args);
        let code = run(full, None, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn gamma_table_rows() {
        let (code, out, _) = run_capture(&["gamma", "--n", "4"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "n,j,gamma");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "4,2,0.0000000000000000e0");
    }

    #[test]
    fn missing_seed_is_config_error() {
        let (code, _, err) = run_capture(&["sample", "--n", "4"]);
        assert_eq!(code, 1);
        assert!(err.contains("seed"));
    }

    #[test]
    fn bad_flag_exits_one() {
        assert_eq!(run_capture(&["gamma", "--bogus"]).0, 1);
        assert_eq!(run_capture(&["scan", "--grid", "64,32", "--seed", "1"]).0, 1);
        assert_eq!(run_capture(&["--help"]).0, 0);
    }

    #[test]
    fn env_seed_and_flag_precedence() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut c = Vec::new();
        let mut e = Vec::new();
        assert_eq!(run(["rmt-lab", "sample", "--n", "3"], Some("5"), &mut a, &mut e), 0);
        assert_eq!(run(["rmt-lab", "sample", "--n", "3", "--seed", "5"], Some("9"), &mut b, &mut e), 0);
        assert_eq!(run(["rmt-lab", "sample", "--n", "3", "--seed", "9"], None, &mut c, &mut e), 0);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn fast_path_refused_for_matched() {
        let (code, _, _) = run_capture(&["sample", "--n", "4", "--seed", "1", "--fast", "--ensemble", "wigner-real-matched"]);
        assert_eq!(code, 1);
    }
}
