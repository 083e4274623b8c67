use rmt_lab::counting::{
    bernoulli_representation, count_below, counting_deviation_bound, counting_stats, eigenvalue_deviation_bound_intermediate,
    goe_counting_bound, sample_countings, KernelModel,
};
use rmt_lab::ensembles::{replicate_map, sample_spectrum, EnsembleSpec};
use rmt_lab::estimators::{calibrate_intermediate, intermediate_deviation_tails};
use rmt_lab::stats::{self, ks_two_sample, wilson_upper};

fn direct_counts(spec: &EnsembleSpec, t: f64, r: usize, seed: u64) -> Vec<f64> {
    replicate_map(r, seed, |s| Ok(count_below(&sample_spectrum(spec, s, true)?.eigenvalues, t) as f64)).unwrap()
}

#[test]
fn kernel_moments_match_direct_counts() {
    let model = KernelModel::new(64).unwrap();
    let k = counting_stats(&model, 0.0).unwrap();
    let counts = direct_counts(&EnsembleSpec::gue(64), 0.0, 10_000, 3);
    let mc_mean = stats::mean(&counts);
    assert!((k.mean - 32.0).abs() <= 1.0);
    assert!((mc_mean - k.mean).abs() <= 1.0);
    let v = stats::variance(&counts);
    let se = stats::bootstrap_stderr(&counts, 1000, 4, &[&stats::variance])[0];
    assert!((k.variance - v).abs() <= 3.0 * se, "kernel {} vs MC {v} +- {se}", k.variance);
}

#[test]
fn bernoulli_sum_matches_direct_counts() {
    let model = KernelModel::new(16).unwrap();
    let rep = bernoulli_representation(&model, 0.0).unwrap();
    let k = counting_stats(&model, 0.0).unwrap();
    assert!((rep.mean() - k.mean).abs() <= 1e-3 * 16.0);
    let bern: Vec<f64> = sample_countings(&rep, 100_000, 5).unwrap().into_iter().map(|c| c as f64).collect();
    let se = (stats::variance(&bern) / bern.len() as f64).sqrt();
    assert!((stats::mean(&bern) - rep.mean()).abs() <= 3.0 * se);
    let direct = direct_counts(&EnsembleSpec::gue(16), 0.0, 10_000, 6);
    assert!(ks_two_sample(&bern, &direct) <= 0.05);
}

fn tail_fraction(counts: &[f64], centre: f64, level: f64) -> (usize, usize) {
    (counts.iter().filter(|&&c| (c - centre).abs() >= level).count(), counts.len())
}

#[test]
fn gue_counting_tail_below_bound() {
    let model = KernelModel::new(64).unwrap();
    let sigma2 = counting_stats(&model, 0.0).unwrap().variance;
    let (offset, bound) = counting_deviation_bound(sigma2, 5.0, 1.0);
    let counts = direct_counts(&EnsembleSpec::gue(64), 0.0, 10_000, 7);
    let (hits, r) = tail_fraction(&counts, 32.0, offset);
    assert!((hits as f64 / r as f64) <= bound, "{hits}/{r} vs {bound}");
    assert!(wilson_upper(hits, r, 1.96) <= bound);
}

#[test]
fn goe_counting_tail_below_bound() {
    let model = KernelModel::new(64).unwrap();
    let sigma2 = counting_stats(&model, 0.0).unwrap().variance;
    let (offset, bound) = goe_counting_bound(sigma2, 6.0, 2.0);
    let counts = direct_counts(&EnsembleSpec::goe(64), 0.0, 10_000, 8);
    let (hits, r) = tail_fraction(&counts, 32.0, offset);
    assert!((hits as f64 / r as f64) <= bound, "{hits}/{r} vs {bound}");
}

#[test]
fn intermediate_tail_below_calibrated_bound() {
    let spec = EnsembleSpec::gue(512);
    let j = 512 - 64;
    let cal = calibrate_intermediate(&spec, j, 10.0, 500, 9).unwrap();
    assert!(cal.variance_constant > 0.0);
    let rows = intermediate_deviation_tails(&spec, j, &[6.0, 10.0], &cal, 2000, 10).unwrap();
    for r in &rows {
        assert!(r.empirical <= r.bound, "{r:?}");
        let direct = eigenvalue_deviation_bound_intermediate(512, j, r.u, cal.variance_constant);
        assert_eq!(direct, r.bound);
    }
}
