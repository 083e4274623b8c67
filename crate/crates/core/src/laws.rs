//! Semicircle and Marchenko–Pastur laws, theoretical eigenvalue locations and
//! the deterministic bounds on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::GaussLegendre;

const BISECTION_STEPS: usize = 80;
const NEWTON_STEPS: usize = 5;

/// Semicircle density (1/2pi) sqrt(4 - x^2) on [-2, 2].
pub fn sc_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

/// Semicircle distribution function G.
pub fn sc_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    (0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (0.5 * x).asin() / PI).clamp(0.0, 1.0)
}

/// G^{-1}(p): bisection on [-2, 2], then Newton polish kept inside the bracket.
pub fn sc_quantile(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(-2.0);
    }
    if p == 1.0 {
        return Ok(2.0);
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // G(-x) = 1 - G(x), and 1 - p is exact for p in [1/2, 1]
    if p > 0.5 {
        return Ok(-lower_half_quantile(1.0 - p));
    }
    Ok(lower_half_quantile(p))
}

fn lower_half_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-2.0f64, 0.0f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if sc_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1e-300) {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..NEWTON_STEPS {
        let f = sc_cdf(x) - p;
        let d = sc_density(x);
        if f == 0.0 || d <= 0.0 {
            break;
        }
        let next = x - f / d;
        if !(next > lo && next < hi) {
            break;
        }
        x = next;
    }
    x
}

/// Which law a [`QuantileTable`] was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum LawTag {
    Semicircle,
    MarchenkoPastur { rho: f64 },
}

/// gamma_1..gamma_N, the j/N quantiles of a spectral law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub n: usize,
    pub law: LawTag,
    pub values: Vec<f64>,
}

impl QuantileTable {
    /// gamma_j for 1 <= j <= N; gamma_0 is the lower support edge.
    pub fn gamma(&self, j: usize) -> f64 {
        if j == 0 {
            match self.law {
                LawTag::Semicircle => -2.0,
                LawTag::MarchenkoPastur { rho } => (1.0 - rho.sqrt()).powi(2),
            }
        } else {
            self.values[j - 1]
        }
    }
}

/// Semicircle locations gamma_j = G^{-1}(j/N).
pub fn gamma_table(n: usize) -> Result<QuantileTable> {
    if n == 0 {
        return Err(invalid("gamma table needs N >= 1"));
    }
    let values = (1..=n)
        .map(|j| sc_quantile(j as f64 / n as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantileTable { n, law: LawTag::Semicircle, values })
}

/// Two-sided bound (lo, hi) with lo <= 2 - gamma_j <= hi, for N/2 <= j <= N.
pub fn gamma_edge_bounds(n: usize, j: usize) -> Result<(f64, f64)> {
    if 2 * j < n || j > n {
        return Err(invalid(format!("edge bounds need N/2 <= j <= N, got j = {j}, N = {n}")));
    }
    let frac = (n - j) as f64 / n as f64;
    let lo = (1.5 * PI * frac).powf(2.0 / 3.0);
    let hi = (3.0 * PI / 2f64.sqrt() * frac).powf(2.0 / 3.0);
    Ok((lo, hi))
}

/// (3 pi)^(2/3) 2^(-1/6).
pub fn spacing_constant() -> f64 {
    (3.0 * PI).powf(2.0 / 3.0) * 2f64.powf(-1.0 / 6.0)
}

/// Upper bound on gamma_j - gamma_{j-1}, for 2 <= j <= N.
pub fn gamma_spacing_bound(n: usize, j: usize) -> Result<f64> {
    if j < 2 || j > n {
        return Err(invalid(format!("spacing bound needs 2 <= j <= N, got j = {j}, N = {n}")));
    }
    let k = j.min(n + 1 - j) as f64;
    Ok(spacing_constant() / ((n as f64).powf(2.0 / 3.0) * k.cbrt()))
}

/// Marchenko–Pastur edges for an m x n data matrix, m >= n.
pub fn mp_edges(m: usize, n: usize) -> Result<(f64, f64)> {
    if n == 0 || m < n {
        return Err(invalid(format!("need m >= n >= 1, got m = {m}, n = {n}")));
    }
    let r = (m as f64 / n as f64).sqrt();
    Ok(((1.0 - r).powi(2), (1.0 + r).powi(2)))
}

/// Requests below this probability are refused when rho = 1.
pub const HARD_EDGE_MIN_P: f64 = 1e-3;

const MP_PANELS: usize = 64;
const MP_NODES: usize = 64;

/// Marchenko–Pastur law of ratio rho >= 1 with a cached distribution function.
///
/// The cdf is integrated in the angle variable x = a + (b - a) sin^2(theta / 2),
/// which removes both square-root endpoints and leaves a smooth integrand.
#[derive(Debug, Clone)]
pub struct MarchenkoPasturLaw {
    pub rho: f64,
    pub a: f64,
    pub b: f64,
    rule: GaussLegendre,
    panel: f64,
    cumulative: Vec<f64>,
}

impl MarchenkoPasturLaw {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho >= 1.0 && rho.is_finite()) {
            return Err(invalid(format!("Marchenko-Pastur ratio must be >= 1, got {rho}")));
        }
        let r = rho.sqrt();
        let (a, b) = ((1.0 - r).powi(2), (1.0 + r).powi(2));
        let rule = GaussLegendre::new(MP_NODES);
        let panel = PI / MP_PANELS as f64;
        let mut law = Self { rho, a, b, rule, panel, cumulative: Vec::new() };
        let mut cumulative = Vec::with_capacity(MP_PANELS + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for k in 0..MP_PANELS {
            acc += law.panel_integral(k as f64 * panel, (k + 1) as f64 * panel, 1e-12);
            cumulative.push(acc);
        }
        law.cumulative = cumulative;
        Ok(law)
    }

    /// Law with rho = m / n.
    pub fn from_dims(m: usize, n: usize) -> Result<Self> {
        mp_edges(m, n)?;
        Self::new(m as f64 / n as f64)
    }

    fn x_of_theta(&self, theta: f64) -> f64 {
        let s = (0.5 * theta).sin();
        self.a + (self.b - self.a) * s * s
    }

    fn theta_of_x(&self, x: f64) -> f64 {
        let u = ((x - self.a) / (self.b - self.a)).clamp(0.0, 1.0);
        2.0 * u.sqrt().asin()
    }

    fn integrand(&self, theta: f64) -> f64 {
        let half = 0.5 * (self.b - self.a);
        let s = theta.sin();
        half * half * s * s / (2.0 * PI * self.x_of_theta(theta))
    }

    /// Panel integral, split until one panel and its two halves agree to `tol`.
    fn panel_integral(&self, lo: f64, hi: f64, tol: f64) -> f64 {
        let whole = self.rule.integrate(lo, hi, |t| self.integrand(t));
        let mid = 0.5 * (lo + hi);
        let split = self.rule.integrate(lo, mid, |t| self.integrand(t))
            + self.rule.integrate(mid, hi, |t| self.integrand(t));
        if (whole - split).abs() < tol || hi - lo < 1e-10 {
            split
        } else {
            self.panel_integral(lo, mid, 0.5 * tol) + self.panel_integral(mid, hi, 0.5 * tol)
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b || x <= 0.0 {
            return 0.0;
        }
        ((self.b - x) * (x - self.a)).sqrt() / (2.0 * PI * x)
    }

    /// Integral of the density over the whole support (1 up to quadrature error).
    pub fn total_mass(&self) -> f64 {
        self.cumulative[MP_PANELS]
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return 1.0;
        }
        self.cdf_at_theta(self.theta_of_x(x))
    }

    fn cdf_at_theta(&self, theta: f64) -> f64 {
        let k = ((theta / self.panel) as usize).min(MP_PANELS - 1);
        let start = k as f64 * self.panel;
        let partial = self.rule.integrate(start, theta, |t| self.integrand(t));
        (self.cumulative[k] + partial).clamp(0.0, 1.0)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("probability {p} outside [0, 1]")));
        }
        if self.a == 0.0 && p < HARD_EDGE_MIN_P {
            return Err(invalid(format!(
                "quantile {p} too close to the hard edge of the rho = 1 law"
            )));
        }
        if p == 0.0 {
            return Ok(self.a);
        }
        if p == 1.0 {
            return Ok(self.b);
        }
        let (mut lo, mut hi) = (0.0f64, PI);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if self.cdf_at_theta(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(self.x_of_theta(0.5 * (lo + hi)))
    }

    /// gamma_j = quantile(j / N) for j = 1..N.
    pub fn gamma_table(&self, n: usize) -> Result<QuantileTable> {
        if n == 0 {
            return Err(invalid("gamma table needs N >= 1"));
        }
        let values = (1..=n)
            .map(|j| self.quantile(j as f64 / n as f64))
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantileTable { n, law: LawTag::MarchenkoPastur { rho: self.rho }, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;
    use proptest::prelude::*;

    fn quad_cdf(x: f64) -> f64 {
        adaptive(&sc_density, -2.0, x, 1e-15)
    }

    #[test]
    fn density_examples() {
        assert!((sc_density(0.0) - 1.0 / PI).abs() < 1e-16);
        assert_eq!(sc_density(2.0), 0.0);
        assert_eq!(sc_density(-2.0), 0.0);
        assert!((sc_density(1.0) - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn density_moments_by_quadrature() {
        let mass = adaptive(&sc_density, -2.0, 2.0, 1e-15);
        let second = adaptive(&|x| x * x * sc_density(x), -2.0, 2.0, 1e-15);
        assert!((mass - 1.0).abs() < 1e-12);
        assert!((second - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(sc_cdf(0.0), 0.5);
        assert_eq!(sc_cdf(2.0), 1.0);
        assert_eq!(sc_cdf(-2.0), 0.0);
        let q = quad_cdf(1.0);
        assert!((sc_cdf(1.0) - q).abs() < 1e-12);
        assert!((sc_cdf(1.0) - 0.804).abs() < 1e-3);
        for &x in &[-1.9, -1.0, -0.3, 0.7, 1.5, 1.99] {
            assert!((sc_cdf(x) - quad_cdf(x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(sc_quantile(0.5).unwrap(), 0.0);
        assert_eq!(sc_quantile(1.0).unwrap(), 2.0);
        assert_eq!(sc_quantile(0.0).unwrap(), -2.0);
        let x = sc_quantile(0.25).unwrap();
        assert!((quad_cdf(x) - 0.25).abs() < 1e-10);
        assert!(sc_quantile(1.5).is_err());
        assert!(sc_quantile(-0.1).is_err());
    }

    #[test]
    fn gamma_table_examples() {
        let t2 = gamma_table(2).unwrap();
        assert_eq!(t2.values, vec![0.0, 2.0]);
        assert_eq!(gamma_table(4).unwrap().values[1], 0.0);
        let t16 = gamma_table(16).unwrap();
        for (j, g) in t16.values.iter().enumerate() {
            assert!((quad_cdf(*g) - (j + 1) as f64 / 16.0).abs() <= 1e-10);
        }
        assert_eq!(t16.gamma(0), -2.0);
    }

    #[test]
    fn edge_bound_examples() {
        assert_eq!(gamma_edge_bounds(10, 10).unwrap(), (0.0, 0.0));
        let (lo, hi) = gamma_edge_bounds(100, 90).unwrap();
        assert!((lo - (3.0 * PI / 20.0).powf(2.0 / 3.0)).abs() < 1e-15);
        assert!((hi - (3.0 * PI / (10.0 * 2f64.sqrt())).powf(2.0 / 3.0)).abs() < 1e-15);
        assert!(lo < hi);
        let g = gamma_table(64).unwrap().gamma(48);
        let (lo, hi) = gamma_edge_bounds(64, 48).unwrap();
        assert!(lo <= 2.0 - g && 2.0 - g <= hi);
        assert!(gamma_edge_bounds(64, 31).is_err());
    }

    #[test]
    fn spacing_bound_examples() {
        let c = spacing_constant();
        assert!((gamma_spacing_bound(100, 100).unwrap() - c / 100f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert!(
            (gamma_spacing_bound(100, 50).unwrap() - c / (100f64.powf(2.0 / 3.0) * 50f64.cbrt())).abs()
                < 1e-15
        );
        assert!(gamma_spacing_bound(100, 1).is_err());
        let t = gamma_table(256).unwrap();
        for j in 2..=256 {
            assert!(t.gamma(j) - t.gamma(j - 1) <= gamma_spacing_bound(256, j).unwrap());
        }
    }

    #[test]
    fn table_invariants_across_sizes() {
        for &n in &[16usize, 64, 256, 1024] {
            let t = gamma_table(n).unwrap();
            for j in 1..=n {
                let g = t.gamma(j);
                assert!((sc_cdf(g) - j as f64 / n as f64).abs() <= 1e-10);
                if 2 * j >= n {
                    let (lo, hi) = gamma_edge_bounds(n, j).unwrap();
                    assert!(lo <= 2.0 - g + 1e-15 && 2.0 - g <= hi + 1e-15, "N={n} j={j}");
                }
                if j >= 2 {
                    assert!(g > t.gamma(j - 1));
                    assert!(g - t.gamma(j - 1) <= gamma_spacing_bound(n, j).unwrap());
                }
            }
        }
    }

    #[test]
    fn cdf_is_monotone_on_grid() {
        let mut prev = 0.0;
        for k in 0..=10_000 {
            let x = -2.5 + 5.0 * k as f64 / 10_000.0;
            let g = sc_cdf(x);
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn mp_edge_examples() {
        assert_eq!(mp_edges(5, 5).unwrap(), (0.0, 4.0));
        assert_eq!(mp_edges(40, 10).unwrap(), (1.0, 9.0));
        let (a, b) = mp_edges(20, 10).unwrap();
        assert!((a - (1.0 - 2f64.sqrt()).powi(2)).abs() < 1e-15);
        assert!((b - (1.0 + 2f64.sqrt()).powi(2)).abs() < 1e-15);
        assert!(mp_edges(3, 4).is_err());
    }

    #[test]
    fn mp_normalization_and_quantiles() {
        for rho in [1.0, 2.0, 4.0] {
            let law = MarchenkoPasturLaw::new(rho).unwrap();
            assert!((law.total_mass() - 1.0).abs() < 1e-10, "rho = {rho}");
            assert_eq!(law.density(law.a), 0.0);
            assert_eq!(law.density(law.b), 0.0);
            // oracle in x space (a = 0 has an integrable 1/sqrt(x) endpoint)
            let oracle = adaptive(&|x| law.density(x), law.a, law.b, 1e-13);
            assert!((oracle - 1.0).abs() < 1e-8, "rho = {rho}: {oracle}");
        }
        let law = MarchenkoPasturLaw::new(4.0).unwrap();
        assert!(law.cdf(law.a).abs() < 1e-10);
        assert!((law.cdf(law.b) - 1.0).abs() < 1e-10);
        let med = law.quantile(0.5).unwrap();
        let oracle = adaptive(&|x| law.density(x), law.a, med, 1e-14);
        assert!((oracle - 0.5).abs() < 1e-9);
        assert!((law.cdf(med) - 0.5).abs() < 1e-10);
        // mean of MP(rho) is rho
        let mean = adaptive(&|x| x * law.density(x), law.a, law.b, 1e-13);
        assert!((mean - 4.0).abs() < 1e-9);
    }

    #[test]
    fn mp_hard_edge_refused() {
        let law = MarchenkoPasturLaw::new(1.0).unwrap();
        assert!(law.quantile(1e-6).is_err());
        assert!(law.quantile(0.5).is_ok());
        assert!(law.quantile(1.5).is_err());
        assert!(MarchenkoPasturLaw::new(0.5).is_err());
    }

    proptest! {
        #[test]
        fn quantile_round_trip(p in 0.0f64..=1.0) {
            let x = sc_quantile(p).unwrap();
            prop_assert!((sc_cdf(x) - p).abs() <= 1e-12);
        }

        #[test]
        fn mp_quantile_round_trip(p in 0.01f64..0.99, rho in 1.5f64..6.0) {
            let law = MarchenkoPasturLaw::new(rho).unwrap();
            let x = law.quantile(p).unwrap();
            prop_assert!((law.cdf(x) - p).abs() <= 1e-10);
        }
    }
}
