use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::laws::sc_density;
use crate::quadrature::{CompositeRule, GaussLegendre};

/// Construction parameters for [`KernelModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    /// Initial truncation margin: the window is [-2 - delta, 2 + delta].
    pub delta: f64,
    pub nodes_per_panel: usize,
    /// Initial panel width; halved until width * N <= `resolution`.
    pub panel_width: f64,
    /// Largest panel width times N. The kernel oscillates on a scale ~ 1/N.
    pub resolution: f64,
    /// Largest supported order.
    pub max_order: usize,
    /// |integral of K(x,x) over the window - N| must be below this times N.
    pub mass_tolerance: f64,
    /// Kernel mass outside the window must be below this times N.
    pub tail_tolerance: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            delta: 0.5,
            nodes_per_panel: 64,
            panel_width: 0.25,
            resolution: 32.0,
            max_order: 2048,
            mass_tolerance: 1e-6,
            tail_tolerance: 1e-8,
        }
    }
}

const MAX_WIDENINGS: usize = 4;
const MAX_REFINEMENTS: usize = 4;
const RESCALE: f64 = 1e150;

/// Values f_k(x) = N^(1/4) phi_k(sqrt(N) x), k < N, written to `out`.
///
/// phi_k are the orthonormal oscillator functions of the weight e^(-u^2/2),
/// generated by the three-term recurrence with a running exponent so that
/// e^(-u^2/4) cannot underflow before the polynomial part grows.
pub fn scaled_oscillators(n: usize, x: f64, out: &mut [f64]) {
    let nf = n as f64;
    let u = nf.sqrt() * x;
    let mut log_scale = -0.25 * u * u - 0.25 * (2.0 * PI).ln() + 0.25 * nf.ln();
    let mut factor = log_scale.exp();
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    for (k, slot) in out.iter_mut().enumerate().take(n) {
        *slot = cur * factor;
        let kf = k as f64;
        let next = (u * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
            factor = log_scale.exp();
        }
    }
}

/// The order-N Christoffel–Darboux kernel of GUE eigenvalues in the scaled
/// coordinates of W = M / sqrt(N), with its quadrature on a truncated window.
#[derive(Debug, Clone)]
pub struct KernelModel {
    pub n: usize,
    pub delta: f64,
    pub panel_width: f64,
    pub config: KernelConfig,
    rule: GaussLegendre,
    window: CompositeRule,
    window_mass: f64,
}

impl KernelModel {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_config(n, KernelConfig::default())
    }

    pub fn with_config(n: usize, config: KernelConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("kernel order must be positive".into()));
        }
        if n > config.max_order {
            return Err(Error::NumericGuard(format!(
                "kernel order {n} exceeds the cap {}",
                config.max_order
            )));
        }
        let rule = GaussLegendre::new(config.nodes_per_panel);
        let mut width = config.panel_width;
        while width * n as f64 > config.resolution {
            width *= 0.5;
        }
        let nf = n as f64;
        let mut delta = config.delta;
        let mut widenings = 0;
        loop {
            let mut model = Self {
                n,
                delta,
                panel_width: width,
                config: config.clone(),
                rule: rule.clone(),
                window: CompositeRule::tile(&rule, -2.0 - delta, 2.0 + delta, width),
                window_mass: 0.0,
            };
            model.window_mass = model.diagonal_mass(&model.window);
            let wide = CompositeRule::tile(&rule, -2.0 - 2.0 * delta, 2.0 + 2.0 * delta, width);
            let tail = model.diagonal_mass(&wide) - model.window_mass;
            if tail.abs() >= config.tail_tolerance * nf {
                if widenings == MAX_WIDENINGS {
                    return Err(Error::NumericGuard(format!(
                        "kernel mass {tail:e} outside [-{w}, {w}] at N = {n}",
                        w = 2.0 + delta
                    )));
                }
                widenings += 1;
                delta *= 2.0;
                continue;
            }
            let mut refinements = 0;
            while (model.window_mass - nf).abs() > config.mass_tolerance * nf {
                if refinements == MAX_REFINEMENTS {
                    return Err(Error::NumericGuard(format!(
                        "window mass {} differs from N = {n}",
                        model.window_mass
                    )));
                }
                refinements += 1;
                model.panel_width *= 0.5;
                model.window = CompositeRule::tile(&rule, model.lo(), model.hi(), model.panel_width);
                model.window_mass = model.diagonal_mass(&model.window);
            }
            return Ok(model);
        }
    }

    pub fn lo(&self) -> f64 {
        -2.0 - self.delta
    }

    pub fn hi(&self) -> f64 {
        2.0 + self.delta
    }

    pub fn window(&self) -> &CompositeRule {
        &self.window
    }

    /// Integral of K(x, x) over the window.
    pub fn window_mass(&self) -> f64 {
        self.window_mass
    }

    pub(crate) fn check_in_window(&self, x: f64) -> Result<()> {
        if x < self.lo() || x > self.hi() || x.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "{x} outside the kernel window [{}, {}]",
                self.lo(),
                self.hi()
            )));
        }
        Ok(())
    }

    /// Composite rule on [lo, t] with the model's panel width.
    pub(crate) fn rule_up_to(&self, t: f64) -> CompositeRule {
        CompositeRule::tile(&self.rule, self.lo(), t, self.panel_width)
    }

    /// K(x, x) without window checks.
    pub fn diagonal(&self, x: f64) -> f64 {
        let mut f = vec![0.0; self.n];
        scaled_oscillators(self.n, x, &mut f);
        f.iter().map(|v| v * v).sum()
    }

    fn diagonal_mass(&self, rule: &CompositeRule) -> f64 {
        let mut f = vec![0.0; self.n];
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| {
                scaled_oscillators(self.n, x, &mut f);
                w * f.iter().map(|v| v * v).sum::<f64>()
            })
            .sum()
    }

    /// Largest deviation of K(x,x)/N from the semicircle density on a grid.
    pub fn profile_deviation(&self, lo: f64, hi: f64, points: usize) -> f64 {
        (0..points)
            .map(|k| {
                let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
                (self.diagonal(x) / self.n as f64 - sc_density(x)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// K(x, y) = sqrt(N) sum_k phi_k(sqrt(N) x) phi_k(sqrt(N) y).
pub fn kernel_eval(model: &KernelModel, x: f64, y: f64) -> Result<f64> {
    model.check_in_window(x)?;
    model.check_in_window(y)?;
    let mut fx = vec![0.0; model.n];
    let mut fy = vec![0.0; model.n];
    scaled_oscillators(model.n, x, &mut fx);
    scaled_oscillators(model.n, y, &mut fy);
    Ok(fx.iter().zip(&fy).map(|(a, b)| a * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// phi_k by the unnormalised probabilists' Hermite recurrence, small k only.
    fn direct_phi(k: usize, u: f64) -> f64 {
        let (mut h0, mut h1) = (1.0, u);
        let he = match k {
            0 => 1.0,
            _ => {
                for m in 1..k {
                    let h2 = u * h1 - m as f64 * h0;
                    h0 = h1;
                    h1 = h2;
                }
                h1
            }
        };
        let fact: f64 = (1..=k).map(|m| m as f64).product();
        he * (-u * u / 4.0).exp() / ((2.0 * PI).sqrt() * fact).sqrt()
    }

    #[test]
    fn recurrence_matches_direct_formula() {
        let n = 12;
        let mut f = vec![0.0; n];
        for &x in &[-1.3, 0.0, 0.4, 2.2] {
            scaled_oscillators(n, x, &mut f);
            let u = (n as f64).sqrt() * x;
            for (k, &got) in f.iter().enumerate() {
                let want = (n as f64).powf(0.25) * direct_phi(k, u);
                assert!((got - want).abs() < 1e-12 * (1.0 + want.abs()), "k={k} x={x}");
            }
        }
    }

    #[test]
    fn no_underflow_deep_in_the_bulk() {
        let n = 2048;
        let mut f = vec![0.0; n];
        scaled_oscillators(n, 1.9, &mut f);
        assert!(f[n - 1].is_finite() && f[n - 1].abs() > 1e-3);
    }

    #[test]
    fn single_term_kernel() {
        let model = KernelModel::new(1).unwrap();
        let k = kernel_eval(&model, 0.0, 0.0).unwrap();
        assert!((k - (2.0 * PI).powf(-0.5)).abs() < 1e-15);
        // N = 1 needs a much wider window than the default margin
        assert!(model.delta > 0.5);
    }

    #[test]
    fn kernel_is_symmetric() {
        let model = KernelModel::new(40).unwrap();
        for &(x, y) in &[(0.1, -0.7), (1.9, 2.3), (-2.4, 0.0)] {
            assert_eq!(kernel_eval(&model, x, y).unwrap(), kernel_eval(&model, y, x).unwrap());
        }
        assert!(kernel_eval(&model, 3.0, 0.0).is_err());
    }

    #[test]
    fn semicircle_profile_and_mass() {
        let model = KernelModel::new(64).unwrap();
        assert_eq!(model.delta, 0.5);
        assert!((model.window_mass() - 64.0).abs() < 1e-6 * 64.0);
        assert!(model.profile_deviation(-1.5, 1.5, 301) <= 0.02);
    }

    #[test]
    fn order_cap() {
        let err = KernelModel::new(4096).unwrap_err();
        assert!(matches!(err, Error::NumericGuard(_)));
        let cfg = KernelConfig { max_order: 8, ..KernelConfig::default() };
        assert!(KernelModel::with_config(9, cfg).is_err());
    }
}
