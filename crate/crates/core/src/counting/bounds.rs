//! Closed-form tail bounds for the counting function and for single eigenvalues.

use std::f64::consts::SQRT_2;

/// Fixed constant of the intermediate-regime bound: 2^(-5/6) (3 pi)^(-2/3).
pub fn intermediate_constant() -> f64 {
    2f64.powf(-5.0 / 6.0) * (3.0 * std::f64::consts::PI).powf(-2.0 / 3.0)
}

/// Bernstein bound 2 exp(-u^2 / (2 sigma2 + u)) on P(|N_t - E N_t| >= u).
pub fn bernstein_bound(sigma2: f64, u: f64) -> f64 {
    if u == 0.0 {
        return 2.0;
    }
    2.0 * (-u * u / (2.0 * sigma2 + u)).exp()
}

/// Bound on P(|N_t - N rho_t| >= u + c1); returns (threshold, bound).
pub fn counting_deviation_bound(sigma2: f64, u: f64, c1: f64) -> (f64, f64) {
    (u + c1, bernstein_bound(sigma2, u))
}

/// GOE analogue, with sigma2 the GUE counting variance at the same t;
/// returns (threshold u + c1p, bound).
pub fn goe_counting_bound(sigma2: f64, u: f64, c1p: f64) -> (f64, f64) {
    let bound = if u == 0.0 {
        2.0 * SQRT_2
    } else {
        2.0 * SQRT_2 * (-u * u / (4.0 * sigma2 + 2.0 * u)).exp()
    };
    (u + c1p, bound)
}

/// Bound on P(|lambda_j - gamma_j| >= u / N) in the bulk.
pub fn eigenvalue_deviation_bound_bulk(n: usize, u: f64, c: f64, c_delta: f64) -> f64 {
    if u == 0.0 {
        return 4.0;
    }
    let log_n = (n as f64).ln();
    4.0 * (-c * c * u * u / (2.0 * c_delta * log_n + c * u)).exp()
}

/// Bound on P(|lambda_j - gamma_j| >= u / (N^(2/3) (N - j)^(1/3))) for
/// intermediate j.
pub fn eigenvalue_deviation_bound_intermediate(n: usize, j: usize, u: f64, cp: f64) -> f64 {
    debug_assert!(j < n);
    intermediate_bound_at_log_gap(((n - j) as f64).ln(), u, cp)
}

/// The same bound with log(N - j) supplied directly.
pub fn intermediate_bound_at_log_gap(log_gap: f64, u: f64, cp: f64) -> f64 {
    if u == 0.0 {
        return 4.0;
    }
    let c = intermediate_constant();
    4.0 * (-c * c * u * u / (cp * log_gap + c * u)).exp()
}

/// Deviation scale u / (N^(2/3) (N - j)^(1/3)) of the intermediate bound.
pub fn intermediate_scale(n: usize, j: usize) -> f64 {
    1.0 / ((n as f64).powf(2.0 / 3.0) * ((n - j) as f64).cbrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn bernstein_examples() {
        assert_eq!(bernstein_bound(0.7, 0.0), 2.0);
        assert!((bernstein_bound(0.0, 1.0) - 2.0 / E).abs() < 1e-15);
        assert!((bernstein_bound(1.0, 2.0) - 2.0 / E).abs() < 1e-15);
    }

    #[test]
    fn composed_bounds() {
        assert_eq!(counting_deviation_bound(3.0, 0.0, 1.5), (1.5, 2.0));
        let (off, b) = counting_deviation_bound(0.0, 1.0, 1.0);
        assert_eq!(off, 2.0);
        assert!((b - 2.0 / E).abs() < 1e-15);
        assert_eq!(goe_counting_bound(1.0, 0.0, 2.0).1, 2.0 * SQRT_2);
        let (off, b) = goe_counting_bound(0.0, 2.0, 2.0);
        assert_eq!(off, 4.0);
        assert!((b - 2.0 * SQRT_2 / E).abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_bounds() {
        assert_eq!(eigenvalue_deviation_bound_bulk(100, 0.0, 1.0, 1.0), 4.0);
        // log N = 1
        let log_n_one = 4.0 * (-1.0f64 / 3.0).exp();
        let c: f64 = 1.0;
        let value = 4.0 * (-c * c / (2.0 * 1.0 * 1.0 + c)).exp();
        assert!((value - log_n_one).abs() < 1e-15);
        assert!((eigenvalue_deviation_bound_bulk(3, 1.0, 1.0, 1.0 / 3f64.ln()) - log_n_one).abs() < 1e-14);

        assert_eq!(eigenvalue_deviation_bound_intermediate(100, 90, 0.0, 1.0), 4.0);
        let c = intermediate_constant();
        let want = 4.0 * (-c * c / (1.0 + c)).exp();
        assert!((intermediate_bound_at_log_gap(1.0, 1.0, 1.0) - want).abs() < 1e-15);
        assert!((c - 2f64.powf(-5.0 / 6.0) / (3.0 * std::f64::consts::PI).powf(2.0 / 3.0)).abs() < 1e-16);
    }

    #[test]
    fn monotonicity() {
        let us: Vec<f64> = (1..50).map(|k| k as f64 * 0.5).collect();
        for w in us.windows(2) {
            assert!(bernstein_bound(1.0, w[1]) < bernstein_bound(1.0, w[0]));
            assert!(goe_counting_bound(1.0, w[1], 0.0).1 < goe_counting_bound(1.0, w[0], 0.0).1);
            assert!(eigenvalue_deviation_bound_bulk(64, w[1], 0.3, 0.2) < eigenvalue_deviation_bound_bulk(64, w[0], 0.3, 0.2));
            assert!(intermediate_bound_at_log_gap(3.0, w[1], 1.0) < intermediate_bound_at_log_gap(3.0, w[0], 1.0));
        }
        for s in [0.1, 0.5, 1.0, 4.0] {
            assert!(bernstein_bound(s, 3.0) < bernstein_bound(s * 2.0, 3.0));
            assert!(goe_counting_bound(s, 3.0, 0.0).1 < goe_counting_bound(s * 2.0, 3.0, 0.0).1);
            assert!(eigenvalue_deviation_bound_bulk(64, 3.0, 0.3, s) < eigenvalue_deviation_bound_bulk(64, 3.0, 0.3, 2.0 * s));
            assert!(intermediate_bound_at_log_gap(2.0, 3.0, s) < intermediate_bound_at_log_gap(2.0, 3.0, 2.0 * s));
        }
    }
}
