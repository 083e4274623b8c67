//! Eigenvalues of symmetric and Hermitian matrices.
//!
//! Householder reduction to tridiagonal form, then implicit-shift QL on the
//! tridiagonal. No eigenvectors are accumulated.

use super::matrix::{check_dense_dim, SampledMatrix, SymmetricMatrix};
use crate::error::{Error, Result};

/// Maximum QL sweeps spent on any one eigenvalue.
pub const MAX_SWEEPS: usize = 50;

/// Absolute tolerance on the input's symmetry defect.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// All eigenvalues, ascending.
///
/// Complex Hermitian input goes through the real 2n x 2n embedding; its
/// doubled spectrum is thinned by keeping every second value.
pub fn symmetric_eigenvalues(matrix: &SampledMatrix) -> Result<Vec<f64>> {
    let defect = matrix.symmetry_defect();
    if defect.is_nan() || defect > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric { defect, tolerance: SYMMETRY_TOLERANCE });
    }
    match matrix {
        SampledMatrix::Real(m) => real_symmetric_eigenvalues(m),
        SampledMatrix::Complex(h) => {
            check_dense_dim(2 * h.n)?;
            let doubled = real_symmetric_eigenvalues(&h.real_embedding())?;
            Ok(doubled.into_iter().skip(1).step_by(2).collect())
        }
    }
}

/// Eigenvalues of a real symmetric matrix (lower triangle is read).
pub fn real_symmetric_eigenvalues(m: &SymmetricMatrix) -> Result<Vec<f64>> {
    check_dense_dim(m.n)?;
    let (d, e) = householder_tridiagonalize(m.n, m.data.clone());
    tridiagonal_eigenvalues(d, e)
}

/// Reduce a symmetric matrix to tridiagonal form; returns (diagonal, off-diagonal).
///
/// Only the lower triangle of `a` is referenced and updated.
pub fn householder_tridiagonalize(n: usize, mut a: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        d[k] = a[k * n + k];
        let s = k + 1;
        let m = n - s;
        let mut norm2 = 0.0;
        for i in 0..m {
            let x = a[(s + i) * n + k];
            v[i] = x;
            norm2 += x * x;
        }
        let x0 = v[0];
        let rest = norm2 - x0 * x0;
        if rest == 0.0 {
            e[k] = x0;
            continue;
        }
        let norm = norm2.sqrt();
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        e[k] = alpha;
        v[0] = x0 - alpha;
        let vtv = rest + v[0] * v[0];
        let beta = 2.0 / vtv;

        // p = beta * B v with B the trailing block, read from its lower triangle
        let v = &v[..m];
        let p = &mut p[..m];
        p.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..m {
            let row = &a[(s + i) * n + s..(s + i) * n + s + i + 1];
            let vi = v[i];
            let mut acc = 0.0;
            for j in 0..i {
                acc += row[j] * v[j];
                p[j] += row[j] * vi;
            }
            p[i] += acc + row[i] * vi;
        }
        let mut vtp = 0.0;
        for i in 0..m {
            p[i] *= beta;
            vtp += v[i] * p[i];
        }
        let kk = 0.5 * beta * vtp;
        // p becomes w = p - kk v
        for i in 0..m {
            p[i] -= kk * v[i];
        }
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[(s + i) * n + s..(s + i) * n + s + i + 1];
            for j in 0..=i {
                row[j] -= vi * p[j] + wi * v[j];
            }
        }
    }
    if n > 0 {
        d[n - 1] = a[(n - 1) * n + n - 1];
    }
    (d, e)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (length n - 1), ascending.
pub fn tridiagonal_eigenvalues(mut d: Vec<f64>, off: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(d);
    }
    if off.len() + 1 != n {
        return Err(Error::SizeMismatch { expected: n - 1, actual: off.len() });
    }
    let mut e = off;
    e.push(0.0);
    // deflation also accepts couplings that are negligible against the whole matrix
    let norm = (0..n)
        .map(|i| d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 })
        .fold(0.0, f64::max);
    let floor = f64::EPSILON * norm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::NoConvergence { index: l, iterations: MAX_SWEEPS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + 1.0).sqrt();
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}
