//! Small statistical helpers: least squares, sample moments, Jarque–Bera and
//! two-sample Kolmogorov–Smirnov.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

/// Ordinary least squares `y ≈ intercept + slope * x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let (coef, rms) = least_squares(&x.iter().map(|&v| vec![1.0, v]).collect::<Vec<_>>(), y)?;
    Ok(LinearFit {
        slope: coef[1],
        intercept: coef[0],
        rms_residual: rms,
    })
}

/// Least-squares solution of `rows · β ≈ y` and the rms residual. Fails when
/// the design does not have full column rank.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = rows.len();
    if n == 0 || n != y.len() {
        return Err(Error::Experiment("regression needs matching, nonempty data".into()));
    }
    let p = rows[0].len();
    if n < p || rows.iter().any(|r| r.len() != p) {
        return Err(Error::Experiment(format!(
            "regression with {p} unknowns needs at least {p} rows, got {n}"
        )));
    }
    if rows.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Experiment("regression data must be finite".into()));
    }
    // scale columns so the rank test is meaningful
    let scales: Vec<f64> = (0..p)
        .map(|j| {
            let m = rows.iter().map(|r| r[j].abs()).fold(0.0, f64::max);
            if m > 0.0 {
                m
            } else {
                1.0
            }
        })
        .collect();
    let a = DMatrix::from_fn(n, p, |i, j| rows[i][j] / scales[j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::Experiment("regression design is rank deficient".into()));
    }
    let sol = svd
        .solve(&b, 1e-14 * smax)
        .map_err(|e| Error::Experiment(e.to_string()))?;
    let resid = &a * &sol - &b;
    let rms = (resid.norm_squared() / n as f64).sqrt();
    let coef = sol.iter().zip(&scales).map(|(c, s)| c / s).collect();
    Ok((coef, rms))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Sample skewness and (non-excess) kurtosis, moment estimators.
pub fn skew_kurtosis(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2))
}

/// Jarque–Bera statistic, asymptotically χ² with two degrees of freedom.
pub fn jarque_bera(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (s, k) = skew_kurtosis(xs);
    n / 6.0 * (s * s + 0.25 * (k - 3.0).powi(2))
}

/// Upper `level` quantile of χ²₂, `-2 ln(level)`.
pub fn chi2_2_critical(level: f64) -> f64 {
    -2.0 * level.ln()
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic critical value of the two-sample KS statistic at `level`.
pub fn ks_critical(n: usize, m: usize, level: f64) -> f64 {
    let c = (-(0.5 * level).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let i = h.floor() as usize;
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] + (h - i as f64) * (sorted[i + 1] - sorted[i])
}
