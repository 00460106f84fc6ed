//! Dependence of the unit-lag noises `Y(t) = X(t+1) - X(t)`.
//!
//! With `A = θ1 × (noise kernel at t1)` and `B = θ2 × (noise kernel at t1+t)`:
//!
//! ```text
//! I = ∫ |A+B|^α - |A|^α - |B|^α dx,   K = exp(-∫|A|^α - ∫|B|^α),   R = K (e^{-I} - 1)
//! ```
//!
//! `I` is integrated as a single integral of the pointwise difference, which is
//! evaluated without cancellation, so it keeps relative accuracy when `I` is
//! many orders of magnitude below the marginal exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{KernelSum, ProcessSpec};
use crate::par_map;
use crate::quadrature::{
    abs_pow, kernel_power_integral_with, Integrator, Lower, Point, TailEnvelope, Tolerance,
};
use crate::quasinorm::geometric_grid;
use crate::stats::least_squares;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependencePoint {
    pub t1: f64,
    pub t: f64,
    pub theta1: f64,
    pub theta2: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "logK")]
    pub log_k: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// `ln |R|`, finite even when `R` underflows.
    pub log_abs_r: f64,
    /// `|I| < 1e-8`, where `R ≈ -K I`.
    pub first_order: bool,
}

/// `|a+b|^α - |a|^α - |b|^α` without cancellation.
#[inline]
pub fn interaction(a: f64, b: f64, alpha: f64) -> f64 {
    let (big, small) = if a.abs() >= b.abs() { (a, b) } else { (b, a) };
    if small == 0.0 {
        return 0.0;
    }
    let r = small / big;
    abs_pow(big, alpha) * (alpha * r.ln_1p()).exp_m1() - abs_pow(small, alpha)
}

/// `∫ |θ (X(t+1) - X(t)) kernel|^α`, the log-CF of `θ Y(t)` up to sign.
pub fn noise_exponent(spec: &ProcessSpec, t: f64, theta: f64, tol: f64) -> Result<f64> {
    let sum = KernelSum::noise(spec, &[(theta, t)]);
    marginal(&sum, tol)
}

fn marginal(sum: &KernelSum<'_>, tol: f64) -> Result<f64> {
    if sum.is_zero() {
        return Ok(0.0);
    }
    let rough = kernel_power_integral_with(sum, 1e-6, Tolerance::relative(1e-4))?.value;
    if rough == 0.0 {
        return Ok(0.0);
    }
    Ok(kernel_power_integral_with(sum, tol * rough, Tolerance::relative(tol))?.value)
}

/// The interaction integral `I` to relative accuracy `tol`.
pub fn interaction_integral(spec: &ProcessSpec, t1: f64, t: f64, theta1: f64, theta2: f64, tol: f64) -> Result<f64> {
    let a = KernelSum::noise(spec, &[(theta1, t1)]);
    let b = KernelSum::noise(spec, &[(theta2, t1 + t)]);
    if a.is_zero() || b.is_zero() {
        return Ok(0.0);
    }
    // A vanishes right of its support, and with it the integrand
    let hi = a.support_end().unwrap().min(b.support_end().unwrap());
    let mut singular: Vec<f64> = a.knots().into_iter().chain(b.knots()).filter(|&s| s <= hi).collect();
    singular.sort_by(f64::total_cmp);
    singular.dedup();

    let (env_a, env_b) = (TailEnvelope::for_sum(&a), TailEnvelope::for_sum(&b));
    let f = |p: Point| {
        let alpha = spec.alpha_at(p.x());
        interaction(a.eval(p), b.eval(p), alpha)
    };

    // |integrand| ≤ 6 (|A|^α + |B|^α), so the neglected tail is at most six
    // times the two envelope masses; shrink the cut until that is small
    // relative to I
    let mut tail_tol = 1e-12 * (a.amplitude() + b.amplitude());
    let mut value = 0.0;
    for _ in 0..8 {
        let cut = env_a.cutoff(tail_tol / 12.0)?.max(env_b.cutoff(tail_tol / 12.0)?);
        let lo = (-cut).min(singular[0] - 1.0);
        value = Integrator::default()
            .integrate(&f, Lower::Finite(lo), hi, &singular, Tolerance::relative(tol))?
            .value;
        if value == 0.0 || tail_tol <= 0.1 * tol * value.abs() {
            break;
        }
        tail_tol = 0.01 * tol * value.abs();
    }
    Ok(value)
}

fn assemble(t1: f64, t: f64, theta1: f64, theta2: f64, i: f64, m1: f64, m2: f64) -> DependencePoint {
    let log_k = -m1 - m2;
    let (r, log_abs_r) = if i == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        let e = (-i).exp_m1();
        let log_e = if i.abs() < 1e-8 {
            // ln|e^{-I} - 1| = ln|I| - I/2 + O(I^2)
            i.abs().ln() - 0.5 * i
        } else {
            e.abs().ln()
        };
        (log_k.exp() * e, log_k + log_e)
    };
    DependencePoint {
        t1,
        t,
        theta1,
        theta2,
        i,
        log_k,
        r,
        log_abs_r,
        first_order: i != 0.0 && i.abs() < 1e-8,
    }
}

fn check_lag(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("lag must be positive, got {t}")));
    }
    Ok(())
}

/// `(t, I, K, R)` at one lag.
pub fn dep_eval(spec: &ProcessSpec, t1: f64, t: f64, theta1: f64, theta2: f64, tol: f64) -> Result<DependencePoint> {
    check_lag(t)?;
    let m1 = noise_exponent(spec, t1, theta1, tol)?;
    let m2 = noise_exponent(spec, t1 + t, theta2, tol)?;
    let i = if theta1 * theta2 == 0.0 {
        0.0
    } else {
        interaction_integral(spec, t1, t, theta1, theta2, tol)?
    };
    Ok(assemble(t1, t, theta1, theta2, i, m1, m2))
}

/// [`dep_eval`] over many lags, in parallel, returned in input order.
pub fn dep_sweep(spec: &ProcessSpec, t1: f64, lags: &[f64], theta1: f64, theta2: f64, tol: f64) -> Result<Vec<DependencePoint>> {
    for &t in lags {
        check_lag(t)?;
    }
    let m1 = noise_exponent(spec, t1, theta1, tol)?;
    par_map(lags, |&t| {
        let m2 = noise_exponent(spec, t1 + t, theta2, tol)?;
        let i = if theta1 * theta2 == 0.0 {
            0.0
        } else {
            interaction_integral(spec, t1, t, theta1, theta2, tol)?
        };
        Ok(assemble(t1, t, theta1, theta2, i, m1, m2))
    })
    .into_iter()
    .collect()
}

/// 24 geometric lags in `[20, 400]`.
pub fn default_lags() -> Vec<f64> {
    geometric_grid(20.0, 400.0, 24)
}

/// `ln|R(t)| ≈ intercept - exp_rate t + power ln t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exp_rate: f64,
    pub power: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

pub fn rate_fit(points: &[DependencePoint]) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(Error::Experiment(format!(
            "rate fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    let p0 = points[0];
    if points
        .iter()
        .any(|p| p.t1 != p0.t1 || p.theta1 != p0.theta1 || p.theta2 != p0.theta2)
    {
        return Err(Error::Experiment("rate fit points must share t1 and thetas".into()));
    }
    if points.iter().any(|p| !p.log_abs_r.is_finite()) {
        return Err(Error::Experiment("rate fit needs R != 0 at every lag".into()));
    }
    let mut ts: Vec<f64> = points.iter().map(|p| p.t).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    if ts.len() < 3 {
        return Err(Error::Experiment("rate fit needs at least 3 distinct lags".into()));
    }
    let rows: Vec<Vec<f64>> = points.iter().map(|p| vec![1.0, -p.t, p.t.ln()]).collect();
    let y: Vec<f64> = points.iter().map(|p| p.log_abs_r).collect();
    let (c, rms) = least_squares(&rows, &y)?;
    Ok(RateFit {
        intercept: c[0],
        exp_rate: c[1],
        power: c[2],
        rms_residual: rms,
    })
}

/// Asymptotic exponents `(rate, power)` of `|R(t)| ≍ e^{-rate t} t^{power}` for
/// a constant stability index other than 1.
pub fn predicted_exponents(hurst: f64, alpha: f64, lambda: f64) -> Result<(f64, f64)> {
    if alpha < 1.0 {
        Ok((lambda * alpha, alpha * hurst - 1.0))
    } else if alpha > 1.0 {
        Ok((lambda, hurst - 1.0 / alpha))
    } else {
        Err(Error::Domain("no asymptotic rate is claimed at α = 1".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSlack {
    pub rate: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub regime: String,
    pub rate_band: (f64, f64),
    pub power_band: (f64, f64),
    pub slack: BandSlack,
    pub exp_rate: f64,
    pub power: f64,
    pub rate_ok: bool,
    pub power_ok: bool,
    pub pass: bool,
}

/// Checks a fit against the exponent bands of a multistable noise with
/// constant `H`: for `α ⊂ (0,1)` the rate lies in `[λa, λb]` and the power in
/// `[Ha - 1, Hb - 1]`; for `α ⊂ (1,2]` the rate is `λ` and the power lies in
/// `[H - 1/a, H - 1/b]`.
pub fn band_check(spec: &ProcessSpec, fit: &RateFit, slack: BandSlack) -> Result<BandReport> {
    let h = spec.hurst().as_constant().ok_or_else(|| {
        Error::Domain("band check needs a constant Hurst index".into())
    })?;
    let (a, b) = spec.stability_bounds();
    let lambda = spec.lambda();
    let (regime, rate_band, power_band) = if b < 1.0 {
        ("alpha<1", (lambda * a, lambda * b), (h * a - 1.0, h * b - 1.0))
    } else if a > 1.0 {
        ("alpha>1", (lambda, lambda), (h - 1.0 / a, h - 1.0 / b))
    } else {
        return Err(Error::Domain(format!(
            "stability range [{a}, {b}] must lie within (0,1) or (1,2]"
        )));
    };
    let within = |v: f64, (lo, hi): (f64, f64), s: f64| v >= lo - s && v <= hi + s;
    let rate_ok = within(fit.exp_rate, rate_band, slack.rate);
    let power_ok = within(fit.power, power_band, slack.power);
    Ok(BandReport {
        regime: regime.into(),
        rate_band,
        power_band,
        slack,
        exp_rate: fit.exp_rate,
        power: fit.power,
        rate_ok,
        power_ok,
        pass: rate_ok && power_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiLrdRow {
    pub lambda: f64,
    /// `Σ_{n=1}^{N} |R(n)|` for `N = 1, 2, ...`
    pub partial_sums: Vec<f64>,
}

/// Partial sums of `|R(n)|` over integer lags for each tempering rate.
pub fn semi_lrd_sum(
    spec: &ProcessSpec,
    lambdas: &[f64],
    n: usize,
    theta1: f64,
    theta2: f64,
    t1: f64,
    tol: f64,
) -> Result<Vec<SemiLrdRow>> {
    if n == 0 {
        return Err(Error::Config("semi-LRD sum needs N >= 1".into()));
    }
    let lags: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(Error::Config(format!("tempering rate must be positive, got {lambda}")));
            }
            let s = spec.with_lambda(lambda);
            let points = dep_sweep(&s, t1, &lags, theta1, theta2, tol)?;
            let mut acc = 0.0;
            let partial_sums = points
                .iter()
                .map(|p| {
                    acc += p.r.abs();
                    acc
                })
                .collect();
            Ok(SemiLrdRow {
                lambda,
                partial_sums,
            })
        })
        .collect()
}
