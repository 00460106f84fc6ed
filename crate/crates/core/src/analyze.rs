//! Estimators that tie simulated ensembles, or exact characteristic
//! functions, to the quantitative behaviour of the processes: small-lag moment
//! limits, tails, moments, localisability and path regularity.

use serde::{Deserialize, Serialize};

use crate::charfn::{cf, CFQuery};
use crate::error::{Error, Result};
use crate::model::{Kind, KernelSum, ProcessSpec};
use crate::quadrature::{kernel_power_integral_with, Integrator, Lower, Point, Tolerance};
use crate::simulate::{simulate_paths, GridSpec, PathEnsemble};
use crate::stats;

/// Small-lag limit `F(γ, t)` of `E|X(t+r) - X(t)|^γ / r^{γH}` and its factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentLimit {
    pub gamma: f64,
    pub t: f64,
    pub value: f64,
    /// `∫ |(1-x)_+^{H-1/α} - (-x)_+^{H-1/α}|^α dx` at `α = α(t)`.
    pub kernel_integral: f64,
    /// `Γ(1 - γ/α(t))`
    pub gamma_term: f64,
    /// `∫_0^∞ u^{-γ-1} sin²u du`
    pub sin2_integral: f64,
}

/// `F(γ,t) = K^{γ/α} 2^{γ-1} Γ(1-γ/α) / (γ ∫_0^∞ u^{-γ-1} sin²u du)`, with
/// `α = α(t)` and `K` the kernel integral of the untempered process frozen at
/// `α(t)`.
pub fn flimit(spec: &ProcessSpec, gamma: f64, t: f64, tol: f64) -> Result<MomentLimit> {
    if !matches!(spec.kind(), Kind::Ltfmsm | Kind::Ltfsm | Kind::Lfsm | Kind::Lfmsm) {
        return Err(Error::Domain(format!(
            "moment limit needs a constant Hurst index, got a {} spec",
            spec.kind()
        )));
    }
    let (a, _) = spec.stability_bounds();
    if !(gamma > 0.0 && gamma < a) {
        return Err(Error::Domain(format!("gamma must lie in (0, {a}), got {gamma}")));
    }
    let alpha = spec.alpha_at(t);
    let h = spec.hurst_at(t);
    if (h * alpha - 1.0).abs() < 1e-12 {
        return Err(Error::Domain("moment limit undefined when H·α(t) = 1".into()));
    }
    let frozen = spec.tangent_at(t);
    let sum = KernelSum::motion(&frozen, &[(1.0, 1.0)]);
    let k = kernel_power_integral_with(&sum, tol, Tolerance::relative(tol))?.value;
    let gamma_term = libm::tgamma(1.0 - gamma / alpha);
    let s2 = sin2_integral(gamma, tol)?;
    let value = k.powf(gamma / alpha) * 2f64.powf(gamma - 1.0) * gamma_term / (gamma * s2);
    Ok(MomentLimit {
        gamma,
        t,
        value,
        kernel_integral: k,
        gamma_term,
        sin2_integral: s2,
    })
}

/// `∫_0^∞ u^{-γ-1} sin²u du` for `γ ∈ (0, 2)`.
///
/// Quadrature up to `N = 64π`, written as `(sin u / u)² u^{1-γ}` near the
/// origin; beyond `N` the integrand is split as `u^{-p}/2 - u^{-p} cos(2u)/2`
/// and the oscillatory part summed from its asymptotic expansion, which at
/// `N = 64π` is accurate far below double precision.
pub fn sin2_integral(gamma: f64, tol: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::Domain(format!("sin² integral needs gamma in (0, 2), got {gamma}")));
    }
    let n = 64.0 * std::f64::consts::PI;
    let f = |p: Point| {
        let u = p.x();
        if u == 0.0 {
            return 0.0;
        }
        let s = u.sin() / u;
        s * s * u.powf(1.0 - gamma)
    };
    let head = Integrator::default()
        .integrate(&f, Lower::Finite(0.0), n, &[0.0], Tolerance::relative(tol.min(1e-12)))?
        .value;
    let p = gamma + 1.0;
    // Re ∫_N^∞ u^{-p} e^{2iu} du with e^{2iN} = 1
    let mut osc = 0.0;
    let mut rising = p;
    let mut k = 1;
    let mut sign = 1.0;
    while k < 40 {
        let term = sign * rising * n.powf(-p - k as f64) / 2f64.powi(k + 1);
        osc += term;
        if term.abs() < 1e-18 * osc.abs() {
            break;
        }
        rising *= (p + k as f64) * (p + k as f64 + 1.0);
        sign = -sign;
        k += 2;
    }
    let tail = n.powf(1.0 - p) / (2.0 * (p - 1.0)) - 0.5 * osc;
    Ok(head + tail)
}

/// Empirical characteristic function of a symmetric sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCf {
    pub thetas: Vec<f64>,
    /// `(1/n) Σ cos(θ x_i)`
    pub values: Vec<f64>,
    /// `(1/n) Σ sin(θ x_i)`; zero in law for a symmetric sample.
    pub imag: Vec<f64>,
    /// `3/√n`
    pub imag_bound: f64,
    pub imag_ok: bool,
}

pub fn empirical_cf(samples: &[f64], thetas: &[f64]) -> EmpiricalCf {
    let n = samples.len().max(1) as f64;
    let (values, imag): (Vec<f64>, Vec<f64>) = thetas
        .iter()
        .map(|&th| {
            let (mut c, mut s) = (0.0, 0.0);
            for &x in samples {
                let (si, co) = (th * x).sin_cos();
                c += co;
                s += si;
            }
            (c / n, s / n)
        })
        .unzip();
    let imag_bound = 3.0 / n.sqrt();
    let imag_ok = imag.iter().all(|v| v.abs() <= imag_bound);
    EmpiricalCf {
        thetas: thetas.to_vec(),
        values,
        imag,
        imag_bound,
        imag_ok,
    }
}

/// Empirical against exact CF at one time of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfGap {
    pub t: f64,
    pub empirical: EmpiricalCf,
    pub exact: Vec<f64>,
    pub sup_gap: f64,
}

pub fn cf_gap(ens: &PathEnsemble, time_index: usize, thetas: &[f64], tol: f64) -> Result<CfGap> {
    let t = *ens
        .times
        .get(time_index)
        .ok_or_else(|| Error::Config(format!("time index {time_index} out of range")))?;
    let empirical = empirical_cf(&ens.column(time_index), thetas);
    let exact = crate::par_map(thetas, |&th| cf(&ens.spec, &CFQuery::single(t, th)?, tol));
    let exact = exact.into_iter().collect::<Result<Vec<f64>>>()?;
    let sup_gap = empirical
        .values
        .iter()
        .zip(&exact)
        .fold(0.0f64, |m, (e, x)| m.max((e - x).abs()));
    Ok(CfGap {
        t,
        empirical,
        exact,
        sup_gap,
    })
}

/// `(1/n) Σ |x_i|^γ`
pub fn moment_estimate(samples: &[f64], gamma: f64) -> f64 {
    samples.iter().map(|x| x.abs().powf(gamma)).sum::<f64>() / samples.len() as f64
}

/// Exceedance probabilities of one increment sample and the smallest constant
/// of the tail bound on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub t: f64,
    pub v: f64,
    pub ys: Vec<f64>,
    pub exceedance: Vec<f64>,
    /// Bound without its constant, per `y`.
    pub shape: Vec<f64>,
    /// `max_y P(|X(t)-X(v)| ≥ y) / shape(y)`
    pub constant: f64,
}

/// Shape of the tail bound of `X(t) - X(v)` at level `y`:
/// `(|t-v|^{Ha} + |t-v|^{Hb}) / min(y^a, y^b)` for constant `H`, and
/// `(|t-v|^{αH_t} + |H_t - H_v|^α) / y^α` for a multifractional spec.
pub fn tail_shape(spec: &ProcessSpec, t: f64, v: f64, y: f64) -> f64 {
    let d = (t - v).abs();
    if spec.kind().is_multifractional() {
        let alpha = spec.stability_bounds().0;
        let ht = spec.hurst_at(t);
        (d.powf(alpha * ht) + (ht - spec.hurst_at(v)).abs().powf(alpha)) / y.powf(alpha)
    } else {
        let (a, b) = spec.stability_bounds();
        let h = spec.hurst_at(t);
        (d.powf(h * a) + d.powf(h * b)) / y.powf(a).min(y.powf(b))
    }
}

pub fn tail_check(increments: &[f64], ys: &[f64], spec: &ProcessSpec, t: f64, v: f64) -> Result<TailReport> {
    if ys.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::Config("tail levels must be positive".into()));
    }
    let n = increments.len().max(1) as f64;
    let exceedance: Vec<f64> = ys
        .iter()
        .map(|&y| increments.iter().filter(|x| x.abs() >= y).count() as f64 / n)
        .collect();
    let shape: Vec<f64> = ys.iter().map(|&y| tail_shape(spec, t, v, y)).collect();
    let constant = exceedance
        .iter()
        .zip(&shape)
        .filter(|(p, _)| **p > 0.0)
        .fold(0.0f64, |m, (p, s)| m.max(p / s));
    Ok(TailReport {
        t,
        v,
        ys: ys.to_vec(),
        exceedance,
        shape,
        constant,
    })
}

/// Ratio of the largest to the smallest positive fitted constant.
pub fn constant_spread(constants: &[f64]) -> f64 {
    let pos: Vec<f64> = constants.iter().copied().filter(|c| *c > 0.0).collect();
    if pos.is_empty() {
        return f64::NAN;
    }
    let hi = pos.iter().fold(0.0f64, |m, c| m.max(*c));
    let lo = pos.iter().fold(f64::INFINITY, |m, c| m.min(*c));
    hi / lo
}

/// Log-log slope of the empirical survival function `P(|X| ≥ y)` over the
/// order statistics whose exceedance probability lies in `[p_lo, p_hi]`.
pub fn tail_slope(samples: &[f64], p_lo: f64, p_hi: f64) -> Result<f64> {
    let mut a: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    let n = a.len() as f64;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, &y) in a.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        if p >= p_lo && p <= p_hi && y > 0.0 {
            xs.push(y.ln());
            ys.push(p.ln());
        }
    }
    if xs.len() < 10 {
        return Err(Error::Experiment("too few order statistics in the tail window".into()));
    }
    Ok(stats::linear_fit(&xs, &ys)?.slope)
}

/// Fitted constants of `E|X(t)-X(v)|^γ ≤ C |t-v|^{Hb}` over a lag sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSweep {
    pub gamma: f64,
    pub lags: Vec<f64>,
    pub moments: Vec<f64>,
    pub constants: Vec<f64>,
    pub spread: f64,
}

/// `E|X(t0+d) - X(t0)|^γ` for each lag `d`, all from one ensemble.
pub fn moment_sweep(spec: &ProcessSpec, grid: &GridSpec, t0: f64, lags: &[f64], gamma: f64, n_paths: usize) -> Result<MomentSweep> {
    let (a, b) = spec.stability_bounds();
    if !(gamma > 0.0 && gamma < a) {
        return Err(Error::Domain(format!("gamma must lie in (0, {a}), got {gamma}")));
    }
    let mut times = vec![t0];
    times.extend(lags.iter().map(|d| t0 + d));
    let ens = simulate_paths(spec, grid, &times, n_paths)?;
    let base = ens.column(0);
    let h = spec.hurst_at(t0);
    let mut moments = Vec::new();
    let mut constants = Vec::new();
    for (j, &d) in lags.iter().enumerate() {
        let inc: Vec<f64> = ens.column(j + 1).iter().zip(&base).map(|(x, y)| x - y).collect();
        let m = moment_estimate(&inc, gamma);
        moments.push(m);
        constants.push(m / d.abs().powf(h * b));
    }
    Ok(MomentSweep {
        gamma,
        lags: lags.to_vec(),
        spread: constant_spread(&constants),
        moments,
        constants,
    })
}

/// Monte Carlo estimate of `E|X(t+r) - X(t)|^γ / r^{γH}` next to `F(γ, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentLimitCheck {
    pub limit: MomentLimit,
    pub r: f64,
    pub estimate: f64,
    pub standard_error: f64,
    pub relative_gap: f64,
    pub cells_in_lag: usize,
}

/// Simulates `X(t)` and `X(t+r)` on a grid with at least `cells_per_lag`
/// cells inside `(t, t+r)` and compares the scaled moment with `flimit`.
pub fn moment_limit_check(
    spec: &ProcessSpec,
    gamma: f64,
    t: f64,
    r: f64,
    n_paths: usize,
    cells_per_lag: usize,
    seed: u64,
    tol: f64,
) -> Result<MomentLimitCheck> {
    if !(r > 0.0) {
        return Err(Error::Config("lag r must be positive".into()));
    }
    let limit = flimit(spec, gamma, t, tol)?;
    let times = [t, t + r];
    let base_step = r.max(1e-3);
    let fine = r / cells_per_lag as f64;
    let refine = (base_step / fine).ceil() as u32;
    let grid = GridSpec::for_spec(spec, &times, base_step, refine, 1e-5, seed)?
        .with_refine_radius(2.0 * r)?
        .with_grading(0.02, 1.0)?;
    let cells_in_lag = grid
        .cells(&times)?
        .iter()
        .filter(|c| c.mid > t && c.mid < t + r)
        .count();
    let ens = simulate_paths(spec, &grid, &times, n_paths)?;
    let scale = r.powf(gamma * spec.hurst_at(t));
    let vals: Vec<f64> = (0..n_paths)
        .map(|p| (ens.get(p, 1) - ens.get(p, 0)).abs().powf(gamma) / scale)
        .collect();
    let estimate = stats::mean(&vals);
    let standard_error = (stats::variance(&vals) / n_paths as f64).sqrt();
    Ok(MomentLimitCheck {
        relative_gap: (estimate - limit.value).abs() / limit.value,
        limit,
        r,
        estimate,
        standard_error,
        cells_in_lag,
    })
}

/// Exact CF distance between rescaled increments and the tangent process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalisabilityReport {
    pub u: f64,
    pub rs: Vec<f64>,
    pub distances: Vec<f64>,
    pub tangent: ProcessSpec,
    /// `H > 1/a`
    pub hypothesis_holds: bool,
    pub strictly_decreasing: bool,
}

/// For each `r`, `sup_{v, θ} |E e^{iθ(X(u+rv)-X(u))/r^H} - E e^{iθ Z(v)}|`
/// where `Z` is the untempered linear fractional stable motion with
/// stability frozen at `α(u)`. Exact CFs only.
pub fn localisability_check(
    spec: &ProcessSpec,
    u: f64,
    vs: &[f64],
    thetas: &[f64],
    rs: &[f64],
    tol: f64,
) -> Result<LocalisabilityReport> {
    if spec.kind().is_multifractional() {
        return Err(Error::Domain("localisability check needs a constant Hurst index".into()));
    }
    if rs.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Config("scales r must be positive".into()));
    }
    let h = spec.hurst_at(u);
    let tangent = spec.tangent_at(u);
    let mut grid = Vec::new();
    for &v in vs {
        for &th in thetas {
            grid.push((v, th));
        }
    }
    let reference = crate::par_map(&grid, |&(v, th)| {
        if th == 0.0 || v == 0.0 {
            return Ok(1.0);
        }
        cf(&tangent, &CFQuery::single(v, th)?, tol)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    let mut distances = Vec::with_capacity(rs.len());
    for &r in rs {
        let s = r.powf(-h);
        let vals = crate::par_map(&grid, |&(v, th)| {
            if th == 0.0 || v == 0.0 {
                return Ok(1.0);
            }
            let q = CFQuery::new(vec![u + r * v, u], vec![th * s, -th * s])?;
            cf(spec, &q, tol)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        let d = vals
            .iter()
            .zip(&reference)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        distances.push(d);
    }
    let strictly_decreasing = distances.windows(2).all(|w| w[1] < w[0]);
    Ok(LocalisabilityReport {
        u,
        rs: rs.to_vec(),
        distances,
        tangent,
        hypothesis_holds: h > 1.0 / spec.stability_bounds().0,
        strictly_decreasing,
    })
}

/// Dyadic oscillation regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub exponent: f64,
    /// `(log2 block length, log mean oscillation)`
    pub points: Vec<(f64, f64)>,
    pub rms_residual: f64,
}

/// Minimum number of steps of a path handed to [`holder_exponent_estimate`].
pub const HOLDER_MIN_STEPS: usize = 1 << 12;

/// Regularity exponent of a path sampled on a uniform grid of `2^n + 1`
/// points, `n ≥ 12`: slope of the log mean block oscillation (max minus min
/// over dyadic blocks) against log block length, over blocks from 2 steps up
/// to 1/16 of the path.
pub fn holder_exponent_estimate(path: &[f64]) -> Result<HolderEstimate> {
    let steps = path.len().saturating_sub(1);
    if steps < HOLDER_MIN_STEPS || !steps.is_power_of_two() {
        return Err(Error::Experiment(format!(
            "path needs 2^n + 1 points with n >= 12, got {}",
            path.len()
        )));
    }
    if path.iter().any(|v| !v.is_finite()) {
        return Err(Error::Experiment("path has non-finite values".into()));
    }
    let levels = steps.trailing_zeros() as usize;
    let h = 1.0 / steps as f64;
    let mut points = Vec::new();
    for j in 1..=levels - 4 {
        let m = 1usize << j;
        let blocks = steps / m;
        let mut total = 0.0;
        for b in 0..blocks {
            let seg = &path[b * m..=(b + 1) * m];
            let hi = seg.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x));
            let lo = seg.iter().fold(f64::INFINITY, |a, &x| a.min(x));
            total += hi - lo;
        }
        let mean = total / blocks as f64;
        if !(mean > 0.0) {
            return Err(Error::Experiment("path is constant on a dyadic scale".into()));
        }
        points.push(((m as f64 * h).log2(), mean.ln()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0 * std::f64::consts::LN_2).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = stats::linear_fit(&xs, &ys)?;
    Ok(HolderEstimate {
        exponent: fit.slope,
        points,
        rms_residual: fit.rms_residual,
    })
}

/// Simulated path on `t0 + k/2^n`, `k = 0..=2^n`, with `cells_per_step` cells
/// per sampling step around the window.
pub fn simulate_holder_path(
    spec: &ProcessSpec,
    t0: f64,
    n: u32,
    cells_per_step: u32,
    seed: u64,
    tail_tol: f64,
) -> Result<Vec<f64>> {
    let steps = 1usize << n;
    let times: Vec<f64> = (0..=steps).map(|k| t0 + k as f64 / steps as f64).collect();
    let dt = 1.0 / steps as f64;
    let grid = GridSpec::for_spec(spec, &times, 1e-2, ((1e-2 / dt).ceil() as u32) * cells_per_step, tail_tol, seed)?
        .with_grading(0.05, 1.0)?;
    let ens = simulate_paths(spec, &grid, &times, 1)?;
    Ok(ens.row(0).to_vec())
}

/// Discrete supremum of `|X|` on `[0, 1]` over successively refined sampling
/// grids of one realisation. Reported, never asserted: any finite simulation
/// is bounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupGrowth {
    pub levels: Vec<u32>,
    pub sups: Vec<f64>,
}

pub fn sup_growth(spec: &ProcessSpec, levels: &[u32], seed: u64, tail_tol: f64) -> Result<SupGrowth> {
    let top = *levels
        .iter()
        .max()
        .ok_or_else(|| Error::Config("at least one level needed".into()))?;
    let steps = 1usize << top;
    let times: Vec<f64> = (1..=steps).map(|k| k as f64 / steps as f64).collect();
    let grid = GridSpec::for_spec(spec, &times, 1.0 / steps as f64, 4, tail_tol, seed)?.with_grading(0.05, 1.0)?;
    let ens = simulate_paths(spec, &grid, &times, 1)?;
    let path = ens.row(0);
    let sups = levels
        .iter()
        .map(|&l| {
            let stride = 1usize << (top - l);
            path.iter()
                .skip(stride - 1)
                .step_by(stride)
                .fold(0.0f64, |m, x| m.max(x.abs()))
        })
        .collect();
    Ok(SupGrowth {
        levels: levels.to_vec(),
        sups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ParamFunction;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// `∫_0^∞ x^{μ-1} sin²x dx = -Γ(μ) cos(μπ/2) / 2^{μ+1}` for `-2 < μ < 0`.
    fn sin2_closed(gamma: f64) -> f64 {
        let mu = -gamma;
        -libm::tgamma(mu) * (mu * PI / 2.0).cos() / 2f64.powf(mu + 1.0)
    }

    #[test]
    fn sin2_oracle() {
        assert_relative_eq!(sin2_integral(1.0, 1e-10).unwrap(), PI / 2.0, max_relative = 1e-10);
        for g in [0.2, 0.5, 0.9, 1.3, 1.7] {
            assert_relative_eq!(sin2_integral(g, 1e-10).unwrap(), sin2_closed(g), max_relative = 1e-9);
        }
        assert!(sin2_integral(2.0, 1e-8).is_err());
    }

    #[test]
    fn flimit_constant_alpha_is_time_free() {
        let spec = ProcessSpec::constant(0.7, 1.8, 0.1).unwrap();
        let f0 = flimit(&spec, 0.5, 0.0, 1e-10).unwrap();
        for t in [1.0, 5.0] {
            let f = flimit(&spec, 0.5, t, 1e-10).unwrap();
            assert!((f.value - f0.value).abs() <= 1e-10 * f0.value);
        }
        assert!(f0.value > 0.0);
    }

    #[test]
    fn flimit_gaussian_moment() {
        // α = 2: increments are N(0, 2K r^{2H}) and E|N(0, s²)|^γ = s^γ 2^{γ/2} Γ((γ+1)/2) / √π
        let spec = ProcessSpec::constant(0.7, 2.0, 0.0).unwrap();
        for g in [0.5, 1.0, 1.5] {
            let f = flimit(&spec, g, 0.3, 1e-10).unwrap();
            let s = (2.0 * f.kernel_integral).sqrt();
            let exact = s.powf(g) * 2f64.powf(g / 2.0) * libm::tgamma((g + 1.0) / 2.0) / PI.sqrt();
            assert_relative_eq!(f.value, exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn flimit_domain() {
        let spec = ProcessSpec::constant(0.5, 2.0, 0.0).unwrap();
        assert!(matches!(flimit(&spec, 2.0, 0.0, 1e-8), Err(Error::Domain(_))));
        assert!(matches!(flimit(&spec, 0.7, 0.0, 1e-8), Err(Error::Domain(_))));
        let spec = ProcessSpec::ltmfsm(ParamFunction::sinusoidal(0.6, 0.1, 3.0, 0.0).unwrap(), 1.5, 0.2).unwrap();
        assert!(flimit(&spec, 0.5, 0.0, 1e-8).is_err());
    }

    #[test]
    fn flimit_matches_direct_stable_moment() {
        // |ΔX| ~ SαS(σ) with σ = (K r^{αH})^{1/α}; E|S|^γ for SαS(1) is
        // 2^γ Γ((1+γ)/2) Γ(1-γ/α) / (Γ(1-γ/2) √π)
        let (alpha, h, g) = (1.8, 0.7, 0.5);
        let spec = ProcessSpec::constant(h, alpha, 0.0).unwrap();
        let f = flimit(&spec, g, 0.0, 1e-10).unwrap();
        let unit = 2f64.powf(g) * libm::tgamma((1.0 + g) / 2.0) * libm::tgamma(1.0 - g / alpha)
            / (libm::tgamma(1.0 - g / 2.0) * PI.sqrt());
        let exact = f.kernel_integral.powf(g / alpha) * unit;
        assert_relative_eq!(f.value, exact, max_relative = 1e-8);
    }

    #[test]
    fn empirical_cf_trivia() {
        let e = empirical_cf(&[0.0; 200], &[0.0, 1.0, -3.0]);
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        assert!(e.imag_ok);
        let e = empirical_cf(&[1.0, -2.0, 5.0], &[0.0]);
        assert_eq!(e.values, vec![1.0]);
    }

    #[test]
    fn moment_trivia() {
        assert_relative_eq!(moment_estimate(&[-2.0, 2.0], 0.5), 2f64.sqrt());
        assert_eq!(moment_estimate(&[0.0, 3.0, -1.0], 0.0), 1.0);
    }

    #[test]
    fn tail_trivia() {
        let spec = ProcessSpec::constant(0.7, 1.5, 0.1).unwrap();
        let r = tail_check(&[0.0; 100], &[0.5, 1.0], &spec, 1.0, 1.0).unwrap();
        assert!(r.exceedance.iter().all(|&p| p == 0.0));
        assert_eq!(r.constant, 0.0);
        let r = tail_check(&[0.1, -3.0, 2.0], &[1.0, 1e9], &spec, 1.0, 0.5).unwrap();
        assert_eq!(r.exceedance, vec![2.0 / 3.0, 0.0]);
        assert!(tail_check(&[1.0], &[0.0], &spec, 1.0, 0.5).is_err());
    }

    #[test]
    fn holder_of_a_line() {
        let n = 1 << 12;
        let path: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        assert_relative_eq!(holder_exponent_estimate(&path).unwrap().exponent, 1.0, epsilon = 1e-10);
        assert!(holder_exponent_estimate(&path[..1000]).is_err());
    }

    #[test]
    fn holder_of_brownian_path() {
        let spec = ProcessSpec::constant(0.5, 2.0, 0.0).unwrap();
        let mut est = Vec::new();
        for seed in 0..3 {
            let path = simulate_holder_path(&spec, 0.0, 12, 1, seed, 1e-3).unwrap();
            est.push(holder_exponent_estimate(&path).unwrap().exponent);
        }
        let m = stats::mean(&est);
        assert!((m - 0.5).abs() < 0.1, "{est:?}");
    }

    #[test]
    fn lfsm_is_its_own_tangent() {
        let spec = ProcessSpec::constant(0.8, 1.6, 0.0).unwrap();
        let rep = localisability_check(&spec, 1.0, &[0.5, 1.0], &[0.5, 1.0], &[1.0, 1e-2, 1e-4], 1e-10).unwrap();
        assert!(rep.distances.iter().all(|&d| d <= 1e-9), "{:?}", rep.distances);
        let zero = localisability_check(&spec, 1.0, &[0.5], &[0.0], &[1.0, 1e-2], 1e-8).unwrap();
        assert!(zero.distances.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn tempered_distance_shrinks() {
        let alpha = ParamFunction::sinusoidal(1.6, 0.2, 2.0 * PI, PI / 2.0 - 1.0).unwrap();
        let spec = ProcessSpec::ltfmsm(0.8, alpha, 0.5).unwrap();
        let rep = localisability_check(&spec, 1.0, &[1.0], &[1.0], &[1.0, 1e-4], 1e-9).unwrap();
        assert!(rep.distances[1] < rep.distances[0], "{:?}", rep.distances);
        assert!(rep.hypothesis_holds);
    }
}
