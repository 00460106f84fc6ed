//! The acceptance experiments, runnable one by one or as a batch.
//!
//! Each criterion returns a [`CriterionReport`] whose `measured` block is a
//! deterministic function of the options (wall-clock times are kept apart in
//! `seconds`). Failures inside an experiment are reported as a failed
//! criterion carrying the error text.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::time::Instant;

use crate::analyze::{cf_gap, localisability_check, moment_limit_check, sin2_integral};
use crate::charfn::{cf, scaling_check, CFQuery};
use crate::dependence::{band_check, default_lags, dep_sweep, rate_fit, semi_lrd_sum, BandSlack};
use crate::error::Result;
use crate::model::{KernelSum, ParamFunction, ProcessSpec};
use crate::quadrature::{integrate_alpha_power, IntegrandSpec, Lower, Point};
use crate::quasinorm::{default_deltas, geometric_grid, holder_slope_experiment, quasinorm};
use crate::simulate::{simulate_paths, GridSpec};
use crate::stats;

pub const CRITERIA: std::ops::RangeInclusive<u32> = 1..=10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    /// Halve Monte Carlo path counts, double quadrature tolerances and Monte
    /// Carlo acceptance thresholds.
    pub fast: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            fast: false,
            seed: 20_240_917,
        }
    }
}

impl VerifyOptions {
    fn paths(&self, n: usize) -> usize {
        if self.fast {
            n / 2
        } else {
            n
        }
    }

    fn tol(&self, t: f64) -> f64 {
        if self.fast {
            2.0 * t
        } else {
            t
        }
    }

    fn mc_gate(&self, g: f64) -> f64 {
        if self.fast {
            2.0 * g
        } else {
            g
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: u32,
    pub name: String,
    pub target: String,
    pub measured: Value,
    pub pass: bool,
    pub seconds: f64,
}

impl CriterionReport {
    /// One line: `criterion N [PASS|FAIL] name: target`.
    pub fn summary_line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {} ({:.1} s): target {}",
            self.criterion,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.target
        )
    }
}

/// Number of worker threads the process may use.
pub fn available_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

struct Outcome {
    measured: Value,
    pass: bool,
}

fn finish(criterion: u32, name: &str, target: &str, start: Instant, out: Result<Outcome>) -> CriterionReport {
    let (measured, pass) = match out {
        Ok(o) => (o.measured, o.pass),
        Err(e) => (json!({ "error": e.to_string() }), false),
    };
    CriterionReport {
        criterion,
        name: name.into(),
        target: target.into(),
        measured,
        pass,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs one criterion by number.
pub fn run_criterion(n: u32, opts: &VerifyOptions) -> Option<CriterionReport> {
    Some(match n {
        1 => scaling(opts),
        2 => exact_rates(opts),
        3 => rate_bands(opts),
        4 => simulation_fidelity(opts),
        5 => gaussian_oracle(opts),
        6 => moment_limit(opts),
        7 => quasinorm_slopes(opts),
        8 => localisability(opts),
        9 => semi_lrd(opts),
        10 => property_suites(opts),
        _ => return None,
    })
}

pub fn verify_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    CRITERIA.filter_map(|n| run_criterion(n, opts)).collect()
}

/// Scaling identity for LTmFSM with `H_t = 0.6 + 0.2 sin t`.
pub fn scaling(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let target = "max CF difference <= 1e-6 over c in {0.5, 2, 5}, runtime < 10 s";
    let out = (|| {
        let h = ParamFunction::sinusoidal(0.6, 0.2, 2.0 * PI, 0.0)?;
        let spec = ProcessSpec::ltmfsm(h, 1.5, 0.3)?;
        let times = vec![0.5, 1.25, 2.0];
        let thetas = [vec![1.0, -0.5, 0.8], vec![-0.3, 0.9, 0.4], vec![0.2, 0.2, -1.1]];
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for c in [0.5, 2.0, 5.0] {
            for th in &thetas {
                let q = CFQuery::new(times.clone(), th.clone())?;
                let d = scaling_check(&spec, c, &q, opts.tol(1e-8))?;
                worst = worst.max(d);
                rows.push(json!({ "c": c, "thetas": th, "difference": d }));
            }
        }
        let secs = start.elapsed().as_secs_f64();
        Ok(Outcome {
            pass: worst <= 1e-6 && secs < 10.0,
            measured: json!({ "max_difference": worst, "cases": rows }),
        })
    })();
    finish(1, "scaling identity", target, start, out)
}

fn rate_case(spec: &ProcessSpec, lags: &[f64], tol: f64) -> Result<Value> {
    let pts = dep_sweep(spec, 0.0, lags, 1.0, 1.0, tol)?;
    let fit = rate_fit(&pts)?;
    Ok(json!({
        "lags": [lags[0], lags[lags.len() - 1], lags.len()],
        "exp_rate": fit.exp_rate,
        "power": fit.power,
        "rms_residual": fit.rms_residual,
    }))
}

/// Rate fits for constant stability on the lag window `[20, 400]`.
pub fn exact_rates(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let target = "alpha=0.7: rate 0.035 +-5%, power -0.44 +-15%; alpha=1.6: rate 0.05 +-5%, power 0.125 +-15%; lags [20, 400]; < 60 s each";
    let out = (|| {
        let cases = [(0.8, 0.7, 0.05, 0.035, -0.44), (0.75, 1.6, 0.05, 0.05, 0.125)];
        let mut rows = Vec::new();
        let mut pass = true;
        for (h, alpha, lambda, rate, power) in cases {
            let t = Instant::now();
            let spec = ProcessSpec::constant(h, alpha, lambda)?;
            let fit = rate_case(&spec, &default_lags(), opts.tol(1e-8))?;
            let secs = t.elapsed().as_secs_f64();
            let r = fit["exp_rate"].as_f64().unwrap_or(f64::NAN);
            let p = fit["power"].as_f64().unwrap_or(f64::NAN);
            let rate_ok = ((r - rate) / rate).abs() <= 0.05;
            let power_ok = ((p - power) / power).abs() <= 0.15;
            let ok = rate_ok && power_ok && secs < 60.0;
            pass &= ok;
            // the same fit far out, where the asymptotic form has taken over
            let late = rate_case(&spec, &geometric_grid(400.0, 2000.0, 24), opts.tol(1e-8))?;
            rows.push(json!({
                "alpha": alpha, "H": h, "lambda": lambda,
                "target_rate": rate, "target_power": power,
                "fit": fit, "rate_ok": rate_ok, "power_ok": power_ok,
                "late_window_fit": late,
                "pass": ok,
            }));
        }
        Ok(Outcome {
            pass,
            measured: json!({ "cases": rows }),
        })
    })();
    finish(2, "dependence rates, constant stability", target, start, out)
}

/// Band checks for sinusoidal stability indices.
pub fn rate_bands(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let target = "a=0.6,b=0.9: rate in [0.06, 0.09] +-0.005; a=1.3,b=1.9: rate 0.1 +-0.01, power in [0.131, 0.374] +-0.05";
    let out = (|| {
        let cases = [
            (0.8, 0.75, 0.15, 0.1, BandSlack { rate: 0.005, power: f64::INFINITY }),
            (0.9, 1.6, 0.3, 0.1, BandSlack { rate: 0.01, power: 0.05 }),
        ];
        let mut rows = Vec::new();
        let mut pass = true;
        for (h, mean, amp, lambda, slack) in cases {
            let alpha = ParamFunction::sinusoidal(mean, amp, 2.0 * PI, 0.0)?;
            let spec = ProcessSpec::ltfmsm(h, alpha, lambda)?;
            let pts = dep_sweep(&spec, 0.0, &default_lags(), 1.0, 1.0, opts.tol(1e-8))?;
            let fit = rate_fit(&pts)?;
            let rep = band_check(&spec, &fit, slack)?;
            pass &= rep.pass;
            rows.push(json!({
                "alpha": format!("{mean} + {amp} sin(x)"), "H": h, "lambda": lambda,
                "exp_rate": rep.exp_rate, "power": rep.power,
                "rate_band": rep.rate_band, "power_band": rep.power_band,
                "rate_ok": rep.rate_ok,
                "power_ok": rep.power_ok,
                "power_checked": slack.power.is_finite(),
                "pass": rep.pass,
            }));
        }
        Ok(Outcome {
            pass,
            measured: json!({ "cases": rows }),
        })
    })();
    finish(3, "dependence bands, multistable", target, start, out)
}

/// Empirical against exact CF for LTFmSM with `α(x) = 1.5 + 0.3 sin x`.
pub fn simulation_fidelity(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let gate = opts.mc_gate(0.02);
    let target = format!("sup CF gap <= {gate} at t in {{0.5, 1}}, 25 thetas in [-3, 3]; < 5 min on 8 workers");
    let out = (|| {
        let alpha = ParamFunction::sinusoidal(1.5, 0.3, 2.0 * PI, 0.0)?;
        let spec = ProcessSpec::ltfmsm(0.7, alpha, 0.1)?;
        let times = [0.5, 1.0];
        let grid = GridSpec::for_spec(&spec, &times, 1e-3, 16, 1e-4, opts.seed)?.with_grading(0.05, 1.0)?;
        let n = opts.paths(50_000);
        let ens = simulate_paths(&spec, &grid, &times, n)?;
        let thetas: Vec<f64> = (0..25).map(|k| -3.0 + 0.25 * k as f64).collect();
        let mut gaps = Vec::new();
        let mut imag_ok = true;
        for j in 0..times.len() {
            let g = cf_gap(&ens, j, &thetas, opts.tol(1e-8))?;
            imag_ok &= g.empirical.imag_ok;
            gaps.push(g.sup_gap);
        }
        let worst = gaps.iter().fold(0.0f64, |m, g| m.max(*g));
        let secs = start.elapsed().as_secs_f64();
        let workers = available_workers();
        // the runtime bound is stated for 8 workers; on smaller machines it is reported only
        let runtime_checked = workers >= 8;
        let runtime_ok = !runtime_checked || secs < 300.0;
        Ok(Outcome {
            pass: worst <= gate && runtime_ok,
            measured: json!({
                "paths": n, "cells": ens.n_cells, "left_cut": grid.left_cut,
                "tail_mass": ens.tail_mass,
                "sup_gap": gaps, "max_gap": worst,
                "imaginary_within_3_over_sqrt_n": imag_ok,
                "runtime_checked": runtime_checked,
            }),
        })
    })();
    finish(4, "simulation fidelity", &target, start, out)
}

/// Brownian reduction: variance and normality at `t = 1`.
pub fn gaussian_oracle(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let gate = opts.mc_gate(0.03);
    let target = format!("variance within {:.0}% of 2, Jarque-Bera not rejected at 1%", gate * 100.0);
    let out = (|| {
        let spec = ProcessSpec::constant(0.5, 2.0, 0.0)?;
        let grid = GridSpec::new(-2.0, 1.0, 1e-3, 1, opts.seed.wrapping_add(5))?;
        let n = opts.paths(10_000);
        let x = simulate_paths(&spec, &grid, &[1.0], n)?.column(0);
        let var = stats::variance(&x);
        let jb = stats::jarque_bera(&x);
        let crit = stats::chi2_2_critical(0.01);
        let var_ok = ((var - 2.0) / 2.0).abs() <= gate;
        Ok(Outcome {
            pass: var_ok && jb < crit,
            measured: json!({ "paths": n, "variance": var, "jarque_bera": jb, "critical": crit }),
        })
    })();
    finish(5, "gaussian oracle", &target, start, out)
}

/// Monte Carlo small-lag moment against the closed form.
pub fn moment_limit(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let gate = opts.mc_gate(0.10);
    let target = format!(
        "MC moment at r=1e-3 within {:.0}% of F(0.5, t); sin^2 integral at gamma=1 equals pi/2 to 1e-8",
        gate * 100.0
    );
    let out = (|| {
        let spec = ProcessSpec::constant(0.7, 1.8, 0.1)?;
        let n = opts.paths(10_000);
        let chk = moment_limit_check(&spec, 0.5, 1.0, 1e-3, n, 1000, opts.seed.wrapping_add(6), opts.tol(1e-9))?;
        let s2 = sin2_integral(1.0, 1e-10)?;
        let s2_err = (s2 - PI / 2.0).abs() / (PI / 2.0);
        Ok(Outcome {
            pass: chk.relative_gap <= gate && s2_err <= 1e-8,
            measured: json!({
                "paths": n, "limit": chk.limit.value, "estimate": chk.estimate,
                "standard_error": chk.standard_error, "relative_gap": chk.relative_gap,
                "cells_in_lag": chk.cells_in_lag, "sin2_gamma1": s2, "sin2_relative_error": s2_err,
            }),
        })
    })();
    finish(6, "moment limit", &target, start, out)
}

/// Quasi-norm Hölder slopes.
pub fn quasinorm_slopes(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let lo = 0.7 * 1.4 / 1.8 - 0.05;
    let hi = 0.7 * 1.8 / 1.4 + 0.05;
    let target = format!("slope in [{lo:.4}, {hi:.4}]; constant control 0.7 +-0.02");
    let out = (|| {
        let alpha = ParamFunction::sinusoidal(1.6, 0.2, 2.0 * PI, 0.0)?;
        let spec = ProcessSpec::ltfmsm(0.7, alpha, 0.1)?;
        let s = holder_slope_experiment(&spec, 1.0, &default_deltas(), opts.tol(1e-9))?;
        let ctl = ProcessSpec::constant(0.7, 1.6, 0.1)?;
        let c = holder_slope_experiment(&ctl, 1.0, &default_deltas(), opts.tol(1e-9))?;
        Ok(Outcome {
            pass: s.slope >= lo && s.slope <= hi && (c.slope - 0.7).abs() <= 0.02,
            measured: json!({ "slope": s.slope, "control_slope": c.slope }),
        })
    })();
    finish(7, "quasi-norm slopes", &target, start, out)
}

/// Exact CF distance to the tangent process.
pub fn localisability(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let target = "distance strictly decreasing in r, <= 1e-3 at r = 1e-4; LFSM control <= 1e-7 at every r";
    let out = (|| {
        // α peaks at u = 1: α(1) = 1.8, range [1.4, 1.8]
        let alpha = ParamFunction::sinusoidal(1.6, 0.2, 2.0 * PI, PI / 2.0 - 1.0)?;
        let spec = ProcessSpec::ltfmsm(0.8, alpha, 0.5)?;
        let rs = [1.0, 1e-1, 1e-2, 1e-3, 1e-4];
        let vs = [0.5, 1.0];
        let thetas = [0.5, 1.0, 2.0];
        let tol = opts.tol(1e-10);
        let rep = localisability_check(&spec, 1.0, &vs, &thetas, &rs, tol)?;
        let ctl = localisability_check(&ProcessSpec::constant(0.8, 1.8, 0.0)?, 1.0, &vs, &thetas, &rs, tol)?;
        let last = *rep.distances.last().unwrap_or(&f64::NAN);
        let ctl_ok = ctl.distances.iter().all(|&d| d <= 1e-7);
        Ok(Outcome {
            pass: rep.strictly_decreasing && last <= 1e-3 && ctl_ok,
            measured: json!({
                "r": rs, "distances": rep.distances, "control_distances": ctl.distances,
                "strictly_decreasing": rep.strictly_decreasing, "hypothesis_holds": rep.hypothesis_holds,
            }),
        })
    })();
    finish(8, "localisability", target, start, out)
}

/// `Σ_{n≤1000} |R(n)|` against the tempering rate.
pub fn semi_lrd(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let target = "sum_{n<=1000} |R(n)| strictly increasing as lambda decreases through 0.1, 0.01, 0.001";
    let out = (|| {
        let spec = ProcessSpec::constant(0.7, 0.8, 0.1)?;
        let lambdas = [0.1, 0.01, 0.001];
        let sums = |theta: f64| -> Result<Vec<f64>> {
            Ok(semi_lrd_sum(&spec, &lambdas, 1000, theta, theta, 0.0, opts.tol(1e-8))?
                .iter()
                .map(|r| *r.partial_sums.last().unwrap_or(&f64::NAN))
                .collect())
        };
        let s = sums(1.0)?;
        let increasing = s.windows(2).all(|w| w[1] > w[0]);
        // same sums with θ = 0.1, where K = E e^{iθY}·E e^{iθY} is close to 1
        let small = sums(0.1)?;
        Ok(Outcome {
            pass: increasing,
            measured: json!({
                "lambda": lambdas, "theta": 1.0, "sums": s, "strictly_increasing": increasing,
                "theta_0_1_sums": small,
            }),
        })
    })();
    finish(9, "semi-long-range dependence", target, start, out)
}

/// CF bounds and symmetry, quasi-norm homogeneity, worker-count determinism,
/// quadrature closed forms.
pub fn property_suites(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let target = "CF in (0,1] and even in theta; quasi-norm homogeneity 1e-8; determinism across worker counts; closed forms 1e-8";
    let out = (|| {
        let tol = opts.tol(1e-10);
        let specs = [
            ProcessSpec::ltfmsm(0.7, ParamFunction::sinusoidal(1.5, 0.3, 2.0 * PI, 0.0)?, 0.1)?,
            ProcessSpec::ltmfsm(ParamFunction::sinusoidal(0.6, 0.2, 2.0 * PI, 0.0)?, 1.5, 0.3)?,
            ProcessSpec::ltfmsm(0.8, ParamFunction::sinusoidal(0.75, 0.15, 2.0 * PI, 0.0)?, 0.1)?,
        ];
        let mut cf_ok = true;
        let mut sym_worst = 0.0f64;
        let mut hom_worst = 0.0f64;
        for spec in &specs {
            for (times, th) in [
                (vec![0.5, 1.5], vec![0.7, -1.2]),
                (vec![0.25, 1.0, 3.0], vec![2.5, 0.4, -0.9]),
                (vec![2.0], vec![5.0]),
            ] {
                let q = CFQuery::new(times.clone(), th.clone())?;
                let v = cf(spec, &q, tol)?;
                let w = cf(spec, &q.scaled(-1.0), tol)?;
                cf_ok &= v > 0.0 && v <= 1.0;
                sym_worst = sym_worst.max((v - w).abs());
                let pairs: Vec<(f64, f64)> = th.iter().copied().zip(times.iter().copied()).collect();
                let base = quasinorm(&KernelSum::motion(spec, &pairs), tol)?.value;
                for c in [0.3, -2.0, 7.5] {
                    let scaled: Vec<(f64, f64)> = pairs.iter().map(|&(a, t)| (c * a, t)).collect();
                    let n = quasinorm(&KernelSum::motion(spec, &scaled), tol)?.value;
                    hom_worst = hom_worst.max((n - c.abs() * base).abs() / (c.abs() * base));
                }
            }
        }
        let determinism = worker_determinism(opts.seed)?;
        let closed = closed_form_errors()?;
        let closed_worst = closed.iter().fold(0.0f64, |m, (_, e)| m.max(*e));
        Ok(Outcome {
            pass: cf_ok && sym_worst <= 1e-12 && hom_worst <= 1e-8 && determinism && closed_worst <= 1e-8,
            measured: json!({
                "cf_in_unit_interval": cf_ok,
                "symmetry_max_difference": sym_worst,
                "homogeneity_max_relative_error": hom_worst,
                "identical_across_worker_counts": determinism,
                "closed_form_relative_errors": closed.iter().map(|(n, e)| json!({ "case": n, "error": e })).collect::<Vec<_>>(),
            }),
        })
    })();
    finish(10, "property suites", target, start, out)
}

/// Simulates one ensemble with 1 and with 3 worker threads and compares bits.
pub fn worker_determinism(seed: u64) -> Result<bool> {
    let spec = ProcessSpec::ltfmsm(0.7, ParamFunction::sinusoidal(1.5, 0.3, 2.0 * PI, 0.0)?, 0.2)?;
    let times = [0.5, 1.0, 2.0];
    let grid = GridSpec::for_spec(&spec, &times, 1e-2, 4, 1e-3, seed)?.with_grading(0.05, 1.0)?;
    let run = |threads: usize| -> Result<Vec<f64>> {
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| crate::Error::Config(e.to_string()))?;
            pool.install(|| Ok(simulate_paths(&spec, &grid, &times, 257)?.values))
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = threads;
            Ok(simulate_paths(&spec, &grid, &times, 257)?.values)
        }
    };
    let a = run(1)?;
    let b = run(3)?;
    Ok(a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()))
}

/// Relative errors of `∫|f|^α` against closed forms.
pub fn closed_form_errors() -> Result<Vec<(&'static str, f64)>> {
    type F = Box<dyn Fn(Point) -> f64>;
    let c = ParamFunction::constant;
    let cases: Vec<(&'static str, IntegrandSpec<F>, f64)> = vec![
        (
            "indicator on [0,1], alpha 1.3",
            IntegrandSpec::new(Box::new(|_| 1.0) as F, c(1.3)?, vec![], Lower::Finite(0.0), 1.0)?,
            1.0,
        ),
        (
            "(1-x)^-0.3 on [0,1]",
            IntegrandSpec::new(Box::new(|p: Point| p.lag_from(1.0).powf(-0.3)) as F, c(1.0)?, vec![1.0], Lower::Finite(0.0), 1.0)?,
            1.0 / 0.7,
        ),
        (
            "x^-0.9 on [0,1]",
            IntegrandSpec::new(Box::new(|p: Point| p.x().powf(-0.9)) as F, c(1.0)?, vec![0.0], Lower::Finite(0.0), 1.0)?,
            10.0,
        ),
        (
            "e^x on (-inf,0], alpha 0.5",
            IntegrandSpec::new(Box::new(|p: Point| p.x().exp()) as F, c(0.5)?, vec![], Lower::NegInfinity, 0.0)?,
            2.0,
        ),
        (
            "1/(1+x^2) on (-inf,0]",
            IntegrandSpec::new(Box::new(|p: Point| 1.0 / (1.0 + p.x() * p.x())) as F, c(1.0)?, vec![], Lower::NegInfinity, 0.0)?,
            PI / 2.0,
        ),
        (
            "e^{-x^2/2} on (-inf,0], alpha 2",
            IntegrandSpec::new(Box::new(|p: Point| (-0.5 * p.x() * p.x()).exp()) as F, c(2.0)?, vec![], Lower::NegInfinity, 0.0)?,
            PI.sqrt() / 2.0,
        ),
    ];
    cases
        .into_iter()
        .map(|(name, s, exact)| {
            let v = integrate_alpha_power(&s, 1e-11)?.value;
            Ok((name, (v - exact).abs() / exact))
        })
        .collect()
}
