use serde::Serialize;
use serde_json::{json, Value};
use std::path::Path;

use tmsm::analyze::{
    flimit, holder_exponent_estimate, localisability_check, moment_limit_check, moment_sweep,
    simulate_holder_path, sup_growth, tail_check, constant_spread,
};
use tmsm::charfn::{cf as cf_value, scaling_check, CFQuery};
use tmsm::dependence::{band_check, default_lags, dep_sweep, rate_fit, semi_lrd_sum, BandSlack};
use tmsm::quasinorm::{default_deltas, holder_slope_experiment, increment_quasinorm};
use tmsm::simulate::{simulate_noise, simulate_paths, GridSpec};
use tmsm::verify::{self, VerifyOptions};
use tmsm::{Error, ProcessSpec, Result};

use crate::output::{num, write_binary, write_csv, write_json, Sink};
use crate::{
    CfArgs, DependenceArgs, HolderArgs, LocalizeArgs, MomentsArgs, QuasinormArgs, ScalingArgs, SemiLrdArgs,
    SimulateArgs, TailArgs, VerifyArgs, EXIT_ASSERTION,
};

fn io_err(path: Option<&Path>, e: std::io::Error) -> Error {
    match path {
        Some(p) => Error::Config(format!("cannot write {}: {e}", p.display())),
        None => Error::Config(format!("cannot write output: {e}")),
    }
}

pub fn load_spec(arg: &str) -> Result<ProcessSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::Config(format!("cannot read spec {arg}: {e}")))?
    };
    ProcessSpec::from_json(&text)
}

fn config<A: Serialize>(command: &str, args: &A, spec: Option<&ProcessSpec>) -> Value {
    let mut c = json!({ "command": command, "version": env!("CARGO_PKG_VERSION"), "args": args });
    if let Some(s) = spec {
        c["spec"] = serde_json::to_value(s).unwrap_or(Value::Null);
    }
    c
}

/// Human summary goes to stdout unless the data does.
struct Report {
    sink: Sink,
    data_on_stdout: bool,
    path: Option<std::path::PathBuf>,
}

impl Report {
    fn new(out: Option<&Path>) -> Self {
        Report {
            sink: Sink::new(out),
            data_on_stdout: out.is_none(),
            path: out.map(Path::to_path_buf),
        }
    }

    fn say(&self, line: impl AsRef<str>) {
        if self.data_on_stdout {
            eprintln!("{}", line.as_ref());
        } else {
            println!("{}", line.as_ref());
        }
    }

    fn csv(&self, config: &Value, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        write_csv(&self.sink, config, &header, rows).map_err(|e| io_err(self.path.as_deref(), e))
    }

    fn json(&self, doc: &Value) -> Result<()> {
        write_json(&self.sink, doc).map_err(|e| io_err(self.path.as_deref(), e))
    }
}

fn verdict_exit(strict: bool, verdicts: &[Value]) -> u8 {
    let failed = verdicts.iter().any(|v| v["pass"] == Value::Bool(false));
    if strict && failed {
        EXIT_ASSERTION
    } else {
        0
    }
}

/// CSV whose config line carries a `verdicts` array, one block per assertion.
fn csv_with_verdicts(
    report: &Report,
    config: &Value,
    verdicts: &[Value],
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut cfg = config.clone();
    cfg["verdicts"] = Value::Array(verdicts.to_vec());
    report.csv(&cfg, header, rows)?;
    for v in verdicts {
        report.say(format!("verdict: {v}"));
    }
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> Result<u8> {
    let spec = load_spec(&a.spec.spec)?;
    let mut grid_times = a.times.clone();
    if a.noise {
        grid_times.extend(a.times.iter().map(|t| t + 1.0));
    }
    let mut grid = match a.cut {
        Some(cut) => {
            let right = grid_times.iter().fold(0.0f64, |m, &t| m.max(t));
            GridSpec::new(-cut, right, a.dt, a.refine, a.seed)?
        }
        None => GridSpec::for_spec(&spec, &grid_times, a.dt, a.refine, a.tail_tol, a.seed)?,
    }
    .with_refine_radius(a.refine_radius)?;
    if a.grading > 0.0 {
        grid = grid.with_grading(a.grading, a.max_step)?;
    }
    let ens = if a.noise {
        simulate_noise(&spec, &grid, &a.times, a.paths)?
    } else {
        simulate_paths(&spec, &grid, &a.times, a.paths)?
    };
    for w in &ens.warnings {
        eprintln!("warning: {w}");
    }
    let mut cfg = config("simulate", a, Some(&spec));
    cfg["grid"] = serde_json::to_value(&grid)?;
    cfg["n_cells"] = json!(ens.n_cells);
    cfg["tail_mass"] = json!(ens.tail_mass);
    let report = Report::new(a.out.out.as_deref());
    match a.format.as_str() {
        "csv" => {
            let mut header = vec!["path".to_string()];
            header.extend(ens.times.iter().map(|t| format!("t={t}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = (0..ens.n_paths)
                .map(|i| {
                    let mut r = vec![i.to_string()];
                    r.extend(ens.row(i).iter().map(|&x| num(x)));
                    r
                })
                .collect();
            report.csv(&cfg, &header, &rows)?;
        }
        "json" => {
            let rows: Vec<&[f64]> = (0..ens.n_paths).map(|i| ens.row(i)).collect();
            report.json(&json!({ "config": cfg, "times": ens.times, "paths": rows, "warnings": ens.warnings }))?;
        }
        "binary" => {
            let path = a
                .out
                .out
                .as_deref()
                .ok_or_else(|| Error::Config("--format binary needs --out".into()))?;
            let meta = json!({
                "config": cfg,
                "dtype": "f64-le",
                "layout": "row-major",
                "shape": [ens.n_paths, ens.times.len()],
                "times": ens.times,
                "warnings": ens.warnings,
            });
            write_binary(path, &ens.values, &meta).map_err(|e| io_err(Some(path), e))?;
        }
        other => return Err(Error::Config(format!("unknown format {other:?}; use csv, json or binary"))),
    }
    report.say(format!(
        "simulated {} paths at {} times on {} cells (seed {}, left tail mass <= {:.3e})",
        ens.n_paths,
        ens.times.len(),
        ens.n_cells,
        a.seed,
        ens.tail_mass
    ));
    Ok(0)
}

pub fn cf(a: &CfArgs) -> Result<u8> {
    let spec = load_spec(&a.spec.spec)?;
    let q = CFQuery::new(a.t.clone(), a.theta.clone())?;
    let scales: Vec<f64> = match &a.sweep {
        None => vec![1.0],
        Some(v) => {
            let (s, n) = match v.as_slice() {
                [s, n] if *s > 0.0 && *n >= 2.0 && n.fract() == 0.0 => (*s, *n as usize),
                _ => return Err(Error::Config("--sweep takes S,N with S > 0 and integer N >= 2".into())),
            };
            (0..n).map(|k| -s + 2.0 * s * k as f64 / (n - 1) as f64).collect()
        }
    };
    let values: Vec<f64> = scales
        .iter()
        .map(|&s| cf_value(&spec, &q.scaled(s), a.tol))
        .collect::<Result<_>>()?;
    let cfg = config("cf", a, Some(&spec));
    let mut header = vec!["scale".to_string()];
    header.extend((1..=q.dim()).map(|k| format!("theta{k}")));
    header.push("cf".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = scales
        .iter()
        .zip(&values)
        .map(|(&s, &v)| {
            let mut r = vec![num(s)];
            r.extend(q.thetas().iter().map(|th| num(th * s)));
            r.push(num(v));
            r
        })
        .collect();
    match (&a.out.out, &a.sweep) {
        (None, None) => println!("{:?}", values[0]),
        (None, Some(_)) => Report::new(None).csv(&cfg, &header, &rows)?,
        (Some(p), _) => {
            Report::new(Some(p)).csv(&cfg, &header, &rows)?;
            for (s, v) in scales.iter().zip(&values) {
                println!("{s:?} {v:?}");
            }
        }
    }
    Ok(0)
}

pub fn quasinorm(a: &QuasinormArgs) -> Result<u8> {
    let spec = load_spec(&a.spec.spec)?;
    let report = Report::new(a.out.out.as_deref());
    let mut cfg = config("quasinorm", a, Some(&spec));
    if a.slope {
        let deltas = a.deltas.clone().unwrap_or_else(default_deltas);
        let s = holder_slope_experiment(&spec, a.t, &deltas, a.tol)?;
        cfg["fit"] = json!({ "slope": s.slope, "intercept": s.intercept, "rms_residual": s.rms_residual });
        let rows: Vec<Vec<String>> = s
            .points
            .iter()
            .map(|&(d, v)| vec![num(d), num(v), num(s.slope)])
            .collect();
        report.csv(&cfg, &["delta", "value", "slope"], &rows)?;
        report.say(format!("slope {:?} (rms residual {:.3e})", s.slope, s.rms_residual));
    } else {
        let v = increment_quasinorm(&spec, a.t, a.v, a.tol)?;
        let rows = vec![vec![num(a.t - a.v), num(v), String::new()]];
        report.csv(&cfg, &["delta", "value", "slope"], &rows)?;
        report.say(format!("{v:?}"));
    }
    Ok(0)
}

pub fn dependence(a: &DependenceArgs) -> Result<u8> {
    let spec = load_spec(&a.spec.spec)?;
    let lags = a.lags.clone().unwrap_or_else(default_lags);
    let points = dep_sweep(&spec, a.t1, &lags, a.theta1, a.theta2, a.tol)?;
    let fit = rate_fit(&points)?;
    let mut cfg = config("dependence", a, Some(&spec));
    cfg["fit"] = serde_json::to_value(fit)?;
    let mut code = 0;
    if a.band {
        let b = band_check(
            &spec,
            &fit,
            BandSlack {
                rate: a.rate_slack,
                power: a.power_slack,
            },
        )?;
        cfg["band"] = serde_json::to_value(&b)?;
        if !b.pass {
            code = EXIT_ASSERTION;
        }
    }
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![num(p.t), num(p.i), num(p.log_k), num(p.r), num(p.log_abs_r)])
        .collect();
    let report = Report::new(a.out.out.as_deref());
    report.csv(&cfg, &["t", "I", "logK", "R", "log|R|"], &rows)?;
    report.say(serde_json::to_string(&cfg["fit"])?);
    if a.band {
        report.say(serde_json::to_string(&cfg["band"])?);
    }
    Ok(code)
}

pub fn semilrd(a: &SemiLrdArgs) -> Result<u8> {
    let spec = load_spec(&a.spec.spec)?;
    let table = semi_lrd_sum(&spec, &a.lambdas, a.n, a.theta1, a.theta2, a.t1, a.tol)?;
    let cfg = config("semilrd", a, Some(&spec));
    let mut rows = Vec::new();
    for row in &table {
        for (k, s) in row.partial_sums.iter().enumerate() {
            rows.push(vec![num(row.lambda), (k + 1).to_string(), num(*s)]);
        }
    }
    let report = Report::new(a.out.out.as_deref());
    report.csv(&cfg, &["lambda", "N", "partial_sum"], &rows)?;
    for row in &table {
        report.say(format!(
            "lambda {:?}: sum to N={} is {:?}",
            row.lambda,
            a.n,
            row.partial_sums.last().copied().unwrap_or(0.0)
        ));
    }
    Ok(0)
}

pub fn scaling(a: &ScalingArgs) -> Result<u8> {
    let spec = load_spec(&a.spec.spec)?;
    let q = CFQuery::new(a.times.clone(), a.thetas.clone())?;
    let diff = scaling_check(&spec, a.c, &q, a.tol)?;
    let cfg = config("scaling", a, Some(&spec));
    println!("{}", serde_json::to_string(&json!({ "config": cfg, "difference": diff }))?);
    Ok(0)
}

pub fn moments(a: &MomentsArgs) -> Result<u8> {
    let spec = load_spec(&a.spec.spec)?;
    let mut verdicts = Vec::new();
    let mut rows = Vec::new();

    if spec.kind().is_multifractional() {
        verdicts.push(json!({
            "assertion": "small-lag moment limit",
            "skipped": "limit is stated for a constant Hurst index",
        }));
    } else {
        let lim = flimit(&spec, a.gamma, a.t, a.tol)?;
        let chk = moment_limit_check(&spec, a.gamma, a.t, a.r, a.paths, 1000, a.seed, a.tol)?;
        rows.push(vec![
            "limit".into(),
            num(a.r),
            num(chk.estimate),
            num(chk.standard_error),
            num(lim.value),
        ]);
        verdicts.push(json!({
            "assertion": "small-lag moment limit",
            "limit": lim.value,
            "estimate": chk.estimate,
            "standard_error": chk.standard_error,
            "relative_gap": chk.relative_gap,
            "gate": a.gate,
            "cells_in_lag": chk.cells_in_lag,
            "pass": chk.relative_gap <= a.gate,
        }));
    }

    let d_max = a.sweep.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let grid = GridSpec::for_spec(&spec, &[a.t, a.t + d_max], 1e-2, 4, 1e-4, a.seed)?.with_grading(0.05, 1.0)?;
    let sw = moment_sweep(&spec, &grid, a.t, &a.sweep, a.gamma, a.paths)?;
    for ((d, m), c) in sw.lags.iter().zip(&sw.moments).zip(&sw.constants) {
        rows.push(vec!["sweep".into(), num(*d), num(*m), String::new(), num(*c)]);
    }
    verdicts.push(json!({
        "assertion": "moment bound constant finite for lags >= 1",
        "constants": sw.constants,
        "spread": sw.spread,
        "pass": sw.spread.is_finite() && sw.constants.iter().all(|c| c.is_finite() && *c > 0.0),
    }));

    let cfg = config("moments", a, Some(&spec));
    let report = Report::new(a.out.out.as_deref());
    csv_with_verdicts(&report, &cfg, &verdicts, &["kind", "lag", "moment", "standard_error", "reference"], &rows)?;
    Ok(verdict_exit(a.strict, &verdicts))
}

pub fn tail(a: &TailArgs) -> Result<u8> {
    let spec = load_spec(&a.spec.spec)?;
    let ys = a
        .ys
        .clone()
        .unwrap_or_else(|| tmsm::quasinorm::geometric_grid(0.5, 50.0, 12));
    let mut times = vec![a.t];
    times.extend(a.lags.iter().map(|d| a.t - d));
    let grid = GridSpec::for_spec(&spec, &times, a.dt, 4, 1e-4, a.seed)?.with_grading(0.05, 1.0)?;
    let ens = simulate_paths(&spec, &grid, &times, a.paths)?;
    let base = ens.column(0);
    let mut rows = Vec::new();
    let mut constants = Vec::new();
    for (j, &d) in a.lags.iter().enumerate() {
        let inc: Vec<f64> = base.iter().zip(ens.column(j + 1)).map(|(x, y)| x - y).collect();
        let r = tail_check(&inc, &ys, &spec, a.t, a.t - d)?;
        for ((y, p), s) in r.ys.iter().zip(&r.exceedance).zip(&r.shape) {
            rows.push(vec![num(d), num(*y), num(*p), num(*s)]);
        }
        constants.push(r.constant);
    }
    let spread = constant_spread(&constants);
    let verdicts = vec![json!({
        "assertion": "tail bound constant uniform in the lag",
        "constants": constants,
        "spread": spread,
        "max_spread": a.max_spread,
        "pass": spread.is_finite() && spread <= a.max_spread,
    })];
    let cfg = config("tail", a, Some(&spec));
    let report = Report::new(a.out.out.as_deref());
    csv_with_verdicts(&report, &cfg, &verdicts, &["lag", "y", "exceedance", "shape"], &rows)?;
    Ok(verdict_exit(a.strict, &verdicts))
}

pub fn localize(a: &LocalizeArgs) -> Result<u8> {
    let spec = load_spec(&a.spec.spec)?;
    let r = localisability_check(&spec, a.u, &a.v, &a.theta, &a.r, a.tol)?;
    let last = r.distances.last().copied().unwrap_or(f64::NAN);
    let verdicts = vec![json!({
        "assertion": "rescaled increments approach the tangent process",
        "tangent": r.tangent,
        "hypothesis_holds": r.hypothesis_holds,
        "strictly_decreasing": r.strictly_decreasing,
        "smallest_scale_distance": last,
        "gate": a.gate,
        "pass": r.strictly_decreasing && last <= a.gate,
    })];
    let rows: Vec<Vec<String>> = r.rs.iter().zip(&r.distances).map(|(s, d)| vec![num(*s), num(*d)]).collect();
    let cfg = config("localize", a, Some(&spec));
    let report = Report::new(a.out.out.as_deref());
    csv_with_verdicts(&report, &cfg, &verdicts, &["r", "distance"], &rows)?;
    Ok(verdict_exit(a.strict, &verdicts))
}

pub fn holder(a: &HolderArgs) -> Result<u8> {
    let spec = load_spec(&a.spec.spec)?;
    if a.paths == 0 {
        return Err(Error::Config("--paths must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut exponents = Vec::new();
    for k in 0..a.paths {
        let path = simulate_holder_path(&spec, a.t0, a.level, 4, a.seed.wrapping_add(k as u64), 1e-4)?;
        let est = holder_exponent_estimate(&path)?;
        for (scale, osc) in &est.points {
            rows.push(vec!["oscillation".into(), k.to_string(), num(*scale), num(*osc)]);
        }
        exponents.push(est.exponent);
    }
    let mut verdicts = Vec::new();
    match a.expect {
        Some(h) => verdicts.push(json!({
            "assertion": "Hölder exponent lower bound",
            "estimates": exponents,
            "lower_bound": h,
            "slack": a.slack,
            "pass": exponents.iter().all(|e| *e >= h - a.slack),
        })),
        None => verdicts.push(json!({
            "assertion": "Hölder exponent lower bound",
            "estimates": exponents,
            "skipped": "no --expect given",
        })),
    }
    if a.sup_growth {
        let levels: Vec<u32> = (4..=a.level).step_by(2).collect();
        let g = sup_growth(&spec, &levels, a.seed, 1e-4)?;
        for (l, s) in g.levels.iter().zip(&g.sups) {
            rows.push(vec!["sup".into(), "0".into(), l.to_string(), num(*s)]);
        }
        verdicts.push(json!({
            "assertion": "discrete supremum over refining grids",
            "levels": g.levels,
            "sups": g.sups,
            "note": "reported only",
        }));
    }
    let cfg = config("holder", a, Some(&spec));
    let report = Report::new(a.out.out.as_deref());
    csv_with_verdicts(&report, &cfg, &verdicts, &["kind", "path", "scale", "value"], &rows)?;
    Ok(verdict_exit(a.strict, &verdicts))
}

pub fn verify_all(a: &VerifyArgs) -> Result<u8> {
    let mut opts = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            if text.trim().is_empty() {
                VerifyOptions::default()
            } else {
                serde_json::from_str(&text)?
            }
        }
        None => VerifyOptions::default(),
    };
    if a.fast {
        opts.fast = true;
    }
    if let Some(s) = a.seed {
        opts.seed = s;
    }
    let which: Vec<u32> = match &a.only {
        Some(v) => v.clone(),
        None => verify::CRITERIA.collect(),
    };
    let mut reports = Vec::new();
    for n in which {
        let r = verify::run_criterion(n, &opts)
            .ok_or_else(|| Error::Config(format!("no criterion {n}; use 1 to 10")))?;
        println!("{}", r.summary_line());
        reports.push(r);
    }
    let failed: Vec<u32> = reports.iter().filter(|r| !r.pass).map(|r| r.criterion).collect();
    let doc = json!({
        "config": { "options": opts, "workers": rayon::current_num_threads(), "version": env!("CARGO_PKG_VERSION") },
        "criteria": reports,
        "failed": failed,
    });
    match a.out.out.as_deref() {
        Some(p) => write_json(&Sink::new(Some(p)), &doc).map_err(|e| io_err(Some(p), e))?,
        None => println!("{}", serde_json::to_string_pretty(&doc)?),
    }
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("failed criteria: {failed:?}");
        Ok(EXIT_ASSERTION)
    }
}
