//! Browser bindings: kernel profiles, characteristic function curves and
//! single simulated paths for a process given as JSON.

use tmsm::charfn::{cf, CFQuery};
use tmsm::simulate::{simulate_paths, GridSpec};
use tmsm::ProcessSpec;
use wasm_bindgen::prelude::*;

const CF_TOL: f64 = 1e-8;

fn spec(json: &str) -> Result<ProcessSpec, String> {
    ProcessSpec::from_json(json).map_err(|e| e.to_string())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// `G(t, x) = g_t(x) - g_0(x)` on `n` points of `[x_lo, x_hi]`, interleaved as `x0, g0, x1, g1, ...`.
pub fn kernel_profile_impl(spec_json: &str, t: f64, x_lo: f64, x_hi: f64, n: usize) -> Result<Vec<f64>, String> {
    let s = spec(spec_json)?;
    Ok(linspace(x_lo, x_hi, n)
        .into_iter()
        .flat_map(|x| [x, s.kernel(t, x)])
        .collect())
}

/// `E exp(iθX(t))` for `θ` on `n` points of `[0, theta_max]`, interleaved.
pub fn cf_curve_impl(spec_json: &str, t: f64, theta_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let s = spec(spec_json)?;
    let mut out = Vec::with_capacity(2 * n);
    for th in linspace(0.0, theta_max, n) {
        let q = CFQuery::single(t, th).map_err(|e| e.to_string())?;
        out.push(th);
        out.push(cf(&s, &q, CF_TOL).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// One path of `X` on `n` equally spaced times in `(0, t_end]`, interleaved.
pub fn sample_path_impl(spec_json: &str, t_end: f64, n: usize, seed: u64) -> Result<Vec<f64>, String> {
    let s = spec(spec_json)?;
    if !(t_end > 0.0) || n == 0 {
        return Err("need t_end > 0 and at least one point".into());
    }
    let times: Vec<f64> = (1..=n).map(|k| t_end * k as f64 / n as f64).collect();
    let step = t_end / n as f64;
    let grid = GridSpec::for_spec(&s, &times, step, 4, 1e-3, seed)
        .and_then(|g| g.with_grading(0.05, 1.0))
        .map_err(|e| e.to_string())?;
    let ens = simulate_paths(&s, &grid, &times, 1).map_err(|e| e.to_string())?;
    Ok(times.iter().zip(ens.row(0)).flat_map(|(&t, &x)| [t, x]).collect())
}

#[wasm_bindgen]
pub fn kernel_profile(spec_json: &str, t: f64, x_lo: f64, x_hi: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    kernel_profile_impl(spec_json, t, x_lo, x_hi, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn cf_curve(spec_json: &str, t: f64, theta_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    cf_curve_impl(spec_json, t, theta_max, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sample_path(spec_json: &str, t_end: f64, n: usize, seed: u64) -> Result<Vec<f64>, JsValue> {
    sample_path_impl(spec_json, t_end, n, seed).map_err(|e| JsValue::from_str(&e))
}
