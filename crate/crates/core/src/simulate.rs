//! Monte Carlo paths from a grid discretisation of the stochastic integral.
//!
//! The line `[left_cut, right_end]` is cut into cells. Each cell carries an
//! independent symmetric stable increment `ΔM_j ~ SαS(α(x_j), Δ_j^{1/α(x_j)})`
//! with `α` frozen at the midpoint `x_j`, and
//! `X(t) ≈ Σ_j G(t, x_j) ΔM_j`. One realisation of `{ΔM_j}` is shared by all
//! requested times of a path, so the joint law is approximated, not only the
//! marginals.
//!
//! Cells within `refine_radius` of an evaluation time or of the origin are
//! `refine_factor` times finer than the base step. Far from those points the
//! step may optionally grow linearly with the distance, which keeps long
//! truncated tails cheap.

use rand::distributions::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::ProcessSpec;
use crate::quadrature::{truncation_bound, TailEnvelope};

/// Linear growth of the cell width away from the refined zones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    /// Width increase per unit distance beyond `refine_radius`.
    pub rate: f64,
    pub max_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub left_cut: f64,
    pub right_end: f64,
    pub base_step: f64,
    pub refine_factor: u32,
    #[serde(default = "default_radius")]
    pub refine_radius: f64,
    #[serde(default)]
    pub grading: Option<Grading>,
    pub seed: u64,
}

fn default_radius() -> f64 {
    1.0
}

/// Largest number of cells a grid may produce.
pub const MAX_CELLS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub mid: f64,
    pub width: f64,
}

impl GridSpec {
    pub fn new(left_cut: f64, right_end: f64, base_step: f64, refine_factor: u32, seed: u64) -> Result<Self> {
        let g = GridSpec {
            left_cut,
            right_end,
            base_step,
            refine_factor,
            refine_radius: 1.0,
            grading: None,
            seed,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid whose left cut leaves at most `tail_tol` of `∫|G(t,·)|^α` outside,
    /// for every `|t| ≤ max |times|`.
    pub fn for_spec(
        spec: &ProcessSpec,
        times: &[f64],
        base_step: f64,
        refine_factor: u32,
        tail_tol: f64,
        seed: u64,
    ) -> Result<Self> {
        let t_max = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let right_end = times.iter().fold(0.0f64, |m, &t| m.max(t));
        let cut = truncation_bound(spec, t_max, tail_tol)?;
        let left_cut = -(cut.max(t_max) + 1.0);
        GridSpec::new(left_cut, right_end, base_step, refine_factor, seed)
    }

    pub fn with_grading(mut self, rate: f64, max_step: f64) -> Result<Self> {
        self.grading = Some(Grading { rate, max_step });
        self.validate()?;
        Ok(self)
    }

    pub fn with_refine_radius(mut self, radius: f64) -> Result<Self> {
        self.refine_radius = radius;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.left_cut.is_finite() && self.right_end.is_finite() && self.left_cut < self.right_end) {
            return Err(Error::Config("grid needs finite left_cut < right_end".into()));
        }
        if !(self.base_step > 0.0 && self.base_step.is_finite()) {
            return Err(Error::Config("grid step must be positive".into()));
        }
        if self.refine_factor < 1 {
            return Err(Error::Config("refine_factor must be at least 1".into()));
        }
        if !(self.refine_radius >= 0.0 && self.refine_radius.is_finite()) {
            return Err(Error::Config("refine_radius must be nonnegative".into()));
        }
        if let Some(g) = self.grading {
            if !(g.rate >= 0.0 && g.rate.is_finite() && g.max_step >= self.base_step && g.max_step.is_finite()) {
                return Err(Error::Config(
                    "grading needs rate >= 0 and max_step >= base_step".into(),
                ));
            }
        }
        Ok(())
    }

    fn step_at(&self, d: f64) -> f64 {
        if d <= self.refine_radius {
            return self.base_step / self.refine_factor as f64;
        }
        let coarse = match self.grading {
            Some(g) => (self.base_step + g.rate * (d - self.refine_radius)).min(g.max_step),
            None => self.base_step,
        };
        // never step over the edge of a refined zone
        coarse.min(d - self.refine_radius).max(self.base_step / self.refine_factor as f64)
    }

    /// Cells covering `[left_cut, min(right_end, max time)]`. Cell edges fall on
    /// every evaluation time and on the origin.
    pub fn cells(&self, times: &[f64]) -> Result<Vec<Cell>> {
        self.validate()?;
        if let Some(&t) = times.iter().find(|&&t| !(t > self.left_cut && t <= self.right_end)) {
            return Err(Error::Config(format!(
                "time {t} outside the grid ({}, {}]",
                self.left_cut, self.right_end
            )));
        }
        let mut points: Vec<f64> = times.iter().copied().chain(std::iter::once(0.0)).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let end = times.iter().fold(f64::NEG_INFINITY, |m, &t| m.max(t));
        if !(end > self.left_cut) {
            return Ok(Vec::new());
        }
        let mut edges = vec![self.left_cut];
        edges.extend(points.iter().copied().filter(|&p| p > self.left_cut && p < end));
        edges.push(end);

        let mut cells = Vec::new();
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut x = a;
            while x < b {
                let d = points.iter().fold(f64::INFINITY, |m, &p| m.min((p - x).abs()));
                let mut h = self.step_at(d);
                if x + 1.25 * h >= b {
                    h = b - x;
                }
                let hi = if h == b - x { b } else { x + h };
                cells.push(Cell {
                    mid: 0.5 * (x + hi),
                    width: hi - x,
                });
                if cells.len() > MAX_CELLS {
                    return Err(Error::Config(format!(
                        "grid has more than {MAX_CELLS} cells; increase the step"
                    )));
                }
                x = hi;
            }
        }
        Ok(cells)
    }
}

/// Symmetric α-stable variate with characteristic function
/// `exp(-scale^α |θ|^α)` from a uniform angle `v ∈ (-π/2, π/2)` and a unit
/// exponential `w` (Chambers–Mallows–Stuck).
pub fn sample_sas(alpha: f64, scale: f64, v: f64, w: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("stability index {alpha} outside (0, 2]")));
    }
    if !(scale >= 0.0) {
        return Err(Error::Domain(format!("scale {scale} must be nonnegative")));
    }
    Ok(scale * sas_unit(alpha, v, w))
}

#[inline]
fn sas_unit(alpha: f64, v: f64, w: f64) -> f64 {
    if alpha == 1.0 {
        v.tan()
    } else if alpha == 2.0 {
        2.0 * v.sin() * w.sqrt()
    } else {
        let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
        a * ((((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha))
    }
}

/// Random stream of path `index`: a ChaCha8 keyed by the seed, stream number
/// equal to the path index. Independent of how paths are spread over workers.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One SαS draw from `rng`.
pub fn draw_sas<R: rand::Rng>(rng: &mut R, alpha: f64, scale: f64) -> f64 {
    let u: f64 = Open01.sample(rng);
    let w: f64 = Exp1.sample(rng);
    scale * sas_unit(alpha, (u - 0.5) * PI, w)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub times: Vec<f64>,
    /// Row-major `n_paths × times.len()`.
    pub values: Vec<f64>,
    pub spec: ProcessSpec,
    pub grid: GridSpec,
    pub n_paths: usize,
    pub n_cells: usize,
    /// Envelope bound of the kernel mass cut off left of the grid.
    pub tail_mass: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl PathEnsemble {
    pub fn get(&self, path: usize, time: usize) -> f64 {
        self.values[path * self.times.len() + time]
    }

    pub fn row(&self, path: usize) -> &[f64] {
        let n = self.times.len();
        &self.values[path * n..(path + 1) * n]
    }

    pub fn column(&self, time: usize) -> Vec<f64> {
        (0..self.n_paths).map(|i| self.get(i, time)).collect()
    }
}

/// Largest kernel block held in memory at once, in entries.
const BLOCK_ENTRIES: usize = 1 << 22;

/// `n_paths` realisations of `X(t)` at `times` for one shared random measure
/// per path.
pub fn simulate_paths(spec: &ProcessSpec, grid: &GridSpec, times: &[f64], n_paths: usize) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return Err(Error::Config("n_paths must be at least 1".into()));
    }
    let cells = if times.is_empty() {
        grid.validate()?;
        Vec::new()
    } else {
        grid.cells(times)?
    };
    let t_max = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let tail_mass = if spec.lambda() == 0.0 && spec.hurst_bounds().1 >= 1.0 {
        f64::INFINITY
    } else {
        TailEnvelope::for_motion(spec, t_max).tail_mass(-grid.left_cut)
    };
    let mut warnings = Vec::new();
    if tail_mass > 1e-2 {
        warnings.push(format!(
            "left cut {} leaves kernel mass up to {tail_mass:.3e} outside the grid",
            grid.left_cut
        ));
    }
    let fine = grid.base_step / grid.refine_factor as f64;
    if fine > 1e-2 {
        warnings.push(format!("refined step {fine:.3e} is coarse near the kernel singularities"));
    }

    let alphas: Vec<f64> = cells.iter().map(|c| spec.alpha_at(c.mid)).collect();
    let scales: Vec<f64> = cells
        .iter()
        .zip(&alphas)
        .map(|(c, a)| c.width.powf(1.0 / a))
        .collect();

    let n_t = times.len();
    let mut values = vec![0.0; n_paths * n_t];
    let block = (BLOCK_ENTRIES / cells.len().max(1)).max(1);
    let paths: Vec<usize> = (0..n_paths).collect();
    let mut start = 0;
    while start < n_t {
        let stop = (start + block).min(n_t);
        let rows: Vec<Vec<f64>> = times[start..stop]
            .iter()
            .map(|&t| {
                // weight the kernel by the cell scale once, outside the path loop
                cells
                    .iter()
                    .zip(&scales)
                    .map(|(c, s)| spec.kernel(t, c.mid) * s)
                    .collect()
            })
            .collect();
        let out = crate::par_map(&paths, |&p| {
            let mut rng = path_rng(grid.seed, p as u64);
            let mut z = Vec::with_capacity(cells.len());
            for &a in &alphas {
                let u: f64 = Open01.sample(&mut rng);
                let w: f64 = Exp1.sample(&mut rng);
                z.push(sas_unit(a, (u - 0.5) * PI, w));
            }
            rows.iter()
                .map(|r| r.iter().zip(&z).map(|(k, m)| k * m).sum::<f64>())
                .collect::<Vec<f64>>()
        });
        for (p, row) in out.into_iter().enumerate() {
            values[p * n_t + start..p * n_t + stop].copy_from_slice(&row);
        }
        start = stop;
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Experiment("simulation produced non-finite values".into()));
    }
    Ok(PathEnsemble {
        times: times.to_vec(),
        values,
        spec: spec.clone(),
        grid: grid.clone(),
        n_paths,
        n_cells: cells.len(),
        tail_mass,
        warnings,
    })
}

/// Unit-lag noise `Y(t) = X(t+1) - X(t)` at the given lags, differenced
/// pathwise from one motion ensemble.
pub fn simulate_noise(spec: &ProcessSpec, grid: &GridSpec, lags: &[f64], n_paths: usize) -> Result<PathEnsemble> {
    let mut times: Vec<f64> = lags.iter().flat_map(|&t| [t, t + 1.0]).filter(|&t| t != 0.0).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let motion = simulate_paths(spec, grid, &times, n_paths)?;
    let idx = |t: f64| -> Option<usize> {
        if t == 0.0 {
            None
        } else {
            times.binary_search_by(|s| s.total_cmp(&t)).ok()
        }
    };
    let at = |p: usize, t: f64| idx(t).map_or(0.0, |j| motion.get(p, j));
    let mut values = Vec::with_capacity(n_paths * lags.len());
    for p in 0..n_paths {
        for &t in lags {
            values.push(at(p, t + 1.0) - at(p, t));
        }
    }
    Ok(PathEnsemble {
        times: lags.to_vec(),
        values,
        ..motion
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ParamFunction;
    use crate::stats;
    use approx::assert_relative_eq;

    fn draws(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = path_rng(seed, 0);
        (0..n).map(|_| draw_sas(&mut rng, alpha, 1.0)).collect()
    }

    #[test]
    fn zero_scale_and_bad_alpha() {
        assert_eq!(sample_sas(1.3, 0.0, 0.4, 1.0).unwrap(), 0.0);
        assert!(sample_sas(0.0, 1.0, 0.1, 1.0).is_err());
        assert!(sample_sas(2.1, 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn special_cases() {
        assert_relative_eq!(sample_sas(1.0, 1.0, 0.3, 2.0).unwrap(), 0.3f64.tan());
        let v = sample_sas(2.0, 1.0, 0.3, 2.0).unwrap();
        assert_relative_eq!(v, 2.0 * 0.3f64.sin() * 2f64.sqrt(), epsilon = 1e-15);
        // the general formula is continuous at both special values
        let near = sample_sas(2.0 - 1e-9, 1.0, 0.3, 2.0).unwrap();
        assert_relative_eq!(near, v, epsilon = 1e-6);
    }

    #[test]
    fn gaussian_variance() {
        let x = draws(2.0, 1_000_000, 1);
        assert_relative_eq!(stats::variance(&x), 2.0, max_relative = 0.01);
    }

    #[test]
    fn cauchy_quartiles() {
        let mut x = draws(1.0, 200_000, 2);
        x.sort_by(f64::total_cmp);
        let med = stats::quantile_sorted(&x, 0.5);
        let iqr = stats::quantile_sorted(&x, 0.75) - stats::quantile_sorted(&x, 0.25);
        assert!(med.abs() < 0.02, "median {med}");
        assert_relative_eq!(iqr, 2.0, max_relative = 0.02);
    }

    #[test]
    fn empirical_cf_of_draws() {
        for alpha in [0.6, 1.3, 1.8] {
            let x = draws(alpha, 200_000, 3);
            for theta in [0.5, 1.0, 2.0] {
                let e = x.iter().map(|v| (theta * v).cos()).sum::<f64>() / x.len() as f64;
                let exact = (-(theta as f64).powf(alpha)).exp();
                assert!((e - exact).abs() < 0.01, "alpha {alpha} theta {theta}: {e} vs {exact}");
            }
        }
    }

    #[test]
    fn cells_hit_breakpoints_and_tile() {
        let g = GridSpec::new(-5.0, 2.0, 0.1, 4, 0).unwrap();
        let cells = g.cells(&[0.5, 1.0]).unwrap();
        let total: f64 = cells.iter().map(|c| c.width).sum();
        assert_relative_eq!(total, 6.0, epsilon = 1e-9);
        let mut edge = -5.0;
        for c in &cells {
            assert_relative_eq!(c.mid - 0.5 * c.width, edge, epsilon = 1e-9);
            edge = c.mid + 0.5 * c.width;
        }
        for p in [0.0, 0.5, 1.0] {
            assert!(cells.iter().any(|c| (c.mid + 0.5 * c.width - p).abs() < 1e-12));
        }
        let fine = cells.iter().filter(|c| c.mid > -1.0).count();
        assert!(fine >= 70, "{fine}");
        assert!(cells.iter().all(|c| c.width <= 0.1 * 1.26));
    }

    #[test]
    fn grading_reduces_cells() {
        let g = GridSpec::new(-200.0, 1.0, 1e-2, 2, 0).unwrap();
        let flat = g.cells(&[1.0]).unwrap().len();
        let graded = g.clone().with_grading(0.05, 2.0).unwrap().cells(&[1.0]).unwrap();
        assert!(graded.len() * 10 < flat);
        let total: f64 = graded.iter().map(|c| c.width).sum();
        assert_relative_eq!(total, 201.0, epsilon = 1e-8);
    }

    #[test]
    fn times_outside_grid_rejected() {
        let g = GridSpec::new(-5.0, 2.0, 0.1, 4, 0).unwrap();
        assert!(g.cells(&[3.0]).is_err());
        assert!(g.cells(&[-5.0]).is_err());
        assert!(GridSpec::new(1.0, 0.0, 0.1, 1, 0).is_err());
        assert!(GridSpec::new(-1.0, 1.0, 0.1, 0, 0).is_err());
    }

    #[test]
    fn origin_column_is_zero_and_runs_repeat() {
        let spec = ProcessSpec::ltfmsm(0.7, ParamFunction::sinusoidal(1.5, 0.3, 6.28, 0.0).unwrap(), 0.1).unwrap();
        let g = GridSpec::new(-20.0, 1.0, 1e-2, 4, 9).unwrap();
        let a = simulate_paths(&spec, &g, &[0.0, 0.5, 1.0], 50).unwrap();
        assert!(a.column(0).iter().all(|&v| v == 0.0));
        let b = simulate_paths(&spec, &g, &[0.0, 0.5, 1.0], 50).unwrap();
        assert_eq!(a.values, b.values);
        // path p does not depend on how many paths were requested
        let c = simulate_paths(&spec, &g, &[0.0, 0.5, 1.0], 7).unwrap();
        assert_eq!(&a.values[..21], &c.values[..]);
    }

    #[test]
    fn only_origin_time() {
        let spec = ProcessSpec::constant(0.7, 1.5, 0.1).unwrap();
        let g = GridSpec::new(-20.0, 1.0, 1e-2, 4, 9).unwrap();
        let e = simulate_paths(&spec, &g, &[0.0], 10).unwrap();
        assert!(e.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn brownian_variance() {
        // α = 2, H = 1/2, λ = 0: G(1, ·) is the indicator of (0, 1]
        let spec = ProcessSpec::constant(0.5, 2.0, 0.0).unwrap();
        let g = GridSpec::new(-2.0, 1.0, 1e-3, 1, 5).unwrap();
        let e = simulate_paths(&spec, &g, &[1.0], 10_000).unwrap();
        let x = e.column(0);
        assert_relative_eq!(stats::variance(&x), 2.0, max_relative = 0.03);
        assert!(stats::jarque_bera(&x) < stats::chi2_2_critical(0.01));
    }

    #[test]
    fn noise_columns_are_differences() {
        let spec = ProcessSpec::constant(0.7, 1.5, 0.2).unwrap();
        let g = GridSpec::new(-30.0, 4.0, 1e-2, 2, 3).unwrap();
        let m = simulate_paths(&spec, &g, &[1.0, 2.0, 3.0, 4.0], 20).unwrap();
        let n = simulate_noise(&spec, &g, &[0.0, 1.0, 3.0], 20).unwrap();
        for p in 0..20 {
            assert_eq!(n.get(p, 0), m.get(p, 0));
            assert_relative_eq!(n.get(p, 1), m.get(p, 1) - m.get(p, 0), epsilon = 0.0);
            assert_relative_eq!(n.get(p, 2), m.get(p, 3) - m.get(p, 2), epsilon = 0.0);
        }
        assert!(simulate_noise(&spec, &g, &[], 5).unwrap().values.is_empty());
    }

    #[test]
    fn stationary_noise_ks() {
        let spec = ProcessSpec::constant(0.7, 1.5, 0.3).unwrap();
        let g = GridSpec::for_spec(&spec, &[11.0], 2e-2, 2, 1e-4, 11)
            .unwrap()
            .with_grading(0.05, 1.0)
            .unwrap();
        let n = simulate_noise(&spec, &g, &[0.0, 10.0], 10_000).unwrap();
        let d = stats::ks_two_sample(&n.column(0), &n.column(1));
        assert!(d < stats::ks_critical(10_000, 10_000, 0.01), "KS {d}");
    }

    #[test]
    fn multifractional_noise_scale() {
        use crate::quasinorm::increment_quasinorm;
        let h = ParamFunction::sinusoidal(0.6, 0.2, 6.0, 0.0).unwrap();
        let spec = ProcessSpec::ltmfsm(h, 1.5, 0.3).unwrap();
        let g = GridSpec::for_spec(&spec, &[3.0], 1e-2, 4, 1e-4, 17)
            .unwrap()
            .with_grading(0.05, 1.0)
            .unwrap();
        let n = simulate_noise(&spec, &g, &[0.0, 2.0], 20_000).unwrap();
        for (j, t) in [0.0, 2.0].into_iter().enumerate() {
            let rho = increment_quasinorm(&spec, t + 1.0, t, 1e-8).unwrap();
            // for SαS(σ), E cos(θX) = exp(-(σθ)^α): read σ off at θ = 1/ρ
            let x = n.column(j);
            let e = x.iter().map(|v| (v / rho).cos()).sum::<f64>() / x.len() as f64;
            let sigma = (-e.ln()).powf(1.0 / 1.5) * rho;
            assert_relative_eq!(sigma, rho, max_relative = 0.1);
        }
    }
}
