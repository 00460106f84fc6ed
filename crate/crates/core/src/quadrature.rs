//! Adaptive Gauss–Kronrod integration on semi-infinite domains with declared
//! endpoint singularities.
//!
//! The domain is cut at the declared singular points. Every piece is anchored
//! at the breakpoint it touches, and abscissae are carried as
//! `(anchor, offset)` pairs so that the distance to a singular point is exact
//! even when the point itself is large (see [`Point`]). Pieces touching a
//! singular point start from a geometric mesh graded toward it; the left tail
//! is covered by panels of doubling width. A global adaptive loop then bisects
//! the panel with the largest error estimate until the requested tolerance is
//! met.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::{KernelSum, ParamFunction, ProcessSpec};

/// An abscissa `anchor + offset`.
///
/// Kernels need `t - x` for `x` close to a singular time `t`; computing it as
/// `(t - anchor) - offset` keeps full relative precision when the anchor is
/// the singular point, which a plain `f64` abscissa cannot do near large `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub anchor: f64,
    pub offset: f64,
}

impl Point {
    #[inline]
    pub fn new(anchor: f64, offset: f64) -> Self {
        Point { anchor, offset }
    }

    #[inline]
    pub fn at(x: f64) -> Self {
        Point {
            anchor: x,
            offset: 0.0,
        }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.anchor + self.offset
    }

    /// `t - x`.
    #[inline]
    pub fn lag_from(&self, t: f64) -> f64 {
        if t == self.anchor {
            -self.offset
        } else {
            (t - self.anchor) - self.offset
        }
    }
}

/// Stopping rule `error <= max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    /// `max(tol, tol * |value|)`.
    pub fn mixed(tol: f64) -> Self {
        Tolerance { abs: tol, rel: tol }
    }

    pub fn relative(rel: f64) -> Self {
        Tolerance {
            abs: f64::MIN_POSITIVE,
            rel,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Lower end of an integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lower {
    Finite(f64),
    NegInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Knobs of the adaptive engine.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub max_subdivisions: usize,
    /// Initial geometric levels toward each singular point.
    pub grading_levels: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator {
            max_subdivisions: 40_000,
            grading_levels: 24,
        }
    }
}

// Gauss–Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One quadrature node of a converged mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub point: Point,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    anchor: f64,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl Panel {
    fn width(&self) -> f64 {
        self.b - self.a
    }

    fn refinable(&self) -> bool {
        let scale = self.a.abs().max(self.b.abs());
        self.width() > 64.0 * f64::EPSILON * scale && self.width() > 1e-290
    }

    fn nodes(&self, out: &mut Vec<Node>) {
        let center = 0.5 * (self.a + self.b);
        let half = 0.5 * (self.b - self.a);
        out.push(Node {
            point: Point::new(self.anchor, center),
            weight: WGK[7] * half,
        });
        for j in 0..7 {
            let dx = half * XGK[j];
            for off in [center - dx, center + dx] {
                out.push(Node {
                    point: Point::new(self.anchor, off),
                    weight: WGK[j] * half,
                });
            }
        }
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

fn gauss_kronrod<F: Fn(Point) -> f64>(f: &F, anchor: f64, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(Point::new(anchor, center));
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(Point::new(anchor, center - dx));
        let f2 = f(Point::new(anchor, center + dx));
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let error = rescale_error((res_k - res_g) * half, res_abs * abs_half, res_asc * abs_half);
    Panel {
        anchor,
        a,
        b,
        value,
        error,
    }
}

#[derive(PartialEq)]
struct ByError(f64, usize);

impl Eq for ByError {}

impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Offsets `[lo, hi]` (relative to the anchor) subdivided geometrically toward
/// offset zero, which must be one of the ends.
fn graded(lo: f64, hi: f64, levels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(levels + 1);
    if hi <= 0.0 {
        // toward hi = 0 from the left
        let mut outer = lo;
        for _ in 0..levels {
            let inner = 0.5 * outer;
            out.push((outer, inner));
            outer = inner;
        }
        out.push((outer, 0.0));
    } else {
        let mut outer = hi;
        for _ in 0..levels {
            let inner = 0.5 * outer;
            out.push((inner, outer));
            outer = inner;
        }
        out.push((0.0, outer));
    }
    out
}

impl Integrator {
    /// `∫_lo^hi f`, with `f` possibly singular at the listed points.
    pub fn integrate<F: Fn(Point) -> f64>(
        &self,
        f: &F,
        lo: Lower,
        hi: f64,
        singular: &[f64],
        tol: Tolerance,
    ) -> Result<QuadResult> {
        self.run(f, lo, hi, singular, tol, false).map(|(r, _)| r)
    }

    /// Like [`Integrator::integrate`] but also returns the nodes and weights of
    /// the converged mesh, so that related integrands can be re-evaluated on
    /// the same rule.
    pub fn integrate_with_nodes<F: Fn(Point) -> f64>(
        &self,
        f: &F,
        lo: Lower,
        hi: f64,
        singular: &[f64],
        tol: Tolerance,
    ) -> Result<(QuadResult, Vec<Node>)> {
        self.run(f, lo, hi, singular, tol, true)
    }

    fn run<F: Fn(Point) -> f64>(
        &self,
        f: &F,
        lo: Lower,
        hi: f64,
        singular: &[f64],
        tol: Tolerance,
        want_nodes: bool,
    ) -> Result<(QuadResult, Vec<Node>)> {
        if !(tol.abs > 0.0 || tol.rel > 0.0) {
            return Err(Error::Config("quadrature tolerance must be positive".into()));
        }
        if let Lower::Finite(l) = lo {
            if l >= hi {
                let empty = QuadResult {
                    value: 0.0,
                    abs_error_estimate: 0.0,
                    evaluations: 0,
                };
                return Ok((empty, Vec::new()));
            }
        }
        let lo_val = match lo {
            Lower::Finite(l) => l,
            Lower::NegInfinity => f64::NEG_INFINITY,
        };

        let mut knots: Vec<(f64, bool)> = singular
            .iter()
            .copied()
            .filter(|&s| s >= lo_val && s <= hi)
            .map(|s| (s, true))
            .collect();
        knots.sort_by(|x, y| x.0.total_cmp(&y.0));
        knots.dedup_by(|x, y| x.0 == y.0);
        if knots.last().map_or(true, |k| k.0 < hi) {
            knots.push((hi, false));
        }

        let mut panels: Vec<Panel> = Vec::new();
        let mut evaluations = 0usize;
        let mut push = |anchor: f64, a: f64, b: f64, panels: &mut Vec<Panel>| {
            if b > a {
                panels.push(gauss_kronrod(f, anchor, a, b));
                evaluations += 15;
            }
        };

        for w in knots.windows(2) {
            let (p, ps) = w[0];
            let (q, qs) = w[1];
            let mid = 0.5 * (q - p);
            let levels_p = if ps { self.grading_levels } else { 0 };
            let levels_q = if qs { self.grading_levels } else { 0 };
            for (a, b) in graded(0.0, mid, levels_p) {
                push(p, a, b, &mut panels);
            }
            for (a, b) in graded(-(q - p - mid), 0.0, levels_q) {
                push(q, a, b, &mut panels);
            }
        }

        // left tail, anchored at the first knot
        let (p0, p0_singular) = knots[0];
        let span = p0 - lo_val;
        let w0 = span.min(1.0);
        let levels = if p0_singular { self.grading_levels } else { 0 };
        for (a, b) in graded(-w0, 0.0, levels) {
            push(p0, a, b, &mut panels);
        }
        let mut inner = w0;
        let mut quiet = 0usize;
        while inner < span {
            let outer = (2.0 * inner).min(span);
            if !outer.is_finite() || outer > 1e300 {
                return Err(Error::Divergent(
                    "integrand does not decay on the left tail".into(),
                ));
            }
            push(p0, -outer, -inner, &mut panels);
            if lo == Lower::NegInfinity {
                let last = panels.last().unwrap();
                let total: f64 = panels.iter().map(|p| p.value).sum();
                if last.value.abs() + last.error <= 0.1 * tol.target(total) {
                    quiet += 1;
                    if quiet >= 3 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            inner = outer;
        }

        let mut heap: BinaryHeap<ByError> = panels
            .iter()
            .enumerate()
            .map(|(i, p)| ByError(p.error, i))
            .collect();
        let mut value: f64 = panels.iter().map(|p| p.value).sum();
        let mut error: f64 = panels.iter().map(|p| p.error).sum();
        let mut frozen_error = 0.0;
        let mut subdivisions = 0usize;

        loop {
            if error <= tol.target(value) {
                // guard against drift in the running sums
                value = panels.iter().map(|p| p.value).sum();
                error = panels.iter().map(|p| p.error).sum();
                if error <= tol.target(value) {
                    break;
                }
            }
            let Some(ByError(_, idx)) = heap.pop() else {
                break;
            };
            let worst = panels[idx];
            if !worst.refinable() {
                frozen_error += worst.error;
                if frozen_error > tol.target(value) {
                    break;
                }
                continue;
            }
            if subdivisions >= self.max_subdivisions {
                heap.push(ByError(worst.error, idx));
                break;
            }
            subdivisions += 1;
            let mid = 0.5 * (worst.a + worst.b);
            let left = gauss_kronrod(f, worst.anchor, worst.a, mid);
            let right = gauss_kronrod(f, worst.anchor, mid, worst.b);
            evaluations += 30;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            panels[idx] = left;
            heap.push(ByError(left.error, idx));
            panels.push(right);
            heap.push(ByError(right.error, panels.len() - 1));
        }

        // fixed reduction order for reproducibility
        panels.sort_by(|x, y| {
            (x.anchor + x.a)
                .total_cmp(&(y.anchor + y.a))
                .then(x.anchor.total_cmp(&y.anchor))
        });
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let result = QuadResult {
            value,
            abs_error_estimate: error,
            evaluations,
        };
        if !(value.is_finite() && error.is_finite()) || error > tol.target(value) {
            return Err(Error::NonConvergence {
                value,
                error_estimate: error,
                evaluations,
            });
        }
        let mut nodes = Vec::new();
        if want_nodes {
            nodes.reserve(panels.len() * 15);
            for p in &panels {
                p.nodes(&mut nodes);
            }
        }
        Ok((result, nodes))
    }
}

/// Description of `∫ |f(x)|^{α(x)} dx`.
pub struct IntegrandSpec<F> {
    pub f: F,
    pub exponent: ParamFunction,
    pub singular_points: Vec<f64>,
    pub lo: Lower,
    pub hi: f64,
}

impl<F: Fn(Point) -> f64> IntegrandSpec<F> {
    pub fn new(f: F, exponent: ParamFunction, singular_points: Vec<f64>, lo: Lower, hi: f64) -> Result<Self> {
        exponent.check_stability()?;
        let lo_val = match lo {
            Lower::Finite(l) => l,
            Lower::NegInfinity => f64::NEG_INFINITY,
        };
        if singular_points.iter().any(|&s| s < lo_val || s > hi) {
            return Err(Error::Config("singular points must lie in the domain".into()));
        }
        let mut singular_points = singular_points;
        singular_points.sort_by(f64::total_cmp);
        Ok(IntegrandSpec {
            f,
            exponent,
            singular_points,
            lo,
            hi,
        })
    }
}

/// `|v|^α` with `0^α = 0`.
#[inline]
pub fn abs_pow(v: f64, alpha: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        (alpha * v.abs().ln()).exp()
    }
}

/// `∫ |f(x)|^{α(x)} dx` to within `max(tol, tol * value)`.
pub fn integrate_alpha_power<F: Fn(Point) -> f64>(s: &IntegrandSpec<F>, tol: f64) -> Result<QuadResult> {
    if !(tol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let g = |p: Point| abs_pow((s.f)(p), s.exponent.eval(p.x()));
    Integrator::default().integrate(&g, s.lo, s.hi, &s.singular_points, Tolerance::mixed(tol))
}

/// Pointwise envelope of `|Σ c_i e^{-λ(t_i-x)_+}(t_i-x)_+^{H_i-1/α(x)}|` far to
/// the left of every `t_i` and of the origin.
#[derive(Debug, Clone, Copy)]
pub struct TailEnvelope {
    lambda: f64,
    alpha: (f64, f64),
    hurst: (f64, f64),
    /// `Σ |c_i|`
    spread: f64,
    /// `Σ_H |Σ_{i: H_i = H} c_i|`: the part that does not cancel at leading order.
    net: f64,
    /// `max |t_i|`
    horizon: f64,
}

const ALPHA_GRID: usize = 32;

impl TailEnvelope {
    pub fn for_sum(sum: &KernelSum<'_>) -> Self {
        let spec = sum.spec();
        let (spread, net, horizon, hurst) = sum.tail_summary();
        TailEnvelope {
            lambda: spec.lambda(),
            alpha: spec.stability_bounds(),
            hurst,
            spread,
            net,
            horizon,
        }
    }

    /// Envelope of a unit-amplitude motion kernel `G(t, ·)`, `|t| ≤ t_max`.
    pub fn for_motion(spec: &ProcessSpec, t_max: f64) -> Self {
        TailEnvelope {
            lambda: spec.lambda(),
            alpha: spec.stability_bounds(),
            hurst: spec.hurst_bounds(),
            spread: 2.0,
            net: 0.0,
            horizon: t_max.abs(),
        }
    }

    fn start(&self) -> f64 {
        let beta_hi = (self.hurst.1 - 1.0 / self.alpha.1).max(0.0);
        let mut s0 = 2.0 * self.horizon + 1.0;
        if self.lambda > 0.0 {
            s0 = s0.max(beta_hi / self.lambda);
        }
        s0
    }

    /// Upper bound of `|f(-s)|^{α(-s)}` for `s ≥ start()`.
    fn power_bound(&self, s: f64) -> f64 {
        let (a, b) = self.alpha;
        let t = self.horizon;
        let mut best: f64 = 0.0;
        for j in 0..=ALPHA_GRID {
            let alpha = a + (b - a) * j as f64 / ALPHA_GRID as f64;
            for h in [self.hurst.0, self.hurst.1] {
                let beta = h - 1.0 / alpha;
                let spread = self.spread
                    * t
                    * (self.lambda * t).exp()
                    * 2f64.powf(beta.abs())
                    * (self.lambda + 2.0 * beta.abs() / s);
                let env = (spread + self.net) * (beta * s.ln() - self.lambda * s).exp();
                best = best.max(abs_pow(env, alpha));
            }
        }
        best
    }

    /// Upper bound of `∫_L^∞ |f(-s)|^{α(-s)} ds`, summed over doubling panels
    /// with left-endpoint values of the decreasing envelope.
    pub fn tail_mass(&self, cut: f64) -> f64 {
        let mut sum = 0.0;
        let mut s = cut.max(self.start());
        let mut prev = f64::INFINITY;
        for _ in 0..2000 {
            let term = self.power_bound(s) * s;
            sum += term;
            if term <= 1e-6 * sum {
                let ratio = term / prev;
                if ratio < 1.0 {
                    sum += term * ratio / (1.0 - ratio);
                    return sum;
                }
            }
            prev = term;
            s *= 2.0;
            if s > 1e300 {
                break;
            }
        }
        f64::INFINITY
    }

    fn divergent(&self) -> bool {
        // |x|^{(H - 1/α - 1) α} must decay faster than 1/|x| for every α
        self.lambda == 0.0 && self.hurst.1 >= 1.0
    }

    /// Smallest `L` (up to 0.1% relative) with `tail_mass(L) ≤ tol`.
    pub fn cutoff(&self, tol: f64) -> Result<f64> {
        if tol.is_infinite() {
            return Ok(0.0);
        }
        if !(tol > 0.0) {
            return Err(Error::Config("truncation tolerance must be positive".into()));
        }
        if self.divergent() {
            return Err(Error::Divergent(
                "algebraic kernel tail is not integrable; cannot truncate".into(),
            ));
        }
        if self.spread == 0.0 && self.net == 0.0 {
            return Ok(0.0);
        }
        let mut hi = self.start();
        if self.tail_mass(hi) <= tol {
            return Ok(hi);
        }
        let mut lo = hi;
        while self.tail_mass(hi) > tol {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Divergent("tail mass does not fall below tolerance".into()));
            }
        }
        while hi - lo > 1e-3 * hi {
            let mid = 0.5 * (lo + hi);
            if self.tail_mass(mid) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

/// Distance `L` such that the mass of `|G(t, ·)|^{α}` over `(-∞, -L]` is below
/// `tol` for every `|t| ≤ t_max`.
pub fn truncation_bound(spec: &ProcessSpec, t_max: f64, tol: f64) -> Result<f64> {
    TailEnvelope::for_motion(spec, t_max).cutoff(tol)
}

/// `∫ |Σ|^{α(x)} dx` for a kernel combination, truncated on the left by its
/// envelope at `tol / 10` and integrated to `max(tol, tol * value)`.
pub fn kernel_power_integral(sum: &KernelSum<'_>, tol: f64) -> Result<QuadResult> {
    kernel_power_integral_with(sum, tol, Tolerance::mixed(tol))
}

pub(crate) fn kernel_power_integral_with(
    sum: &KernelSum<'_>,
    tail_tol: f64,
    tol: Tolerance,
) -> Result<QuadResult> {
    let Some((lo, hi, singular)) = kernel_domain(sum, tail_tol)? else {
        return Ok(QuadResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
        });
    };
    let spec = sum.spec();
    let g = |p: Point| abs_pow(sum.eval(p), spec.alpha_at(p.x()));
    Integrator::default().integrate(&g, Lower::Finite(lo), hi, &singular, tol)
}

/// Nodes of a converged rule for `∫ |Σ|^{α(x)} dx` at relative accuracy
/// `tol`, with the left cut chosen relative to the integral itself.
pub(crate) fn kernel_power_rule(sum: &KernelSum<'_>, tol: f64) -> Result<Option<(QuadResult, Vec<Node>)>> {
    let rough = kernel_power_integral_with(sum, 1e-6, Tolerance::relative(1e-4))?;
    if rough.value == 0.0 {
        return Ok(None);
    }
    let Some((lo, hi, singular)) = kernel_domain(sum, tol * rough.value)? else {
        return Ok(None);
    };
    let spec = sum.spec();
    let g = |p: Point| abs_pow(sum.eval(p), spec.alpha_at(p.x()));
    Integrator::default()
        .integrate_with_nodes(&g, Lower::Finite(lo), hi, &singular, Tolerance::relative(tol))
        .map(Some)
}

/// `(lo, hi, singular points)` covering the support of a kernel combination,
/// or `None` when it vanishes identically.
pub(crate) fn kernel_domain(sum: &KernelSum<'_>, tail_tol: f64) -> Result<Option<(f64, f64, Vec<f64>)>> {
    if sum.is_zero() {
        return Ok(None);
    }
    let Some(hi) = sum.support_end() else {
        return Ok(None);
    };
    let cut = TailEnvelope::for_sum(sum).cutoff(0.1 * tail_tol)?;
    let knots = sum.knots();
    let lo = (-cut).min(knots[0] - 1.0);
    Ok(Some((lo, hi, knots)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn constant(a: f64) -> ParamFunction {
        ParamFunction::constant(a).unwrap()
    }

    type Boxed = Box<dyn Fn(Point) -> f64>;

    fn boxed(f: impl Fn(Point) -> f64 + 'static) -> Boxed {
        Box::new(f)
    }

    fn closed_forms() -> Vec<(IntegrandSpec<Boxed>, f64)> {
        vec![
            (
                IntegrandSpec::new(
                    boxed(|p: Point| if (0.0..=4.0).contains(&p.x()) { 1.0 } else { 0.0 }),
                    constant(2.0),
                    vec![0.0],
                    Lower::Finite(-1.0),
                    4.0,
                )
                .unwrap(),
                4.0,
            ),
            (
                IntegrandSpec::new(
                    boxed(|p: Point| {
                        let lag = p.lag_from(1.0);
                        if lag > 0.0 && p.x() >= 0.0 {
                            lag.powf(-0.3)
                        } else {
                            0.0
                        }
                    }),
                    constant(1.0),
                    vec![0.0, 1.0],
                    Lower::Finite(0.0),
                    1.0,
                )
                .unwrap(),
                1.0 / 0.7,
            ),
            (
                IntegrandSpec::new(boxed(|p: Point| p.x().exp()), constant(0.5), vec![], Lower::NegInfinity, 0.0)
                    .unwrap(),
                2.0,
            ),
            (
                // ∫_0^1 x^{-0.9} dx = 10, a strong endpoint singularity
                IntegrandSpec::new(
                    boxed(|p: Point| if p.x() > 0.0 { p.x().powf(-0.45) } else { 0.0 }),
                    constant(2.0),
                    vec![0.0],
                    Lower::Finite(0.0),
                    1.0,
                )
                .unwrap(),
                10.0,
            ),
            (
                // ∫_{-∞}^0 (1 + x^2)^{-1} dx = π/2, algebraic tail
                IntegrandSpec::new(
                    boxed(|p: Point| 1.0 / (1.0 + p.x() * p.x())),
                    constant(1.0),
                    vec![],
                    Lower::NegInfinity,
                    0.0,
                )
                .unwrap(),
                std::f64::consts::FRAC_PI_2,
            ),
        ]
    }

    #[test]
    fn closed_form_examples() {
        for (spec, exact) in closed_forms() {
            let r = integrate_alpha_power(&spec, 1e-10).unwrap();
            assert!(
                (r.value - exact).abs() <= 1e-8 * exact,
                "got {} expected {exact}",
                r.value
            );
            assert!(r.abs_error_estimate >= 0.0);
        }
    }

    #[test]
    fn tightening_tolerance_does_not_hurt() {
        for (spec, exact) in closed_forms() {
            let mut last = f64::INFINITY;
            for tol in [1e-4, 5e-5, 2.5e-5, 1.25e-5, 1e-6, 5e-7, 1e-8, 5e-9] {
                let err = (integrate_alpha_power(&spec, tol).unwrap().value - exact).abs();
                assert!(err <= last.max(1e-14), "tol {tol}: {err} > {last}");
                last = err;
            }
        }
    }

    #[test]
    fn far_singular_point_keeps_precision() {
        // ∫_{399}^{400} (400 - x)^{-0.9} dx = 10
        let f = |p: Point| {
            let lag = p.lag_from(400.0);
            if lag > 0.0 {
                lag.powf(-0.9)
            } else {
                0.0
            }
        };
        let r = Integrator::default()
            .integrate(&f, Lower::Finite(399.0), 400.0, &[400.0], Tolerance::mixed(1e-10))
            .unwrap();
        assert_relative_eq!(r.value, 10.0, max_relative = 1e-9);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let f = |p: Point| (1.0 / p.x().abs()).min(1e300);
        let quick = Integrator {
            max_subdivisions: 10,
            grading_levels: 0,
        };
        let err = quick
            .integrate(&f, Lower::Finite(-1.0), 1.0, &[], Tolerance::mixed(1e-12))
            .unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn truncation_examples() {
        let spec = ProcessSpec::constant(0.7, 1.0, 1.0).unwrap();
        let l = truncation_bound(&spec, 1.0, 1e-8).unwrap();
        assert!((10.0..=40.0).contains(&l), "L = {l}");
        let lfsm = ProcessSpec::constant(0.7, 2.0, 0.0).unwrap();
        let l0 = truncation_bound(&lfsm, 1.0, 1e-8).unwrap();
        assert!(l0.is_finite() && l0 > 1e3);
        assert_eq!(truncation_bound(&spec, 1.0, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn truncation_bound_controls_true_tail() {
        // tail of ∫|G(1,x)|^α over (-∞,-L] computed directly must be below tol
        for spec in [
            ProcessSpec::constant(0.7, 1.0, 1.0).unwrap(),
            ProcessSpec::constant(0.7, 2.0, 0.0).unwrap(),
            ProcessSpec::constant(0.3, 0.8, 0.2).unwrap(),
        ] {
            let tol = 1e-6;
            let l = truncation_bound(&spec, 1.0, tol).unwrap();
            let g = |p: Point| abs_pow(spec.kernel(1.0, p.x()), spec.alpha_at(p.x()));
            let tail = Integrator::default()
                .integrate(&g, Lower::NegInfinity, -l, &[], Tolerance::mixed(1e-12))
                .unwrap();
            assert!(tail.value <= tol, "tail {} > {tol}", tail.value);
        }
    }

    #[test]
    fn nodes_reproduce_the_integral() {
        let f = |p: Point| if p.x() > 0.0 { p.x().powf(-0.5) } else { 0.0 };
        let (r, nodes) = Integrator::default()
            .integrate_with_nodes(&f, Lower::Finite(0.0), 1.0, &[0.0], Tolerance::mixed(1e-12))
            .unwrap();
        let s: f64 = nodes.iter().map(|n| n.weight * f(n.point)).sum();
        assert_relative_eq!(s, r.value, max_relative = 1e-13);
        assert_relative_eq!(s, 2.0, max_relative = 1e-10);
    }

    proptest! {
        #[test]
        fn constant_factor_scales_by_power(c in 0.1f64..5.0, alpha in 0.3f64..2.0) {
            let base = |p: Point| if p.x() > 0.0 { (-p.x()).exp() * p.x().powf(-0.2) } else { 0.0 };
            let scaled = move |p: Point| c * base(p);
            let tol = 1e-9;
            let s1 = IntegrandSpec::new(base, constant(alpha), vec![0.0], Lower::Finite(0.0), 60.0).unwrap();
            let s2 = IntegrandSpec::new(scaled, constant(alpha), vec![0.0], Lower::Finite(0.0), 60.0).unwrap();
            let r1 = integrate_alpha_power(&s1, tol).unwrap().value;
            let r2 = integrate_alpha_power(&s2, tol).unwrap().value;
            let expect = c.powf(alpha) * r1;
            prop_assert!((r2 - expect).abs() <= 2.0 * tol * expect.max(1.0));
        }

        #[test]
        fn domain_is_additive(m in -10.0f64..0.9) {
            let f = |p: Point| {
                let lag = p.lag_from(1.0);
                if lag > 0.0 { (-0.5 * lag).exp() * lag.powf(-0.3) } else { 0.0 }
            };
            let i = Integrator::default();
            let tol = Tolerance::mixed(1e-10);
            let whole = i.integrate(&f, Lower::NegInfinity, 1.0, &[1.0], tol).unwrap().value;
            let left = i.integrate(&f, Lower::NegInfinity, m, &[], tol).unwrap().value;
            let right = i.integrate(&f, Lower::Finite(m), 1.0, &[1.0], tol).unwrap().value;
            prop_assert!((left + right - whole).abs() <= 2e-10 * whole.max(1.0));
        }
    }
}
