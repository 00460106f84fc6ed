//! Parameter functions, process descriptions and pointwise kernels.
//!
//! Every process in this crate is a stochastic integral of a deterministic
//! kernel against a (multi)stable random measure. The kernel of the tempered
//! motions is
//!
//! ```text
//! G(t, x) = e^{-λ (t-x)_+} (t-x)_+^{H - 1/α(x)} - e^{-λ (-x)_+} (-x)_+^{H - 1/α(x)}
//! ```
//!
//! with the convention `0^γ = 0` for every real `γ`. For the multifractional
//! kinds the Hurst index is frozen at `H_t` for the whole kernel of `X(t)`.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Point;

/// Closed families of continuous real functions whose range is known
/// analytically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Constant {
        value: f64,
    },
    /// `clamp(slope * x + intercept, lo, hi)`
    LinearClamped {
        slope: f64,
        intercept: f64,
        lo: f64,
        hi: f64,
    },
    /// `mean + amplitude * sin(2π x / period + phase)`
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        period: f64,
        phase: f64,
    },
    /// Linear interpolation between knots, constant beyond the end knots.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl Shape {
    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Shape::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::Config("constant value must be finite".into()));
                }
            }
            Shape::LinearClamped {
                slope,
                intercept,
                lo,
                hi,
            } => {
                if !finite(&[*slope, *intercept, *lo, *hi]) {
                    return Err(Error::Config("linear_clamped parameters must be finite".into()));
                }
                if lo > hi {
                    return Err(Error::Config(format!(
                        "linear_clamped requires lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
            Shape::Sinusoidal {
                mean,
                amplitude,
                period,
                phase,
            } => {
                if !finite(&[*mean, *amplitude, *period, *phase]) {
                    return Err(Error::Config("sinusoidal parameters must be finite".into()));
                }
                if *period <= 0.0 {
                    return Err(Error::Config("sinusoidal period must be positive".into()));
                }
            }
            Shape::PiecewiseLinear { knots } => {
                if knots.is_empty() {
                    return Err(Error::Config("piecewise_linear needs at least one knot".into()));
                }
                if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                    return Err(Error::Config("piecewise_linear knots must be finite".into()));
                }
                if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::Config(
                        "piecewise_linear knots must be strictly increasing in x".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Exact range `[min, max]` of the function over the real line.
    fn range(&self) -> (f64, f64) {
        match self {
            Shape::Constant { value } => (*value, *value),
            Shape::LinearClamped {
                slope,
                intercept,
                lo,
                hi,
            } => {
                if *slope == 0.0 {
                    let v = intercept.clamp(*lo, *hi);
                    (v, v)
                } else {
                    (*lo, *hi)
                }
            }
            Shape::Sinusoidal {
                mean, amplitude, ..
            } => (mean - amplitude.abs(), mean + amplitude.abs()),
            Shape::PiecewiseLinear { knots } => knots
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| {
                    (lo.min(y), hi.max(y))
                }),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            Shape::Constant { value } => *value,
            Shape::LinearClamped {
                slope,
                intercept,
                lo,
                hi,
            } => (slope * x + intercept).clamp(*lo, *hi),
            Shape::Sinusoidal {
                mean,
                amplitude,
                period,
                phase,
            } => mean + amplitude * (TAU * x / period + phase).sin(),
            Shape::PiecewiseLinear { knots } => {
                let i = knots.partition_point(|&(kx, _)| kx <= x);
                if i == 0 {
                    knots[0].1
                } else if i == knots.len() {
                    knots[knots.len() - 1].1
                } else {
                    let (x0, y0) = knots[i - 1];
                    let (x1, y1) = knots[i];
                    let w = (x - x0) / (x1 - x0);
                    y0 + w * (y1 - y0)
                }
            }
        }
    }
}

/// A continuous real function of one variable with a certified range.
///
/// The declared range defaults to the exact analytic range of the shape and,
/// when given explicitly, must contain it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamFunctionRepr", into = "ParamFunctionRepr")]
pub struct ParamFunction {
    shape: Shape,
    range: (f64, f64),
}

#[derive(Serialize, Deserialize)]
struct ParamFunctionRepr {
    #[serde(flatten)]
    shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<(f64, f64)>,
}

impl TryFrom<ParamFunctionRepr> for ParamFunction {
    type Error = Error;

    fn try_from(repr: ParamFunctionRepr) -> Result<Self> {
        match repr.range {
            Some(range) => ParamFunction::with_range(repr.shape, range),
            None => ParamFunction::new(repr.shape),
        }
    }
}

impl From<ParamFunction> for ParamFunctionRepr {
    fn from(f: ParamFunction) -> Self {
        ParamFunctionRepr {
            shape: f.shape,
            range: Some(f.range),
        }
    }
}

impl ParamFunction {
    pub fn new(shape: Shape) -> Result<Self> {
        shape.validate()?;
        let range = shape.range();
        Ok(ParamFunction { shape, range })
    }

    pub fn with_range(shape: Shape, range: (f64, f64)) -> Result<Self> {
        shape.validate()?;
        let (lo, hi) = shape.range();
        if !(range.0 <= range.1) {
            return Err(Error::Config(format!(
                "declared range [{}, {}] is empty",
                range.0, range.1
            )));
        }
        if lo < range.0 || hi > range.1 {
            return Err(Error::Config(format!(
                "function range [{lo}, {hi}] escapes declared range [{}, {}]",
                range.0, range.1
            )));
        }
        Ok(ParamFunction { shape, range })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(Shape::Constant { value })
    }

    pub fn sinusoidal(mean: f64, amplitude: f64, period: f64, phase: f64) -> Result<Self> {
        Self::new(Shape::Sinusoidal {
            mean,
            amplitude,
            period,
            phase,
        })
    }

    pub fn linear_clamped(slope: f64, intercept: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(Shape::LinearClamped {
            slope,
            intercept,
            lo,
            hi,
        })
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(Shape::PiecewiseLinear { knots })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.shape.eval(x)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Declared bounds `(a, b)`.
    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    /// The value of a constant function, `None` otherwise.
    pub fn as_constant(&self) -> Option<f64> {
        let (lo, hi) = self.shape.range();
        (lo == hi).then_some(lo)
    }

    /// Checks the range against the admissible interval for a stability index.
    pub fn check_stability(&self) -> Result<()> {
        let (a, b) = self.range;
        if a > 0.0 && b <= 2.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "stability range [{a}, {b}] must lie in (0, 2]"
            )))
        }
    }

    /// Checks the range against the admissible interval for a Hurst index.
    pub fn check_hurst(&self) -> Result<()> {
        let (a, b) = self.range;
        if a > 0.0 && b < 1.0 {
            Ok(())
        } else {
            Err(Error::Config(format!("hurst range [{a}, {b}] must lie in (0, 1)")))
        }
    }
}

/// The process families covered by [`ProcessSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    /// Tempered fractional multistable motion: constant `H`, varying `α(x)`, `λ > 0`.
    #[serde(rename = "LTFmSM")]
    Ltfmsm,
    /// Tempered multifractional stable motion: varying `H_t`, constant `α`, `λ > 0`.
    #[serde(rename = "LTmFSM")]
    Ltmfsm,
    #[serde(rename = "LFSM")]
    Lfsm,
    #[serde(rename = "LTFSM")]
    Ltfsm,
    #[serde(rename = "LFmSM")]
    Lfmsm,
    #[serde(rename = "LmFSM")]
    Lmfsm,
    #[serde(rename = "YaglomNoise")]
    YaglomNoise,
}

impl Kind {
    pub fn is_tempered(self) -> bool {
        matches!(self, Kind::Ltfmsm | Kind::Ltmfsm | Kind::Ltfsm)
    }

    pub fn is_untempered(self) -> bool {
        matches!(self, Kind::Lfsm | Kind::Lfmsm | Kind::Lmfsm)
    }

    /// Kinds whose Hurst index may vary with time.
    pub fn is_multifractional(self) -> bool {
        matches!(self, Kind::Ltmfsm | Kind::Lmfsm)
    }

    /// Kinds whose stability index may vary with the integration variable.
    pub fn is_multistable(self) -> bool {
        matches!(self, Kind::Ltfmsm | Kind::Lfmsm | Kind::YaglomNoise)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Kind::Ltfmsm => "LTFmSM",
            Kind::Ltmfsm => "LTmFSM",
            Kind::Lfsm => "LFSM",
            Kind::Ltfsm => "LTFSM",
            Kind::Lfmsm => "LFmSM",
            Kind::Lmfsm => "LmFSM",
            Kind::YaglomNoise => "YaglomNoise",
        };
        f.write_str(name)
    }
}

/// Full description of one process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProcessSpecRepr", into = "ProcessSpecRepr")]
pub struct ProcessSpec {
    kind: Kind,
    hurst: ParamFunction,
    stability: ParamFunction,
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct ProcessSpecRepr {
    kind: Kind,
    hurst: ParamFunction,
    stability: ParamFunction,
    #[serde(default)]
    lambda: f64,
}

impl TryFrom<ProcessSpecRepr> for ProcessSpec {
    type Error = Error;

    fn try_from(r: ProcessSpecRepr) -> Result<Self> {
        ProcessSpec::new(r.kind, r.hurst, r.stability, r.lambda)
    }
}

impl From<ProcessSpec> for ProcessSpecRepr {
    fn from(s: ProcessSpec) -> Self {
        ProcessSpecRepr {
            kind: s.kind,
            hurst: s.hurst,
            stability: s.stability,
            lambda: s.lambda,
        }
    }
}

impl ProcessSpec {
    pub fn new(kind: Kind, hurst: ParamFunction, stability: ParamFunction, lambda: f64) -> Result<Self> {
        hurst.check_hurst()?;
        stability.check_stability()?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!(
                "tempering rate must be finite and nonnegative, got {lambda}"
            )));
        }
        if kind.is_tempered() && lambda == 0.0 {
            return Err(Error::Config(format!(
                "{kind} needs lambda > 0; use the untempered kind for lambda = 0"
            )));
        }
        if kind.is_untempered() && lambda != 0.0 {
            return Err(Error::Config(format!("{kind} is untempered, lambda must be 0")));
        }
        if !kind.is_multifractional() && hurst.as_constant().is_none() {
            return Err(Error::Config(format!("{kind} needs a constant hurst function")));
        }
        if !kind.is_multistable() && stability.as_constant().is_none() {
            return Err(Error::Config(format!(
                "{kind} needs a constant stability function"
            )));
        }
        Ok(ProcessSpec {
            kind,
            hurst,
            stability,
            lambda,
        })
    }

    /// LTFmSM with constant `H`.
    pub fn ltfmsm(hurst: f64, stability: ParamFunction, lambda: f64) -> Result<Self> {
        Self::new(Kind::Ltfmsm, ParamFunction::constant(hurst)?, stability, lambda)
    }

    /// LTmFSM with constant `α`.
    pub fn ltmfsm(hurst: ParamFunction, alpha: f64, lambda: f64) -> Result<Self> {
        Self::new(Kind::Ltmfsm, hurst, ParamFunction::constant(alpha)?, lambda)
    }

    /// Constant-parameter motion: LTFSM for `λ > 0`, LFSM for `λ = 0`.
    pub fn constant(hurst: f64, alpha: f64, lambda: f64) -> Result<Self> {
        let kind = if lambda > 0.0 { Kind::Ltfsm } else { Kind::Lfsm };
        Self::new(
            kind,
            ParamFunction::constant(hurst)?,
            ParamFunction::constant(alpha)?,
            lambda,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization is infallible")
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn hurst(&self) -> &ParamFunction {
        &self.hurst
    }

    pub fn stability(&self) -> &ParamFunction {
        &self.stability
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `(a, b)` bounds of the stability index.
    pub fn stability_bounds(&self) -> (f64, f64) {
        self.stability.range()
    }

    pub fn hurst_bounds(&self) -> (f64, f64) {
        self.hurst.range()
    }

    /// Hurst index of the kernel of `X(t)`.
    #[inline]
    pub fn hurst_at(&self, t: f64) -> f64 {
        self.hurst.eval(t)
    }

    #[inline]
    pub fn alpha_at(&self, x: f64) -> f64 {
        self.stability.eval(x)
    }

    /// Copy of this spec with a different tempering rate. The kind is left
    /// unchanged, so callers may produce combinations that `new` would refuse
    /// (used for the scaling identity, where `cλ` replaces `λ`).
    pub fn with_lambda(&self, lambda: f64) -> ProcessSpec {
        ProcessSpec {
            lambda,
            ..self.clone()
        }
    }

    /// Copy with the stability index frozen at `α(u)` and no tempering: the
    /// tangent LFSM at `u`.
    pub fn tangent_at(&self, u: f64) -> ProcessSpec {
        ProcessSpec {
            kind: Kind::Lfsm,
            hurst: self.hurst.clone(),
            stability: ParamFunction::constant(self.alpha_at(u)).expect("finite alpha"),
            lambda: 0.0,
        }
    }

    /// `G(t, x)`.
    pub fn kernel(&self, t: f64, x: f64) -> f64 {
        KernelSum::motion(self, &[(1.0, t)]).eval(Point::at(x))
    }

    /// `e^{-λ(t-x)_+} (t-x)_+^{H - 1/α(x)}`, the multistable Yaglom kernel.
    pub fn yaglom_kernel(&self, t: f64, x: f64) -> Result<f64> {
        if self.kind != Kind::YaglomNoise {
            return Err(Error::Domain(format!(
                "yaglom kernel requested for a {} spec",
                self.kind
            )));
        }
        if self.lambda <= 0.0 {
            return Err(Error::Domain("Yaglom noise requires lambda > 0".into()));
        }
        Ok(power_term(self, t, self.hurst_at(t), Point::at(x)))
    }

    /// Kernel of the unit-lag noise `Y(t) = X(t+1) - X(t)`.
    pub fn noise_kernel(&self, t: f64, x: f64) -> f64 {
        KernelSum::noise(self, &[(1.0, t)]).eval(Point::at(x))
    }
}

/// `e^{-λ(t-x)_+} (t-x)_+^{H - 1/α(x)}` with `0^γ = 0`.
#[inline]
pub(crate) fn power_term(spec: &ProcessSpec, t: f64, hurst: f64, p: Point) -> f64 {
    let lag = p.lag_from(t);
    if lag <= 0.0 {
        return 0.0;
    }
    let beta = hurst - 1.0 / spec.alpha_at(p.x());
    (beta * lag.ln() - spec.lambda * lag).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coef: f64,
    time: f64,
    hurst: f64,
}

/// A finite linear combination `Σ c_i e^{-λ(t_i-x)_+}(t_i-x)_+^{H_i - 1/α(x)}`.
///
/// Terms sharing `(t_i, H_i)` are merged so that the origin terms of motion
/// kernels cancel exactly instead of up to rounding.
#[derive(Debug, Clone)]
pub struct KernelSum<'a> {
    spec: &'a ProcessSpec,
    terms: Vec<Term>,
}

impl<'a> KernelSum<'a> {
    pub fn empty(spec: &'a ProcessSpec) -> Self {
        KernelSum {
            spec,
            terms: Vec::new(),
        }
    }

    /// `Σ θ_k G(t_k, ·)` for `(θ_k, t_k)` pairs.
    pub fn motion(spec: &'a ProcessSpec, pairs: &[(f64, f64)]) -> Self {
        let mut sum = Self::empty(spec);
        for &(theta, t) in pairs {
            sum.add_motion(theta, t, spec.hurst_at(t));
        }
        sum
    }

    /// `Σ θ_k [G(t_k + 1, ·) - G(t_k, ·)]`.
    pub fn noise(spec: &'a ProcessSpec, pairs: &[(f64, f64)]) -> Self {
        let mut sum = Self::empty(spec);
        for &(theta, t) in pairs {
            sum.add_motion(theta, t + 1.0, spec.hurst_at(t + 1.0));
            sum.add_motion(-theta, t, spec.hurst_at(t));
        }
        sum
    }

    /// Adds `θ G_H(t, ·)` with the Hurst index given explicitly.
    pub fn add_motion(&mut self, theta: f64, t: f64, hurst: f64) {
        self.add_term(theta, t, hurst);
        self.add_term(-theta, 0.0, hurst);
    }

    /// Adds the single power term `c e^{-λ(t-x)_+}(t-x)_+^{H - 1/α(x)}`.
    pub fn add_term(&mut self, coef: f64, time: f64, hurst: f64) {
        let key = |t: &Term| (t.hurst, t.time);
        match self.terms.binary_search_by(|t| {
            key(t)
                .0
                .total_cmp(&hurst)
                .then(key(t).1.total_cmp(&time))
        }) {
            Ok(i) => {
                self.terms[i].coef += coef;
                if self.terms[i].coef == 0.0 {
                    // a zero term must not become the reference of its group
                    self.terms.remove(i);
                }
            }
            Err(i) if coef != 0.0 => self.terms.insert(i, Term { coef, time, hurst }),
            Err(_) => {}
        }
    }

    pub fn spec(&self) -> &ProcessSpec {
        self.spec
    }

    /// `true` when every coefficient vanishes, so the function is identically zero.
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0)
    }

    /// Times at which some term has a singular or non-smooth point.
    pub fn knots(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self
            .terms
            .iter()
            .filter(|t| t.coef != 0.0)
            .map(|t| t.time)
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// Largest time carrying a nonzero coefficient; the sum vanishes beyond it.
    pub fn support_end(&self) -> Option<f64> {
        self.knots().last().copied()
    }

    /// `Σ |c_i|`.
    pub fn amplitude(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.abs()).sum()
    }

    /// `(Σ|c_i|, Σ_H |Σ_{H_i = H} c_i|, max |t_i|, (min H_i, max H_i))` over
    /// nonzero terms, the data the left-tail envelope needs.
    pub(crate) fn tail_summary(&self) -> (f64, f64, f64, (f64, f64)) {
        let live: Vec<&Term> = self.terms.iter().filter(|t| t.coef != 0.0).collect();
        let spread = live.iter().map(|t| t.coef.abs()).sum();
        let horizon = live.iter().map(|t| t.time.abs()).fold(0.0, f64::max);
        let mut hs: Vec<f64> = live.iter().map(|t| t.hurst).collect();
        hs.sort_by(f64::total_cmp);
        hs.dedup();
        let net = hs
            .iter()
            .map(|&h| {
                live.iter()
                    .filter(|t| t.hurst == h)
                    .map(|t| t.coef)
                    .sum::<f64>()
                    .abs()
            })
            .sum();
        let range = match (hs.first(), hs.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => self.spec.hurst_bounds(),
        };
        (spread, net, horizon, range)
    }

    /// Value at `p`. Terms are grouped by Hurst index; left of every time in
    /// a group the group is evaluated relative to its shortest lag, so that the
    /// leading-order cancellation between terms is exact far from the times.
    #[inline]
    pub fn eval(&self, p: Point) -> f64 {
        let lambda = self.spec.lambda;
        let mut alpha = None;
        let mut acc = 0.0;
        for group in self.terms.chunk_by(|a, b| a.hurst == b.hurst) {
            let first = group[0];
            let last = group[group.len() - 1];
            if p.lag_from(last.time) <= 0.0 {
                continue;
            }
            let a = *alpha.get_or_insert_with(|| self.spec.alpha_at(p.x()));
            let beta = first.hurst - 1.0 / a;
            // the earliest time has the shortest lag
            let lag_ref = p.lag_from(first.time);
            if lag_ref > 0.0 {
                let mut rel = 0.0;
                let mut net = 0.0;
                for term in group {
                    net += term.coef;
                    let dt = term.time - first.time;
                    if term.coef != 0.0 && dt != 0.0 {
                        rel += term.coef * (beta * (dt / lag_ref).ln_1p() - lambda * dt).exp_m1();
                    }
                }
                acc += (beta * lag_ref.ln() - lambda * lag_ref).exp() * (net + rel);
            } else {
                for term in group {
                    let lag = p.lag_from(term.time);
                    if term.coef == 0.0 || lag <= 0.0 {
                        continue;
                    }
                    acc += term.coef * (beta * lag.ln() - lambda * lag).exp();
                }
            }
        }
        acc
    }
}
