//! Finite-dimensional characteristic functions.
//!
//! For every kind the joint CF of `(X(t_1), ..., X(t_d))` is real and equals
//! `exp(-∫ |Σ θ_k G(t_k, x)|^{α(x)} dx)`. Everything is computed through the
//! exponent and exponentiated last.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{KernelSum, Kind, ProcessSpec};
use crate::quadrature::kernel_power_integral;

/// Times `t_1..t_d` with coefficients `θ_1..θ_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CFQuery {
    times: Vec<f64>,
    thetas: Vec<f64>,
}

impl CFQuery {
    pub fn new(times: Vec<f64>, thetas: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Config("CF query needs at least one time".into()));
        }
        if times.len() != thetas.len() {
            return Err(Error::Config(format!(
                "CF query has {} times but {} coefficients",
                times.len(),
                thetas.len()
            )));
        }
        if times.iter().chain(&thetas).any(|v| !v.is_finite()) {
            return Err(Error::Config("CF query entries must be finite".into()));
        }
        Ok(CFQuery { times, thetas })
    }

    pub fn single(t: f64, theta: f64) -> Result<Self> {
        Self::new(vec![t], vec![theta])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn dim(&self) -> usize {
        self.times.len()
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        self.thetas.iter().copied().zip(self.times.iter().copied()).collect()
    }

    /// Same times with every coefficient multiplied by `s`.
    pub fn scaled(&self, s: f64) -> CFQuery {
        CFQuery {
            times: self.times.clone(),
            thetas: self.thetas.iter().map(|t| t * s).collect(),
        }
    }
}

/// `∫ |Σ_k θ_k G(t_k, x)|^{α(x)} dx`.
pub fn cf_exponent(spec: &ProcessSpec, q: &CFQuery, tol: f64) -> Result<f64> {
    let sum = KernelSum::motion(spec, &q.pairs());
    sum_exponent(&sum, tol)
}

/// `E exp(i Σ θ_k X(t_k))`.
pub fn cf(spec: &ProcessSpec, q: &CFQuery, tol: f64) -> Result<f64> {
    Ok((-cf_exponent(spec, q, tol)?).exp())
}

pub(crate) fn sum_exponent(sum: &KernelSum<'_>, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    Ok(kernel_power_integral(sum, tol)?.value)
}

/// Time/tempering scaling identity: the law of `(X(c t_k))_k` for `spec`
/// equals that of `(c^{H_{c t_k}} X'(t_k))_k` where `X'` has tempering `cλ`
/// and, coordinate by coordinate, Hurst index frozen at `H_{c t_k}`.
///
/// Returns the absolute CF difference between the two sides, each obtained by
/// its own quadrature run. Stability must be constant.
pub fn scaling_check(spec: &ProcessSpec, c: f64, q: &CFQuery, tol: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("scale factor must be positive, got {c}")));
    }
    let alpha = spec.stability().as_constant().ok_or_else(|| {
        Error::Domain("scaling identity needs a constant stability index".into())
    })?;
    if spec.kind() == Kind::YaglomNoise {
        return Err(Error::Domain("scaling identity is stated for motions".into()));
    }

    let mut lhs = KernelSum::empty(spec);
    for (&theta, &t) in q.thetas.iter().zip(&q.times) {
        lhs.add_motion(theta, c * t, spec.hurst_at(c * t));
    }

    let rhs_spec = spec.with_lambda(c * spec.lambda());
    let mut rhs = KernelSum::empty(&rhs_spec);
    for (&theta, &t) in q.thetas.iter().zip(&q.times) {
        let h = spec.hurst_at(c * t);
        rhs.add_motion(theta * c.powf(h), t, h);
    }
    debug_assert_eq!(rhs_spec.stability().as_constant(), Some(alpha));

    let left = (-sum_exponent(&lhs, tol)?).exp();
    let right = (-sum_exponent(&rhs, tol)?).exp();
    Ok((left - right).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ParamFunction;
    use crate::quadrature::{Integrator, Lower, Point, Tolerance};
    use proptest::prelude::*;

    fn brownian() -> ProcessSpec {
        ProcessSpec::constant(0.5, 2.0, 0.0).unwrap()
    }

    fn ltmfsm() -> ProcessSpec {
        ProcessSpec::ltmfsm(ParamFunction::sinusoidal(0.6, 0.2, std::f64::consts::TAU, 0.0).unwrap(), 1.5, 0.3)
            .unwrap()
    }

    #[test]
    fn query_validation() {
        assert!(CFQuery::new(vec![], vec![]).is_err());
        assert!(CFQuery::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(CFQuery::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn exponent_examples() {
        let spec = ProcessSpec::ltfmsm(0.7, ParamFunction::sinusoidal(1.5, 0.3, 6.0, 0.0).unwrap(), 0.2).unwrap();
        let zero = CFQuery::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(cf_exponent(&spec, &zero, 1e-8).unwrap(), 0.0);
        assert_eq!(cf(&spec, &zero, 1e-8).unwrap(), 1.0);
        let origin = CFQuery::single(0.0, 2.0).unwrap();
        assert_eq!(cf_exponent(&spec, &origin, 1e-8).unwrap(), 0.0);

        let q = CFQuery::single(3.0, 1.0).unwrap();
        let e = cf_exponent(&brownian(), &q, 1e-10).unwrap();
        assert!((e - 3.0).abs() < 1e-9, "{e}");
        assert!((cf(&brownian(), &q, 1e-10).unwrap() - (-3f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn exponent_matches_direct_quadrature() {
        // oracle: plain-abscissa integration of the kernel formula on a wide domain
        let spec = ProcessSpec::ltfmsm(0.8, ParamFunction::sinusoidal(1.5, 0.3, 5.0, 0.4).unwrap(), 0.5).unwrap();
        let times = [0.4, 1.3];
        let thetas = [1.0, -0.7];
        let f = |p: Point| {
            let x = p.x();
            let a = spec.alpha_at(x);
            let beta = 0.8 - 1.0 / a;
            let term = |t: f64| {
                let s = t - x;
                if s > 0.0 {
                    (-0.5 * s).exp() * s.powf(beta)
                } else {
                    0.0
                }
            };
            let g: f64 = times
                .iter()
                .zip(&thetas)
                .map(|(&t, &th)| th * (term(t) - term(0.0)))
                .sum();
            g.abs().powf(a)
        };
        let oracle = Integrator::default()
            .integrate(&f, Lower::NegInfinity, 1.3, &[0.0, 0.4, 1.3], Tolerance::mixed(1e-11))
            .unwrap()
            .value;
        let q = CFQuery::new(times.to_vec(), thetas.to_vec()).unwrap();
        let got = cf_exponent(&spec, &q, 1e-10).unwrap();
        assert!((got - oracle).abs() < 1e-9 * oracle.max(1.0), "{got} vs {oracle}");
    }

    #[test]
    fn quasinorm_link_for_constant_alpha() {
        let spec = ProcessSpec::constant(0.7, 1.5, 0.3).unwrap();
        let e = cf_exponent(&spec, &CFQuery::single(1.0, 1.0).unwrap(), 1e-11).unwrap();
        let norm = e.powf(1.0 / 1.5);
        let v = cf(&spec, &CFQuery::single(1.0, 1.0 / norm).unwrap(), 1e-11).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn stationary_increments_for_constant_kinds() {
        for spec in [
            ProcessSpec::constant(0.7, 1.5, 0.3).unwrap(),
            ProcessSpec::constant(0.3, 0.9, 0.0).unwrap(),
        ] {
            let tau = 2.5;
            let at_origin = CFQuery::new(vec![0.5, 1.2], vec![0.8, -0.4]).unwrap();
            let base = cf(&spec, &at_origin, 1e-10).unwrap();
            // θ1 (X(τ+0.5) - X(τ)) + θ2 (X(τ+1.2) - X(τ))
            let shifted = CFQuery::new(vec![tau + 0.5, tau + 1.2, tau], vec![0.8, -0.4, -0.4]).unwrap();
            let moved = cf(&spec, &shifted, 1e-10).unwrap();
            assert!((base - moved).abs() < 1e-8, "{base} vs {moved}");
        }
    }

    #[test]
    fn scaling_examples() {
        let spec = ProcessSpec::constant(0.7, 1.5, 0.3).unwrap();
        let q = CFQuery::single(1.0, 1.0).unwrap();
        assert!(scaling_check(&spec, 1.0, &q, 1e-8).unwrap() < 1e-12);
        assert!(scaling_check(&spec, 2.0, &q, 1e-8).unwrap() <= 1e-7);

        // untempered: reduces to self-similarity cf(ct, θ) = cf(t, c^H θ)
        let lfsm = ProcessSpec::constant(0.6, 1.2, 0.0).unwrap();
        let c: f64 = 5.0;
        let q2 = CFQuery::new(vec![0.3, 1.0], vec![1.0, -0.5]).unwrap();
        let lhs = cf(&lfsm, &CFQuery::new(vec![1.5, 5.0], vec![1.0, -0.5]).unwrap(), 1e-10).unwrap();
        let rhs = cf(&lfsm, &q2.scaled(c.powf(0.6)), 1e-10).unwrap();
        assert!((lhs - rhs).abs() < 1e-8);
        assert!(scaling_check(&lfsm, c, &q2, 1e-8).unwrap() < 1e-7);
    }

    #[test]
    fn scaling_needs_constant_alpha() {
        let spec = ProcessSpec::ltfmsm(0.7, ParamFunction::sinusoidal(1.5, 0.3, 6.0, 0.0).unwrap(), 0.2).unwrap();
        let q = CFQuery::single(1.0, 1.0).unwrap();
        assert!(matches!(scaling_check(&spec, 2.0, &q, 1e-8), Err(Error::Domain(_))));
        assert!(scaling_check(&ltmfsm(), -1.0, &q, 1e-8).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn cf_is_bounded_and_even(t in 0.05f64..2.0, s in 0.1f64..2.0, th1 in -3.0f64..3.0, th2 in -3.0f64..3.0) {
            let spec = ProcessSpec::ltfmsm(0.7, ParamFunction::sinusoidal(1.5, 0.3, 6.0, 0.0).unwrap(), 0.1).unwrap();
            let q = CFQuery::new(vec![t, t + s], vec![th1, th2]).unwrap();
            let v = cf(&spec, &q, 1e-8).unwrap();
            let w = cf(&spec, &q.scaled(-1.0), 1e-8).unwrap();
            prop_assert!(v > 0.0 && v <= 1.0);
            prop_assert!((v - w).abs() < 1e-12);
        }

        #[test]
        fn scaling_identity_holds(c in 0.3f64..4.0, t in 0.05f64..2.0, th in -2.0f64..2.0) {
            let q = CFQuery::new(vec![t, 0.5 * t], vec![th, 0.5]).unwrap();
            let tol = 1e-8;
            prop_assert!(scaling_check(&ltmfsm(), c, &q, tol).unwrap() <= 10.0 * tol);
        }
    }
}
