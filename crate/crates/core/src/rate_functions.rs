//! Path functionals on piecewise-linear paths and the hitting-time rate.
//!
//! For a path `f` with `f(0) = 0`:
//!
//! ```text
//! I_T(f) = 1/(2σ²) ∫₀ᵀ f′(u)² du          (moderate-deviation functional)
//! J_T(f) = ∫₀ᵀ Λ*(f′(u)) du                 (large-deviation functional)
//! ```
//!
//! Both integrals are exact sums over the linear pieces.

use crate::distributions::DistributionSpec;
use crate::error::{invalid, Error, Result};

/// A continuous piecewise-linear path on `[0, T]` starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePath {
    knots: Vec<(f64, f64)>,
}

impl PiecewisePath {
    /// Knots `(time, value)`: first must be `(0, 0)`, times strictly increasing.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidPath("need at least two knots".into()));
        }
        if knots[0] != (0.0, 0.0) {
            return Err(Error::InvalidPath(format!(
                "first knot must be (0, 0), got ({}, {})",
                knots[0].0, knots[0].1
            )));
        }
        for (i, &(t, v)) in knots.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::InvalidPath(format!("knot {i} is not finite")));
            }
        }
        if let Some(i) = knots.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidPath(format!(
                "knot times must be strictly increasing (knot {} at t={} follows t={})",
                i + 1,
                knots[i + 1].0,
                knots[i].0
            )));
        }
        Ok(Self { knots })
    }

    /// `f(t) = slope·t` on `[0, T]`.
    pub fn linear(slope: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![(0.0, 0.0), (horizon, slope * horizon)])
    }

    /// Path through `(k·T/m, values[k−1])`, `k = 1..=m`, on an equal-width grid.
    pub fn from_equal_segments(horizon: f64, values: &[f64]) -> Result<Self> {
        let m = values.len();
        let mut knots = Vec::with_capacity(m + 1);
        knots.push((0.0, 0.0));
        for (k, &v) in values.iter().enumerate() {
            let t = if k + 1 == m {
                horizon
            } else {
                horizon * (k + 1) as f64 / m as f64
            };
            knots.push((t, v));
        }
        Self::new(knots)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn horizon(&self) -> f64 {
        self.knots[self.knots.len() - 1].0
    }

    pub fn endpoint(&self) -> f64 {
        self.knots[self.knots.len() - 1].1
    }

    /// `(slope, width)` of each linear piece.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots.windows(2).map(|w| {
            let dt = w[1].0 - w[0].0;
            ((w[1].1 - w[0].1) / dt, dt)
        })
    }

    pub fn value_at(&self, t: f64) -> Option<f64> {
        if !(0.0..=self.horizon()).contains(&t) {
            return None;
        }
        let i = self.knots.partition_point(|&(s, _)| s <= t);
        if i == self.knots.len() {
            return Some(self.endpoint());
        }
        let (t0, v0) = self.knots[i - 1];
        let (t1, v1) = self.knots[i];
        Some(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }

    /// `self` followed by `other` shifted to start at `(T, f(T))`.
    pub fn concat(&self, other: &PiecewisePath) -> PiecewisePath {
        let (t0, v0) = self.knots[self.knots.len() - 1];
        let mut knots = self.knots.clone();
        knots.extend(other.knots[1..].iter().map(|&(t, v)| (t0 + t, v0 + v)));
        PiecewisePath { knots }
    }

    /// `I_T(f)`.
    pub fn eval_i(&self, sigma2: f64) -> Result<f64> {
        check_sigma2(sigma2)?;
        let action: f64 = self.segments().map(|(s, dt)| s * s * dt).sum();
        Ok(action / (2.0 * sigma2))
    }

    /// `J_T(f)`; `+∞` when some slope lies where `Λ*` is infinite.
    pub fn eval_j(&self, dist: &DistributionSpec) -> Result<f64> {
        let mut total = 0.0;
        for (slope, dt) in self.segments() {
            let rate = dist.legendre(slope)?;
            if rate == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            total += rate * dt;
        }
        Ok(total)
    }
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2.is_finite() && sigma2 > 0.0 {
        Ok(())
    } else {
        Err(invalid("sigma2", format!("must be finite and > 0, got {sigma2}")))
    }
}

/// `inf { I_T(f) : f(T) = a } = a²/(2σ²T)`.
pub fn endpoint_infimum(a: f64, horizon: f64, sigma2: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(invalid("T", format!("must be finite and > 0, got {horizon}")));
    }
    Ok(a * a / (2.0 * sigma2 * horizon))
}

/// Minimizes `Σ qᵢ sᵢ²` subject to `Σ cᵢ sᵢ = rhs` (all `qᵢ > 0`).
///
/// Stationarity gives `sᵢ = ν·cᵢ/(2qᵢ)`, and the constraint fixes
/// `ν = 2·rhs / Σ cᵢ²/qᵢ`.
pub fn minimize_diagonal_quadratic(weights: &[f64], coeffs: &[f64], rhs: f64) -> Vec<f64> {
    debug_assert_eq!(weights.len(), coeffs.len());
    let denom: f64 = weights.iter().zip(coeffs).map(|(q, c)| c * c / q).sum();
    let nu = 2.0 * rhs / denom;
    weights.iter().zip(coeffs).map(|(q, c)| nu * c / (2.0 * q)).collect()
}

/// The minimizer of `I_T` over `segments` equal-width linear pieces with `f(T) = a`.
pub fn endpoint_minimizer(a: f64, horizon: f64, sigma2: f64, segments: usize) -> Result<PiecewisePath> {
    check_sigma2(sigma2)?;
    if segments == 0 {
        return Err(invalid("segments", "must be at least 1"));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(invalid("T", format!("must be finite and > 0, got {horizon}")));
    }
    let width = horizon / segments as f64;
    // objective Σ slope²·width/(2σ²), constraint Σ slope·width = a
    let weights = vec![width / (2.0 * sigma2); segments];
    let coeffs = vec![width; segments];
    let slopes = minimize_diagonal_quadratic(&weights, &coeffs, a);
    let mut values = Vec::with_capacity(segments);
    let mut acc = 0.0;
    for (k, s) in slopes.iter().enumerate() {
        acc += s * width;
        values.push(if k + 1 == segments { a } else { acc });
    }
    PiecewisePath::from_equal_segments(horizon, &values)
}

/// `I_T` at the optimal piecewise-linear path with the given number of segments.
pub fn verify_endpoint_infimum(a: f64, horizon: f64, sigma2: f64, segments: usize) -> Result<f64> {
    endpoint_minimizer(a, horizon, sigma2, segments)?.eval_i(sigma2)
}

/// Decay rate `μ³t²/(2σ²r)` of `P((n/aₙ)(τᵣⁿ − τᵣ) > t)` on the `aₙ²/n` scale.
pub fn theorem_rate(mu: f64, sigma2: f64, r: f64, t: f64) -> Result<f64> {
    if !(r > 0.0 && r < mu) {
        return Err(Error::Domain { r, mu });
    }
    check_sigma2(sigma2)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and > 0, got {t}")));
    }
    Ok(mu.powi(3) * t * t / (2.0 * sigma2 * r))
}

/// Limit variance `σ²τᵣ/μ² = σ²r/μ³` of `√n(τᵣⁿ − τᵣ)`.
pub fn clt_variance(mu: f64, sigma2: f64, r: f64) -> f64 {
    sigma2 * r / mu.powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_path() {
        let p = PiecewisePath::new(vec![(0.0, 0.0), (0.3, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!(p.eval_i(1.0).unwrap(), 0.0);
    }

    #[test]
    fn straight_line_action() {
        let p = PiecewisePath::linear(0.5, 2.0).unwrap();
        assert!((p.eval_i(1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((endpoint_infimum(1.0, 2.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_segment_action() {
        let p = PiecewisePath::new(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)]).unwrap();
        assert!((p.eval_i(1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn j_functional() {
        let poisson = DistributionSpec::poisson(1.0).unwrap();
        assert!(PiecewisePath::linear(1.0, 3.0).unwrap().eval_j(&poisson).unwrap() <= 1e-12);
        let j = PiecewisePath::linear(2.0, 1.0).unwrap().eval_j(&poisson).unwrap();
        assert!((j - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-12);
        assert!((j - 0.38629).abs() < 1e-5);
        let neg = PiecewisePath::new(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.8)]).unwrap();
        assert_eq!(neg.eval_j(&poisson).unwrap(), f64::INFINITY);
        let normal = DistributionSpec::normal(1.0, 2.0).unwrap();
        let p = PiecewisePath::new(vec![(0.0, 0.0), (1.0, 3.0), (2.0, 2.0)]).unwrap();
        // slopes 3 and −1 against μ = 1, σ² = 4: (3−1)²/8 + (−1−1)²/8
        assert!((p.eval_j(&normal).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_paths() {
        assert!(PiecewisePath::new(vec![(0.0, 0.0)]).is_err());
        assert!(PiecewisePath::new(vec![(0.0, 1.0), (1.0, 1.0)]).is_err());
        assert!(PiecewisePath::new(vec![(0.0, 0.0), (0.5, 1.0), (0.4, 1.0)]).is_err());
        assert!(PiecewisePath::new(vec![(0.0, 0.0), (0.5, 1.0), (0.5, 2.0)]).is_err());
        assert!(PiecewisePath::linear(1.0, 1.0).unwrap().eval_i(0.0).is_err());
    }

    #[test]
    fn endpoint_values() {
        assert_eq!(endpoint_infimum(0.0, 3.0, 2.0).unwrap(), 0.0);
        assert_eq!(endpoint_infimum(1.0, 1.0, 1.0).unwrap(), 0.5);
        // a = −μt at T = τᵣ reproduces the theorem rate
        let (mu, sigma2, r, t) = (1.3, 0.7, 0.4, 0.9);
        let via_infimum = endpoint_infimum(-mu * t, r / mu, sigma2).unwrap();
        assert!((via_infimum - theorem_rate(mu, sigma2, r, t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn verify_matches_closed_form() {
        assert_eq!(
            verify_endpoint_infimum(1.7, 2.3, 0.9, 1).unwrap(),
            endpoint_infimum(1.7, 2.3, 0.9).unwrap()
        );
        assert!((verify_endpoint_infimum(1.0, 1.0, 1.0, 8).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn perturbed_knot_is_worse() {
        let best = endpoint_minimizer(1.0, 1.0, 1.0, 8).unwrap();
        let mut values: Vec<f64> = best.knots()[1..].iter().map(|k| k.1).collect();
        values[3] += 0.01;
        let worse = PiecewisePath::from_equal_segments(1.0, &values).unwrap();
        assert!(worse.eval_i(1.0).unwrap() > best.eval_i(1.0).unwrap());
    }

    #[test]
    fn near_minimizer_value() {
        // f(s) = −μt(1+ε)s/(τᵣ−δ) on [0, τᵣ+δ]
        let (mu, sigma2, r, t, eps, delta) = (1.0, 1.0, 0.25, 0.5, 0.1, 0.05);
        let tau = r / mu;
        let slope = -mu * t * (1.0 + eps) / (tau - delta);
        let path = PiecewisePath::linear(slope, tau + delta).unwrap();
        let expected =
            mu * mu * t * t * (tau + delta) * (1.0 + eps).powi(2) / (2.0 * sigma2 * (tau - delta).powi(2));
        assert!((path.eval_i(sigma2).unwrap() - expected).abs() < 1e-12);
        // sup over [τᵣ−δ, τᵣ+δ] is −μt(1+ε) < −μt
        assert!(path.value_at(tau - delta).unwrap() < -mu * t);
        assert!(path.eval_i(sigma2).unwrap() > theorem_rate(mu, sigma2, r, t).unwrap());
    }

    #[test]
    fn theorem_rate_values() {
        assert_eq!(theorem_rate(1.0, 1.0, 0.25, 1.0).unwrap(), 2.0);
        assert_eq!(theorem_rate(1.0, 1.0, 0.25, 0.5).unwrap(), 0.5);
        assert!((theorem_rate(2.0, 3.0, 1.0, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(theorem_rate(1.0, 1.0, 1.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(theorem_rate(1.0, 1.0, 0.0, 1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn conjugate_is_locally_quadratic() {
        for d in [
            DistributionSpec::poisson(1.0).unwrap(),
            DistributionSpec::exponential(1.0).unwrap(),
            DistributionSpec::normal(1.0, 1.0).unwrap(),
            DistributionSpec::shifted_bernoulli(0.5, 0.5).unwrap(),
        ] {
            let hs = [0.1, -0.1, 0.05, -0.05, 0.025, -0.025];
            let c = hs
                .iter()
                .map(|&h| {
                    let err = (d.legendre(d.mu() + h).unwrap() - h * h / (2.0 * d.sigma2())).abs();
                    err / h.abs().powi(3)
                })
                .fold(0.0, f64::max);
            assert!(c.is_finite() && c < 10.0, "{:?}: C = {c}", d.kind());
        }
    }

    fn arb_path() -> impl Strategy<Value = PiecewisePath> {
        prop::collection::vec((0.01f64..1.0, -3.0f64..3.0), 1..12).prop_map(|steps| {
            let mut knots = vec![(0.0, 0.0)];
            let (mut t, mut v) = (0.0, 0.0);
            for (dt, dv) in steps {
                t += dt;
                v += dv;
                knots.push((t, v));
            }
            PiecewisePath::new(knots).unwrap()
        })
    }

    proptest! {
        #[test]
        fn cauchy_schwarz_bound(path in arb_path(), sigma2 in 0.1f64..5.0) {
            let bound = endpoint_infimum(path.endpoint(), path.horizon(), sigma2).unwrap();
            prop_assert!(path.eval_i(sigma2).unwrap() >= bound - 1e-12);
        }

        #[test]
        fn functionals_add_under_concatenation(a in arb_path(), b in arb_path(), sigma2 in 0.1f64..5.0) {
            let joined = a.concat(&b);
            let i_sum = a.eval_i(sigma2).unwrap() + b.eval_i(sigma2).unwrap();
            prop_assert!((joined.eval_i(sigma2).unwrap() - i_sum).abs() <= 1e-9 * (1.0 + i_sum));
            let d = DistributionSpec::normal(0.5, 1.5).unwrap();
            let j_sum = a.eval_j(&d).unwrap() + b.eval_j(&d).unwrap();
            prop_assert!((joined.eval_j(&d).unwrap() - j_sum).abs() <= 1e-9 * (1.0 + j_sum));
        }

        #[test]
        fn rate_equals_gaussian_tail_rate(mu in 0.1f64..5.0, sigma2 in 0.1f64..5.0, frac in 0.01f64..0.99, t in 0.01f64..3.0) {
            let r = frac * mu;
            let v = clt_variance(mu, sigma2, r);
            let rate = theorem_rate(mu, sigma2, r, t).unwrap();
            prop_assert!((rate - t * t / (2.0 * v)).abs() <= 1e-12 * rate.max(1.0));
        }
    }
}
