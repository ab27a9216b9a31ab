//! Legendre–Fenchel transform `Λ*(x) = sup_a { a·x − Λ(a) }`.
//!
//! `Λ′` is strictly increasing on the interior of the CGF domain, so the
//! supremum is attained at the unique root of `Λ′(a) = x`. The root is found
//! by bracketing outward from `a = 0` (where `Λ′(0) = μ`) and then running
//! Newton steps that fall back to bisection whenever a step leaves the
//! bracket.

use super::{DistributionSpec, Kind};
use crate::error::{Error, Result};

const MAX_BRACKET_STEPS: usize = 4096;
const MAX_SOLVER_STEPS: usize = 500;

impl DistributionSpec {
    /// `Λ*(x)`, using the closed form when one exists.
    pub fn legendre(&self, x: f64) -> Result<f64> {
        match self.legendre_closed_form(x) {
            Some(v) => Ok(v),
            None => self.legendre_numeric(x),
        }
    }

    /// Closed-form `Λ*` for the families that have one.
    pub fn legendre_closed_form(&self, x: f64) -> Option<f64> {
        if x.is_nan() {
            return Some(f64::NAN);
        }
        let v = match &self.kind {
            Kind::Normal { mean, sd } => {
                let d = x - mean;
                d * d / (2.0 * sd * sd)
            }
            Kind::Exponential { rate } => {
                if x > 0.0 && x.is_finite() {
                    let y = rate * x;
                    y - 1.0 - y.ln()
                } else {
                    f64::INFINITY
                }
            }
            Kind::Poisson { rate } => {
                if x > 0.0 && x.is_finite() {
                    x * (x / rate).ln() - x + rate
                } else if x == 0.0 {
                    *rate
                } else {
                    f64::INFINITY
                }
            }
            Kind::ShiftedBernoulli { p, offset } => {
                let y = x - offset;
                if !(0.0..=1.0).contains(&y) {
                    f64::INFINITY
                } else {
                    xlogy(y, y / p) + xlogy(1.0 - y, (1.0 - y) / (1.0 - p))
                }
            }
            Kind::Table { .. } => return None,
        };
        Some(v.max(0.0))
    }

    /// `Λ*(x)` by root-finding on `Λ′`, ignoring any closed form.
    ///
    /// Returns `+∞` outside the closure of the range of `Λ′` and the limit
    /// value `−log P(X = x)` on a finite edge of it.
    pub fn legendre_numeric(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::ConvergenceFailure {
                x,
                residual: f64::NAN,
            });
        }
        let (lo_x, hi_x) = self.mean_range();
        if x < lo_x || x > hi_x || x.is_infinite() {
            return Ok(f64::INFINITY);
        }
        if x == lo_x || x == hi_x {
            return Ok(self.conjugate_at_edge(x));
        }
        let a = self.solve_tilt(x)?;
        Ok((a * x - self.cgf(a)).max(0.0))
    }

    /// The maximizing tilt: the root of `Λ′(a) = x` for `x` strictly inside
    /// the range of `Λ′`.
    pub fn solve_tilt(&self, x: f64) -> Result<f64> {
        let tol = 1e-10 * x.abs().max(1.0);
        let g = |a: f64| self.cgf_derivatives(a).0 - x;
        let domain = self.domain;

        let g0 = g(0.0);
        if g0.abs() <= tol * 1e-3 {
            return Ok(0.0);
        }

        // bracket [lo, hi] with g(lo) < 0 <= g(hi)
        let (mut lo, mut hi) = if g0 < 0.0 {
            let mut lo = 0.0_f64;
            let mut step = 1.0_f64;
            let mut found = None;
            for _ in 0..MAX_BRACKET_STEPS {
                let mut cand = lo + step;
                if domain.upper.is_finite() {
                    cand = cand.min(lo + 0.5 * (domain.upper - lo));
                }
                if cand <= lo {
                    break;
                }
                if g(cand) >= 0.0 {
                    found = Some(cand);
                    break;
                }
                lo = cand;
                step *= 2.0;
            }
            match found {
                Some(hi) => (lo, hi),
                None => {
                    return Err(Error::ConvergenceFailure {
                        x,
                        residual: g(lo).abs(),
                    })
                }
            }
        } else {
            let mut hi = 0.0_f64;
            let mut step = 1.0_f64;
            let mut found = None;
            for _ in 0..MAX_BRACKET_STEPS {
                let mut cand = hi - step;
                if domain.lower.is_finite() {
                    cand = cand.max(hi - 0.5 * (hi - domain.lower));
                }
                if cand >= hi {
                    break;
                }
                if g(cand) < 0.0 {
                    found = Some(cand);
                    break;
                }
                hi = cand;
                step *= 2.0;
            }
            match found {
                Some(lo) => (lo, hi),
                None => {
                    return Err(Error::ConvergenceFailure {
                        x,
                        residual: g(hi).abs(),
                    })
                }
            }
        };

        let mut a = 0.5 * (lo + hi);
        let mut best = (f64::INFINITY, a);
        for _ in 0..MAX_SOLVER_STEPS {
            let (d1, d2) = self.cgf_derivatives(a);
            let r = d1 - x;
            if r.abs() < best.0 {
                best = (r.abs(), a);
            }
            if r.abs() <= tol {
                return Ok(a);
            }
            if r < 0.0 {
                lo = a;
            } else {
                hi = a;
            }
            let newton = a - r / d2;
            let next = if d2 > 0.0 && newton > lo && newton < hi && newton.is_finite() {
                newton
            } else {
                0.5 * (lo + hi)
            };
            // adjacent floats: the bracket cannot shrink further
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            a = next;
        }
        if best.0 <= tol {
            Ok(best.1)
        } else {
            Err(Error::ConvergenceFailure { x, residual: best.0 })
        }
    }
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}
