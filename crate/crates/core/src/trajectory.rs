//! Interpolated partial-sum paths and their first-passage times.
//!
//! For scale `n` the path is `S̃ₙ(t) = S_{⌊nt⌋} + (nt − ⌊nt⌋)·X_{⌊nt⌋+1}`,
//! linear between the anchors `k/n`. The hitting time of level `r` is the
//! first `t` with `S̃ₙ(t) ≥ n·r`, solved exactly on the segment where the
//! first upcrossing happens.

use rand::Rng;

use crate::distributions::IncrementLaw;
use crate::error::{invalid, Error, Result};

/// Above this many increments prefix sums are accumulated with Neumaier
/// compensation.
pub const COMPENSATED_SUM_THRESHOLD: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    n: usize,
    horizon: f64,
    increments: Vec<f64>,
    prefix_sums: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HittingOutcome {
    Hit(f64),
    /// No crossing of `n·r` before the horizon.
    Censored,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingResult {
    pub outcome: HittingOutcome,
    pub level_r: f64,
    pub n: usize,
}

impl HittingResult {
    pub fn tau(&self) -> Option<f64> {
        match self.outcome {
            HittingOutcome::Hit(t) => Some(t),
            HittingOutcome::Censored => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self.outcome, HittingOutcome::Censored)
    }
}

/// Number of increments needed to cover `[0, horizon]` at scale `n`.
pub fn increment_count(n: usize, horizon: f64) -> usize {
    (n as f64 * horizon).ceil() as usize
}

fn check_shape(n: usize, horizon: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if !(horizon.is_finite() && horizon >= 1.0) {
        return Err(invalid("horizon", format!("must be finite and >= 1, got {horizon}")));
    }
    Ok(())
}

impl Trajectory {
    /// Draws `ceil(n·horizon)` increments from `law`.
    pub fn build<L, R>(law: &L, n: usize, horizon: f64, rng: &mut R) -> Result<Self>
    where
        L: IncrementLaw + ?Sized,
        R: Rng + ?Sized,
    {
        check_shape(n, horizon)?;
        let m = increment_count(n, horizon);
        let increments = (0..m).map(|_| law.sample(rng)).collect();
        Self::from_increments(n, horizon, increments)
    }

    /// Wraps explicit increments; `increments.len()` must equal `ceil(n·horizon)`.
    pub fn from_increments(n: usize, horizon: f64, increments: Vec<f64>) -> Result<Self> {
        check_shape(n, horizon)?;
        let m = increment_count(n, horizon);
        if increments.len() != m {
            return Err(invalid(
                "increments",
                format!("expected {m} increments for n={n}, horizon={horizon}, got {}", increments.len()),
            ));
        }
        if let Some(x) = increments.iter().find(|x| !x.is_finite()) {
            return Err(invalid("increments", format!("non-finite increment {x}")));
        }
        let prefix_sums = prefix_sums(&increments);
        Ok(Self {
            n,
            horizon,
            increments,
            prefix_sums,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `S₀ = 0, S₁, …, S_m`.
    pub fn prefix_sums(&self) -> &[f64] {
        &self.prefix_sums
    }

    /// `S̃ₙ(t)` for `0 ≤ t ≤ horizon`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::OutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        let scaled = self.n as f64 * t;
        let nearest = scaled.round();
        // snap to the anchor when nt is an integer up to rounding
        if (scaled - nearest).abs() <= 4.0 * f64::EPSILON * nearest.max(1.0) {
            return Ok(self.prefix_sums[(nearest as usize).min(self.increments.len())]);
        }
        let k = scaled.floor() as usize;
        if k >= self.increments.len() {
            return Ok(self.prefix_sums[self.increments.len()]);
        }
        Ok(self.prefix_sums[k] + (scaled - k as f64) * self.increments[k])
    }

    /// First time the path reaches `n·r`.
    pub fn hitting_time(&self, r: f64) -> HittingResult {
        let outcome = first_passage(self.n, self.horizon, &self.increments, &self.prefix_sums, r);
        HittingResult {
            outcome,
            level_r: r,
            n: self.n,
        }
    }
}

fn first_passage(n: usize, horizon: f64, increments: &[f64], prefix: &[f64], r: f64) -> HittingOutcome {
    let level = n as f64 * r;
    let nf = n as f64;
    for (k, &x) in increments.iter().enumerate() {
        let start = prefix[k];
        if start >= level {
            return clip(k as f64 / nf, horizon);
        }
        // a non-increasing piece that starts below the level stays below it
        if x <= 0.0 {
            continue;
        }
        if prefix[k + 1] >= level || start + x >= level {
            let frac = ((level - start) / x).clamp(0.0, 1.0);
            return clip((k as f64 + frac) / nf, horizon);
        }
    }
    HittingOutcome::Censored
}

fn clip(tau: f64, horizon: f64) -> HittingOutcome {
    if tau <= horizon {
        HittingOutcome::Hit(tau)
    } else {
        HittingOutcome::Censored
    }
}

fn prefix_sums(increments: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    out.push(0.0);
    if increments.len() > COMPENSATED_SUM_THRESHOLD {
        let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
        for &x in increments {
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            out.push(sum + comp);
        }
    } else {
        let mut sum = 0.0;
        for &x in increments {
            sum += x;
            out.push(sum);
        }
    }
    out
}

/// First passage from a stream of increments, stopping at the crossing.
///
/// Draws the same increments, in the same order, as [`Trajectory::build`]
/// up to the crossing segment, so the result is identical to
/// `Trajectory::build(..).hitting_time(r)` for the same stream.
pub fn stream_hitting_time<L, R>(law: &L, n: usize, horizon: f64, r: f64, rng: &mut R) -> Result<HittingResult>
where
    L: IncrementLaw + ?Sized,
    R: Rng + ?Sized,
{
    check_shape(n, horizon)?;
    let m = increment_count(n, horizon);
    if m > COMPENSATED_SUM_THRESHOLD {
        // keep the compensated path authoritative
        let traj = Trajectory::build(law, n, horizon, rng)?;
        return Ok(traj.hitting_time(r));
    }
    let level = n as f64 * r;
    let nf = n as f64;
    let mut start = 0.0_f64;
    let mut outcome = HittingOutcome::Censored;
    for k in 0..m {
        if start >= level {
            outcome = clip(k as f64 / nf, horizon);
            break;
        }
        let x = law.sample(rng);
        let end = start + x;
        if x > 0.0 && end >= level {
            let frac = ((level - start) / x).clamp(0.0, 1.0);
            outcome = clip((k as f64 + frac) / nf, horizon);
            break;
        }
        start = end;
    }
    Ok(HittingResult {
        outcome,
        level_r: r,
        n,
    })
}

/// `τ_r = r / μ`, the crossing time of the limit path `x(t) = μt`.
pub fn limit_hitting_time(mu: f64, r: f64) -> Result<f64> {
    if mu == 0.0 {
        return Err(Error::DivisionByZero("mu = 0 in r / mu"));
    }
    Ok(r / mu)
}

/// `x(t) = μt`.
pub fn limit_path(mu: f64, t: f64) -> f64 {
    mu * t
}

/// Horizon used when none is configured: `max(1, 2r/μ)`.
pub fn default_horizon(mu: f64, r: f64) -> f64 {
    (2.0 * r / mu).max(1.0)
}
