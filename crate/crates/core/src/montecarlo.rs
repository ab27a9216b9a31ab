//! Replicated hitting-time experiments.
//!
//! Replication `i` draws its increments from its own ChaCha8 stream
//! (`master_seed`, stream `i`), so results depend only on the configuration
//! and never on how replications are scheduled. Tail counts are a
//! sequential fold over the per-replication deviations in index order.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::distributions::{DistributionSpec, IncrementLaw};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::stats;
use crate::trajectory::{default_horizon, stream_hitting_time, HittingOutcome};

/// Which tail events are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// `D > t`.
    Upper,
    /// `D < −t`.
    Lower,
    Both,
}

impl Tail {
    pub fn includes_upper(self) -> bool {
        matches!(self, Tail::Upper | Tail::Both)
    }

    pub fn includes_lower(self) -> bool {
        matches!(self, Tail::Lower | Tail::Both)
    }
}

/// Scaled deviation `D = (n/aₙ)(τᵣⁿ − τᵣ)` of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deviation {
    Finite(f64),
    /// No crossing before the horizon; treated as `D = +∞`.
    Censored,
}

impl Deviation {
    pub fn value(self) -> f64 {
        match self {
            Deviation::Finite(d) => d,
            Deviation::Censored => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig<L = DistributionSpec> {
    pub dist: L,
    pub n: usize,
    pub r: f64,
    /// `aₙ = n^an_exponent`, exponent in `(0.5, 1)`.
    pub an_exponent: f64,
    pub replications: usize,
    pub t_grid: Vec<f64>,
    pub horizon: f64,
    pub master_seed: u64,
    pub tail: Tail,
}

pub const DEFAULT_GRID_POINTS: usize = 40;

impl<L: IncrementLaw> ExperimentConfig<L> {
    /// Configuration with the default horizon and t-grid.
    pub fn new(dist: L, n: usize, r: f64, an_exponent: f64, replications: usize, master_seed: u64) -> Self {
        let mu = dist.mean();
        let sigma2 = dist.variance();
        let t_grid = default_t_grid(mu, sigma2, r, n, an_exponent, replications, DEFAULT_GRID_POINTS);
        Self {
            dist,
            n,
            r,
            an_exponent,
            replications,
            t_grid,
            horizon: default_horizon(mu, r),
            master_seed,
            tail: Tail::Upper,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mu = self.dist.mean();
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if !(self.r > 0.0 && self.r < mu) {
            return Err(Error::Domain { r: self.r, mu });
        }
        if !(self.an_exponent > 0.5 && self.an_exponent < 1.0) {
            return Err(invalid(
                "an_exponent",
                format!("must lie in (0.5, 1), got {}", self.an_exponent),
            ));
        }
        if self.replications == 0 {
            return Err(invalid("replications", "must be at least 1"));
        }
        if !(self.horizon.is_finite() && self.horizon >= 1.0) {
            return Err(invalid("horizon", format!("must be finite and >= 1, got {}", self.horizon)));
        }
        if self.t_grid.is_empty() {
            return Err(invalid("t_grid", "must not be empty"));
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(invalid("t_grid", "values must be finite and > 0"));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("t_grid", "values must be strictly increasing"));
        }
        Ok(())
    }

    pub fn a_n(&self) -> f64 {
        (self.n as f64).powf(self.an_exponent)
    }

    /// `τᵣ = r/μ`.
    pub fn limit_time(&self) -> f64 {
        self.r / self.dist.mean()
    }

    /// `n/aₙ²`, the factor turning `−log p̂` into a rate.
    pub fn rate_scale(&self) -> f64 {
        let a = self.a_n();
        self.n as f64 / (a * a)
    }
}

/// `n` equally spaced points on `(0, t_max]`, where `t_max` is the point at
/// which the Gaussian approximation of `D` predicts about ten exceedances in
/// `replications` draws.
pub fn default_t_grid(
    mu: f64,
    sigma2: f64,
    r: f64,
    n: usize,
    an_exponent: f64,
    replications: usize,
    points: usize,
) -> Vec<f64> {
    let nf = n as f64;
    let a_n = nf.powf(an_exponent);
    let sd = nf / a_n * (sigma2 * r / (mu.powi(3) * nf)).sqrt();
    let p = (10.0 / replications.max(1) as f64).min(0.4);
    let z = Normal::standard().inverse_cdf(1.0 - p);
    let t_max = if sd > 0.0 { sd * z } else { 1.0 };
    (1..=points).map(|k| t_max * k as f64 / points as f64).collect()
}

/// One row of a rate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub t: f64,
    /// Replications in the tail event; censored runs count for the upper tail.
    pub hits: u64,
    /// Censored replications in the whole run.
    pub censored: u64,
    pub p_hat: f64,
    /// `−(n/aₙ²)·log p̂`, `+∞` when `hits = 0`.
    pub empirical_rate: f64,
    pub theoretical_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub n: usize,
    pub r: f64,
    pub an_exponent: f64,
    pub a_n: f64,
    pub replications: usize,
    pub horizon: f64,
    pub master_seed: u64,
    pub tail: Tail,
    pub mu: f64,
    pub sigma2: f64,
    pub censored: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub meta: RunMeta,
    /// Empty unless the tail includes `Upper`.
    pub upper: Vec<RateRow>,
    /// Empty unless the tail includes `Lower`.
    pub lower: Vec<RateRow>,
}

impl RateCurve {
    /// Rows for the configured tail; the upper tail when both were run.
    pub fn primary_rows(&self) -> &[RateRow] {
        if self.meta.tail.includes_upper() {
            &self.upper
        } else {
            &self.lower
        }
    }
}

/// ChaCha8 stream `index` under `master_seed`.
pub fn replication_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Hitting times for `replications` independent streams.
pub fn hitting_times<L: IncrementLaw>(
    dist: &L,
    n: usize,
    horizon: f64,
    r: f64,
    replications: usize,
    master_seed: u64,
    exec: Execution,
) -> Result<Vec<HittingOutcome>> {
    exec.map_indexed(replications, |i| {
        let mut rng = replication_rng(master_seed, i as u64);
        stream_hitting_time(dist, n, horizon, r, &mut rng).map(|h| h.outcome)
    })
    .into_iter()
    .collect()
}

pub fn scaled_deviations<L: IncrementLaw>(config: &ExperimentConfig<L>) -> Result<Vec<Deviation>> {
    scaled_deviations_with(config, Execution::default())
}

pub fn scaled_deviations_with<L: IncrementLaw>(
    config: &ExperimentConfig<L>,
    exec: Execution,
) -> Result<Vec<Deviation>> {
    config.validate()?;
    let tau = config.limit_time();
    let scale = config.n as f64 / config.a_n();
    let outcomes = hitting_times(
        &config.dist,
        config.n,
        config.horizon,
        config.r,
        config.replications,
        config.master_seed,
        exec,
    )?;
    Ok(outcomes
        .into_iter()
        .map(|o| match o {
            HittingOutcome::Hit(t) => Deviation::Finite(scale * (t - tau)),
            HittingOutcome::Censored => Deviation::Censored,
        })
        .collect())
}

pub fn run_experiment<L: IncrementLaw>(config: &ExperimentConfig<L>) -> Result<RateCurve> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with<L: IncrementLaw>(config: &ExperimentConfig<L>, exec: Execution) -> Result<RateCurve> {
    let start = Instant::now();
    let deviations = scaled_deviations_with(config, exec)?;
    let mut curve = rate_curve_from_deviations(config, &deviations)?;
    curve.meta.elapsed = start.elapsed();
    Ok(curve)
}

/// Tail counts and rates from an explicit list of deviations.
pub fn rate_curve_from_deviations<L: IncrementLaw>(
    config: &ExperimentConfig<L>,
    deviations: &[Deviation],
) -> Result<RateCurve> {
    config.validate()?;
    if deviations.len() != config.replications {
        return Err(invalid(
            "deviations",
            format!("expected {} values, got {}", config.replications, deviations.len()),
        ));
    }
    let m = config.replications as u64;
    let censored = deviations.iter().filter(|d| matches!(d, Deviation::Censored)).count() as u64;
    let mu = config.dist.mean();
    let sigma2 = config.dist.variance();
    let scale = config.rate_scale();

    let row = |t: f64, hits: u64| {
        let p_hat = hits as f64 / m as f64;
        let empirical_rate = if hits == 0 { f64::INFINITY } else { -scale * p_hat.ln() + 0.0 };
        let (lo, hi) = stats::wilson_interval(hits, m, stats::Z_95);
        RateRow {
            t,
            hits,
            censored,
            p_hat,
            empirical_rate,
            theoretical_rate: mu.powi(3) * t * t / (2.0 * sigma2 * config.r),
            ci_low: -scale * hi.ln() + 0.0,
            ci_high: if lo > 0.0 { -scale * lo.ln() } else { f64::INFINITY },
        }
    };

    let upper = if config.tail.includes_upper() {
        config
            .t_grid
            .iter()
            .map(|&t| row(t, deviations.iter().filter(|d| d.value() > t).count() as u64))
            .collect()
    } else {
        Vec::new()
    };
    let lower = if config.tail.includes_lower() {
        config
            .t_grid
            .iter()
            .map(|&t| row(t, deviations.iter().filter(|d| d.value() < -t).count() as u64))
            .collect()
    } else {
        Vec::new()
    };

    Ok(RateCurve {
        meta: RunMeta {
            n: config.n,
            r: config.r,
            an_exponent: config.an_exponent,
            a_n: config.a_n(),
            replications: config.replications,
            horizon: config.horizon,
            master_seed: config.master_seed,
            tail: config.tail,
            mu,
            sigma2,
            censored,
            elapsed: Duration::ZERO,
        },
        upper,
        lower,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltReport {
    pub sample_mean: f64,
    pub sample_var: f64,
    /// `σ²r/μ³`.
    pub target_var: f64,
    pub ks_distance: f64,
    pub censored: u64,
}

/// Compares `√n(τᵣⁿ − τᵣ)` with its normal limit. Censored replications are
/// dropped from the statistics and counted.
pub fn clt_check<L: IncrementLaw>(
    dist: &L,
    n: usize,
    r: f64,
    replications: usize,
    master_seed: u64,
    exec: Execution,
) -> Result<CltReport> {
    let mu = dist.mean();
    check_level(r, mu)?;
    if n == 0 || replications == 0 {
        return Err(invalid("n/replications", "must be at least 1"));
    }
    let tau = r / mu;
    let outcomes = hitting_times(dist, n, default_horizon(mu, r), r, replications, master_seed, exec)?;
    let root_n = (n as f64).sqrt();
    let z: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| match o {
            HittingOutcome::Hit(t) => Some(root_n * (t - tau)),
            HittingOutcome::Censored => None,
        })
        .collect();
    let censored = (outcomes.len() - z.len()) as u64;
    let target_var = dist.variance() * r / mu.powi(3);
    let (sample_mean, sample_var) = if z.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        stats::mean_and_variance(&z)
    };
    let ks_distance = stats::ks_distance(&z, |x| stats::centered_normal_cdf(x, target_var));
    Ok(CltReport {
        sample_mean,
        sample_var,
        target_var,
        ks_distance,
        censored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlnRow {
    pub n: usize,
    /// Median of `|τᵣⁿ − r/μ|`; censored runs count as `+∞`.
    pub median_abs_dev: f64,
    pub censored: u64,
}

pub fn lln_check<L: IncrementLaw>(
    dist: &L,
    r: f64,
    n_list: &[usize],
    replications: usize,
    master_seed: u64,
    exec: Execution,
) -> Result<Vec<LlnRow>> {
    let mu = dist.mean();
    check_level(r, mu)?;
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("n_list", "must be a non-empty, strictly increasing list of positive integers"));
    }
    if replications == 0 {
        return Err(invalid("replications", "must be at least 1"));
    }
    let tau = r / mu;
    let horizon = default_horizon(mu, r);
    n_list
        .iter()
        .map(|&n| {
            let outcomes = hitting_times(dist, n, horizon, r, replications, master_seed, exec)?;
            let censored = outcomes.iter().filter(|o| matches!(o, HittingOutcome::Censored)).count() as u64;
            let mut devs: Vec<f64> = outcomes
                .iter()
                .map(|o| match o {
                    HittingOutcome::Hit(t) => (t - tau).abs(),
                    HittingOutcome::Censored => f64::INFINITY,
                })
                .collect();
            Ok(LlnRow {
                n,
                median_abs_dev: stats::median(&mut devs),
                censored,
            })
        })
        .collect()
}

fn check_level(r: f64, mu: f64) -> Result<()> {
    if r > 0.0 && r < mu {
        Ok(())
    } else {
        Err(Error::Domain { r, mu })
    }
}
