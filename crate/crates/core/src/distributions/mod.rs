//! Increment laws for the random walk.
//!
//! A [`DistributionSpec`] fixes the law of the i.i.d. increments `X₁, X₂, …`.
//! Besides sampling it exposes the cumulant generating function
//! `Λ(a) = log E e^{aX₁}` together with its first two derivatives, which is
//! all the Legendre transform in [`conjugate`] needs.

mod assumptions;
mod conjugate;

pub use assumptions::{AssumptionReport, MomentGridPoint, TailWitness, THETA_GRID, V_GRID};

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};

use crate::error::{Error, Result};

/// Probabilities of a [`Kind::Table`] law must sum to one within this tolerance.
pub const TABLE_SUM_TOLERANCE: f64 = 1e-12;

/// The parametric family of an increment law.
#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Exponential { rate: f64 },
    Poisson { rate: f64 },
    Normal { mean: f64, sd: f64 },
    /// `offset + B` with `B ~ Bernoulli(p)`.
    ShiftedBernoulli { p: f64, offset: f64 },
    /// Finite law given as `(value, probability)` atoms.
    Table { atoms: Vec<(f64, f64)> },
}

/// Open interval `(lower, upper)` on which `Λ` is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgfDomain {
    pub lower: f64,
    pub upper: f64,
}

impl CgfDomain {
    pub const WHOLE_LINE: CgfDomain = CgfDomain {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn contains(&self, a: f64) -> bool {
        a > self.lower && a < self.upper
    }

    pub fn is_whole_line(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }
}

/// Anything that can produce i.i.d. increments for a trajectory.
///
/// [`DistributionSpec`] is the main implementor; [`PointMass`] covers the
/// degenerate constant-increment case used for calibration runs.
pub trait IncrementLaw: Sync {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
    fn mean(&self) -> f64;
    fn variance(&self) -> f64;
}

/// Constant increments `X ≡ value`. Not a valid [`DistributionSpec`] (zero
/// variance), but the Monte Carlo drivers accept it for exact-path checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass(pub f64);

impl IncrementLaw for PointMass {
    fn sample<R: Rng + ?Sized>(&self, _rng: &mut R) -> f64 {
        self.0
    }

    fn mean(&self) -> f64 {
        self.0
    }

    fn variance(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Exponential(Exp<f64>),
    Poisson(Poisson<f64>),
    Normal(Normal<f64>),
    Bernoulli { p: f64, offset: f64 },
    Table { values: Vec<f64>, cumulative: Vec<f64> },
}

/// A validated increment law with its mean, variance and CGF domain.
#[derive(Debug, Clone)]
pub struct DistributionSpec {
    kind: Kind,
    mu: f64,
    sigma2: f64,
    domain: CgfDomain,
    sampler: Sampler,
}

impl PartialEq for DistributionSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(crate::error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(Kind::Exponential { rate })
    }

    pub fn poisson(rate: f64) -> Result<Self> {
        Self::new(Kind::Poisson { rate })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Self::new(Kind::Normal { mean, sd })
    }

    pub fn shifted_bernoulli(p: f64, offset: f64) -> Result<Self> {
        Self::new(Kind::ShiftedBernoulli { p, offset })
    }

    pub fn table(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(Kind::Table { atoms })
    }

    /// Validates `kind` and derives the moments and CGF domain.
    ///
    /// Rejects laws with non-positive mean or zero variance.
    pub fn new(kind: Kind) -> Result<Self> {
        let (kind, mu, sigma2, domain, sampler) = match kind {
            Kind::Exponential { rate } => {
                let rate = positive("rate", rate)?;
                let exp = Exp::new(rate).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
                (
                    Kind::Exponential { rate },
                    1.0 / rate,
                    1.0 / (rate * rate),
                    CgfDomain {
                        lower: f64::NEG_INFINITY,
                        upper: rate,
                    },
                    Sampler::Exponential(exp),
                )
            }
            Kind::Poisson { rate } => {
                let rate = positive("rate", rate)?;
                let poisson =
                    Poisson::new(rate).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
                (
                    Kind::Poisson { rate },
                    rate,
                    rate,
                    CgfDomain::WHOLE_LINE,
                    Sampler::Poisson(poisson),
                )
            }
            Kind::Normal { mean, sd } => {
                let sd = positive("sd", sd)?;
                if !mean.is_finite() {
                    return Err(crate::error::invalid("mean", "must be finite"));
                }
                let normal =
                    Normal::new(mean, sd).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
                (
                    Kind::Normal { mean, sd },
                    mean,
                    sd * sd,
                    CgfDomain::WHOLE_LINE,
                    Sampler::Normal(normal),
                )
            }
            Kind::ShiftedBernoulli { p, offset } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(crate::error::invalid("p", format!("must lie in (0, 1), got {p}")));
                }
                if !offset.is_finite() {
                    return Err(crate::error::invalid("offset", "must be finite"));
                }
                (
                    Kind::ShiftedBernoulli { p, offset },
                    offset + p,
                    p * (1.0 - p),
                    CgfDomain::WHOLE_LINE,
                    Sampler::Bernoulli { p, offset },
                )
            }
            Kind::Table { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidDistribution("table has no atoms".into()));
                }
                for &(v, p) in &atoms {
                    if !v.is_finite() {
                        return Err(Error::InvalidDistribution(format!("non-finite value {v}")));
                    }
                    if !(p.is_finite() && p >= 0.0) {
                        return Err(Error::InvalidDistribution(format!(
                            "probability {p} of value {v} is negative or non-finite"
                        )));
                    }
                }
                let total: f64 = atoms.iter().map(|&(_, p)| p).sum();
                if (total - 1.0).abs() > TABLE_SUM_TOLERANCE {
                    return Err(Error::InvalidDistribution(format!(
                        "probabilities sum to {total}, expected 1"
                    )));
                }
                let mut atoms: Vec<(f64, f64)> = atoms.into_iter().filter(|&(_, p)| p > 0.0).collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mu: f64 = atoms.iter().map(|&(v, p)| p * v).sum();
                let sigma2: f64 = atoms.iter().map(|&(v, p)| p * (v - mu) * (v - mu)).sum();
                let values = atoms.iter().map(|&(v, _)| v).collect();
                let mut acc = 0.0;
                let cumulative = atoms
                    .iter()
                    .map(|&(_, p)| {
                        acc += p;
                        acc
                    })
                    .collect();
                (
                    Kind::Table { atoms },
                    mu,
                    sigma2,
                    CgfDomain::WHOLE_LINE,
                    Sampler::Table { values, cumulative },
                )
            }
        };
        if mu.is_nan() || mu <= 0.0 {
            return Err(Error::InvalidDistribution(format!("mean must be > 0, got {mu}")));
        }
        if sigma2.is_nan() || sigma2 <= 0.0 {
            return Err(Error::InvalidDistribution("degenerate law (zero variance)".into()));
        }
        Ok(Self {
            kind,
            mu,
            sigma2,
            domain,
            sampler,
        })
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn domain(&self) -> CgfDomain {
        self.domain
    }

    /// One draw of `X₁`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.sampler {
            Sampler::Exponential(d) => d.sample(rng),
            Sampler::Poisson(d) => d.sample(rng),
            Sampler::Normal(d) => d.sample(rng),
            Sampler::Bernoulli { p, offset } => {
                if rng.random::<f64>() < *p {
                    offset + 1.0
                } else {
                    *offset
                }
            }
            Sampler::Table { values, cumulative } => {
                let u = rng.random::<f64>();
                let idx = cumulative.partition_point(|&c| c <= u);
                values[idx.min(values.len() - 1)]
            }
        }
    }

    /// `Λ(a) = log E e^{aX₁}`, or `+∞` outside the CGF domain.
    pub fn cgf(&self, a: f64) -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        if !self.domain.contains(a) {
            return f64::INFINITY;
        }
        match &self.kind {
            Kind::Exponential { rate } => -(-a / rate).ln_1p(),
            Kind::Poisson { rate } => rate * a.exp_m1(),
            Kind::Normal { mean, sd } => mean * a + 0.5 * sd * sd * a * a,
            Kind::ShiftedBernoulli { p, offset } => offset * a + bernoulli_cgf(*p, a),
            Kind::Table { atoms } => log_sum_exp(atoms.iter().map(|&(v, p)| p.ln() + a * v)),
        }
    }

    /// `(Λ′(a), Λ″(a))` for `a` inside the domain.
    pub fn cgf_derivatives(&self, a: f64) -> (f64, f64) {
        match &self.kind {
            Kind::Exponential { rate } => {
                let inv = 1.0 / (rate - a);
                (inv, inv * inv)
            }
            Kind::Poisson { rate } => {
                let d = rate * a.exp();
                (d, d)
            }
            Kind::Normal { mean, sd } => (mean + sd * sd * a, sd * sd),
            Kind::ShiftedBernoulli { p, offset } => {
                // tilted success probability p e^a / (1 - p + p e^a)
                let q = 1.0 / (1.0 + ((1.0 - p) / p) * (-a).exp());
                (offset + q, q * (1.0 - q))
            }
            Kind::Table { atoms } => {
                let shift = atoms
                    .iter()
                    .map(|&(v, p)| p.ln() + a * v)
                    .fold(f64::NEG_INFINITY, f64::max);
                let weights: Vec<f64> = atoms
                    .iter()
                    .map(|&(v, p)| (p.ln() + a * v - shift).exp())
                    .collect();
                let z: f64 = weights.iter().sum();
                let m1: f64 = atoms.iter().zip(&weights).map(|(&(v, _), w)| w * v).sum::<f64>() / z;
                let m2: f64 = atoms
                    .iter()
                    .zip(&weights)
                    .map(|(&(v, _), w)| w * (v - m1) * (v - m1))
                    .sum::<f64>()
                    / z;
                (m1, m2)
            }
        }
    }

    /// Closure of the range of `Λ′`, i.e. the convex hull of the support.
    pub fn mean_range(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Exponential { .. } | Kind::Poisson { .. } => (0.0, f64::INFINITY),
            Kind::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Kind::ShiftedBernoulli { offset, .. } => (*offset, offset + 1.0),
            Kind::Table { atoms } => (atoms[0].0, atoms[atoms.len() - 1].0),
        }
    }

    /// `Λ*` at a finite endpoint of [`Self::mean_range`]: `−log P(X = x)`.
    fn conjugate_at_edge(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Exponential { .. } | Kind::Normal { .. } => f64::INFINITY,
            Kind::Poisson { rate } => *rate,
            Kind::ShiftedBernoulli { p, offset } => {
                if x == *offset {
                    -(-p).ln_1p()
                } else {
                    -p.ln()
                }
            }
            Kind::Table { atoms } => {
                let p: f64 = atoms.iter().filter(|&&(v, _)| v == x).map(|&(_, p)| p).sum();
                -p.ln()
            }
        }
    }
}

impl IncrementLaw for DistributionSpec {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        DistributionSpec::sample(self, rng)
    }

    fn mean(&self) -> f64 {
        self.mu
    }

    fn variance(&self) -> f64 {
        self.sigma2
    }
}

fn bernoulli_cgf(p: f64, a: f64) -> f64 {
    if a < 30.0 {
        (p * a.exp_m1()).ln_1p()
    } else {
        a + p.ln() + ((1.0 - p) / p * (-a).exp()).ln_1p()
    }
}

pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}
