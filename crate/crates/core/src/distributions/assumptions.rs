//! Checks of the two standing hypotheses on the increment law: a CGF that is
//! finite everywhere, and a stretched-exponential moment
//! `E exp(θ|X₁|^v) ≤ e^b` for some `θ ∈ (0, 1]`, `v > 1`, `b > 0`.
//!
//! The second check is a witness search over a fixed `(θ, v)` grid. A failed
//! search means no witness was found on the grid, nothing more.

use super::{log_sum_exp, DistributionSpec, Kind};

pub const THETA_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
pub const V_GRID: [f64; 3] = [1.1, 1.5, 2.0];

const QUADRATURE_INTERVALS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailWitness {
    pub theta: f64,
    pub v: f64,
    pub b: f64,
}

/// `log E exp(θ|X₁|^v)` at one grid point; `+∞` when the moment diverges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentGridPoint {
    pub theta: f64,
    pub v: f64,
    pub log_moment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub assumption1_holds: bool,
    pub assumption1_detail: String,
    pub assumption2_holds: bool,
    pub assumption2_witness: Option<TailWitness>,
    pub grid: Vec<MomentGridPoint>,
}

impl DistributionSpec {
    pub fn check_assumptions(&self) -> AssumptionReport {
        let domain = self.domain();
        let (assumption1_holds, assumption1_detail) = if domain.is_whole_line() {
            (true, "Λ finite on all of ℝ".to_string())
        } else if domain.upper.is_finite() && domain.lower.is_finite() {
            (
                false,
                format!("Λ(a)=+inf for a≤{} and a≥{}", domain.lower, domain.upper),
            )
        } else if domain.upper.is_finite() {
            (false, format!("Λ(a)=+inf for a≥{}", domain.upper))
        } else {
            (false, format!("Λ(a)=+inf for a≤{}", domain.lower))
        };

        let mut grid = Vec::with_capacity(THETA_GRID.len() * V_GRID.len());
        for &v in &V_GRID {
            for &theta in &THETA_GRID {
                grid.push(MomentGridPoint {
                    theta,
                    v,
                    log_moment: self.log_tail_moment(theta, v),
                });
            }
        }

        // strongest tail statement first: largest v, then largest θ
        let witness = grid
            .iter()
            .filter(|g| g.log_moment.is_finite() && g.log_moment > 0.0)
            .max_by(|x, y| x.v.total_cmp(&y.v).then(x.theta.total_cmp(&y.theta)))
            .map(|g| TailWitness {
                theta: g.theta,
                v: g.v,
                b: g.log_moment,
            });

        AssumptionReport {
            assumption1_holds,
            assumption1_detail,
            assumption2_holds: witness.is_some(),
            assumption2_witness: witness,
            grid,
        }
    }

    /// `log E exp(θ|X₁|^v)` for `θ > 0`, `v > 1`.
    pub fn log_tail_moment(&self, theta: f64, v: f64) -> f64 {
        debug_assert!(theta > 0.0 && v > 1.0);
        match self.kind() {
            // density decays like e^{-λx}; θx^v wins for v > 1
            Kind::Exponential { .. } => f64::INFINITY,
            // log term k·log λ − log k! + θk^v ~ θk^v − k log k, eventually increasing for v > 1
            Kind::Poisson { .. } => f64::INFINITY,
            Kind::Normal { mean, sd } => {
                let s2 = sd * sd;
                if v > 2.0 {
                    f64::INFINITY
                } else if v == 2.0 {
                    let c = 1.0 - 2.0 * theta * s2;
                    if c <= 0.0 {
                        f64::INFINITY
                    } else {
                        -0.5 * c.ln() + theta * mean * mean / c
                    }
                } else {
                    normal_log_moment_quadrature(*mean, *sd, theta, v)
                }
            }
            Kind::ShiftedBernoulli { p, offset } => {
                let lo = theta * offset.abs().powf(v);
                let hi = theta * (offset + 1.0).abs().powf(v);
                log_sum_exp([(1.0 - p).ln() + lo, p.ln() + hi].into_iter())
            }
            Kind::Table { atoms } => {
                log_sum_exp(atoms.iter().map(|&(x, p)| p.ln() + theta * x.abs().powf(v)))
            }
        }
    }
}

/// `log E exp(θ|X|^v)` for `X ~ N(mean, sd²)` by composite Simpson on a window
/// wide enough that the integrand has dropped by `e^{-60}` at both ends.
pub(crate) fn normal_log_moment_quadrature(mean: f64, sd: f64, theta: f64, v: f64) -> f64 {
    let log_integrand = |x: f64| theta * x.abs().powf(v) - (x - mean) * (x - mean) / (2.0 * sd * sd);

    let mut half_width = 10.0 * sd;
    let mut peak = f64::NEG_INFINITY;
    for _ in 0..64 {
        peak = (0..=4000)
            .map(|i| log_integrand(mean - half_width + 2.0 * half_width * i as f64 / 4000.0))
            .fold(f64::NEG_INFINITY, f64::max);
        if log_integrand(mean - half_width) < peak - 60.0 && log_integrand(mean + half_width) < peak - 60.0 {
            break;
        }
        half_width *= 2.0;
    }
    if !peak.is_finite() {
        return f64::INFINITY;
    }

    let (a, b) = (mean - half_width, mean + half_width);
    let n = QUADRATURE_INTERVALS;
    let h = (b - a) / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * (log_integrand(a + i as f64 * h) - peak).exp();
    }
    let integral = sum * h / 3.0;
    integral.ln() + peak - (sd * (2.0 * std::f64::consts::PI).sqrt()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_normal_report() {
        let d = DistributionSpec::normal(1e-300, 1.0).unwrap();
        let r = d.check_assumptions();
        assert!(r.assumption1_holds);
        assert!(r.assumption2_holds);
        let w = r.assumption2_witness.unwrap();
        assert_eq!(w.v, 2.0);
        assert!(w.theta <= 0.4 + 1e-12);
        // E exp(θX²) = (1 − 2θ)^{-1/2}
        assert!((w.b - (-0.5 * (1.0 - 2.0 * w.theta).ln())).abs() < 1e-12);
        assert!(w.b > 0.0);
    }

    #[test]
    fn exponential_fails_assumption1() {
        let r = DistributionSpec::exponential(1.0).unwrap().check_assumptions();
        assert!(!r.assumption1_holds);
        assert_eq!(r.assumption1_detail, "Λ(a)=+inf for a≥1");
        assert!(!r.assumption2_holds);
    }

    #[test]
    fn poisson_assumption2_no_witness() {
        let r = DistributionSpec::poisson(1.0).unwrap().check_assumptions();
        assert!(r.assumption1_holds);
        assert!(!r.assumption2_holds);
        assert!(r.assumption2_witness.is_none());
        assert!(r.grid.iter().all(|g| g.log_moment == f64::INFINITY));
    }

    #[test]
    fn poisson_terms_eventually_grow() {
        // log of the k-th series term with Stirling's log k!, evaluated at
        // k = 10^j: once v > 1 the sequence turns upward and never returns.
        for &v in &V_GRID {
            let theta = 0.1;
            let log_term = |ln_k: f64| {
                let k = ln_k.exp();
                -1.0 - (k * ln_k - k + 0.5 * (2.0 * std::f64::consts::PI * k).ln()) + theta * (v * ln_k).exp()
            };
            let tail: Vec<f64> = (200..300).map(|j| log_term(j as f64)).collect();
            assert!(tail.windows(2).all(|w| w[1] > w[0]), "v = {v}");
            assert!(tail[tail.len() - 1] > 0.0);
        }
    }

    #[test]
    fn quadrature_matches_gaussian_closed_form() {
        for (m, s, theta) in [(0.0, 1.0, 0.1), (1.0, 1.0, 0.4), (-2.0, 0.5, 1.0), (1.0, 2.0, 0.05)] {
            let closed = {
                let c = 1.0 - 2.0 * theta * s * s;
                -0.5 * f64::ln(c) + theta * m * m / c
            };
            let quad = normal_log_moment_quadrature(m, s, theta, 2.0);
            assert!((quad - closed).abs() < 1e-8, "{m} {s} {theta}: {quad} vs {closed}");
        }
    }

    #[test]
    fn sub_gaussian_powers_are_finite() {
        let d = DistributionSpec::normal(1.0, 1.0).unwrap();
        for theta in THETA_GRID {
            assert!(d.log_tail_moment(theta, 1.5).is_finite());
            assert!(d.log_tail_moment(theta, 1.1).is_finite());
        }
        assert_eq!(d.log_tail_moment(0.5, 2.0), f64::INFINITY);
        // monotone in θ
        assert!(d.log_tail_moment(0.2, 1.5) < d.log_tail_moment(0.3, 1.5));
    }

    #[test]
    fn bounded_laws_always_have_witness() {
        let r = DistributionSpec::shifted_bernoulli(0.5, 0.5).unwrap().check_assumptions();
        assert!(r.assumption1_holds && r.assumption2_holds);
        let w = r.assumption2_witness.unwrap();
        assert_eq!((w.theta, w.v), (1.0, 2.0));
        let expected = (0.5 * (0.25f64).exp() + 0.5 * (2.25f64).exp()).ln();
        assert!((w.b - expected).abs() < 1e-12);
    }
}
