//! Moderate deviations of first-passage times for interpolated random walks.
//!
//! For i.i.d. increments with mean `μ > 0` and variance `σ²`, the path
//! `S̃ₙ(t)` interpolates the partial sums linearly and `τᵣⁿ` is its first
//! passage time above `n·r`. With `aₙ` between `√n` and `n`,
//!
//! ```text
//! (n/aₙ²)·log P((n/aₙ)(τᵣⁿ − r/μ) > t)  →  −μ³t²/(2σ²r)
//! ```
//!
//! and the same for the lower tail. This crate simulates that statement and
//! evaluates the path functionals behind it.
//!
//! - [`distributions`]: increment laws, CGF, Legendre transform, hypothesis checks
//! - [`trajectory`]: interpolated paths and exact hitting times
//! - [`rate_functions`]: `I_T`, `J_T`, the endpoint infimum and the rate `μ³t²/(2σ²r)`
//! - [`montecarlo`]: replicated experiments, rate curves, CLT/LLN checks

pub mod distributions;
pub mod error;
pub mod exec;
pub mod montecarlo;
pub mod rate_functions;
pub mod stats;
pub mod trajectory;

pub use distributions::{AssumptionReport, CgfDomain, DistributionSpec, IncrementLaw, Kind, PointMass};
pub use error::{Error, Result};
pub use exec::Execution;
pub use montecarlo::{
    clt_check, lln_check, rate_curve_from_deviations, run_experiment, run_experiment_with, scaled_deviations,
    scaled_deviations_with, CltReport, Deviation, ExperimentConfig, LlnRow, RateCurve, RateRow, Tail,
};
pub use rate_functions::{endpoint_infimum, theorem_rate, verify_endpoint_infimum, PiecewisePath};
pub use trajectory::{limit_hitting_time, HittingOutcome, HittingResult, Trajectory};
