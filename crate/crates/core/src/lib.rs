//! Rate estimation for events confirmed through partial, multi-tier human
//! review.
//!
//! Candidate events flow through `T` review tiers. Each tier reviews a
//! random sample of the candidates escalated to it, rejects some as false
//! positives and escalates the rest. The crate provides:
//!
//! * an exact simulator of that process ([`generator`]),
//! * closed-form maximum-likelihood rate estimates ([`estimator`]),
//! * bootstrap, Wald and weighted-Poisson Gamma intervals ([`ci`]),
//! * a Monte Carlo coverage-study harness ([`study`]),
//! * the samplers, quantile functions and seeded streams they share
//!   ([`dist`], [`rng`]).

pub mod ci;
pub mod cli;
pub mod dist;
pub mod error;
pub mod estimator;
pub mod generator;
pub mod model;
pub mod rng;
pub mod study;

pub use ci::{ci_bootstrap, ci_gamma_wsip, ci_wald};
pub use error::{Error, Result};
pub use estimator::{em_fixed_point_residual_t2, estimate_theta};
pub use generator::{generate_dataset, generate_stratum};
pub use model::{
    validate_observed, CiMethod, Dataset, IntervalResult, LatentTable, ObservedStratum,
    RateEstimate, ReviewConfig, Scenario, StratumEstimate, StratumParams, ValidationReport,
};
pub use rng::RngStream;
pub use study::{run_sweep, CoverageRow, ScenarioSource, StudySpec};
