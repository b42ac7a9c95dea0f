//! Confidence intervals for the aggregate rate `θ`.
//!
//! * [`ci_bootstrap`]: parametric bootstrap. Refit, resimulate the whole
//!   review process from the plug-in parameters, take percentile bounds.
//! * [`ci_wald`]: normal approximation with plug-in variance
//!   `(1/m) Σ_h λ̂_hT / π̂_h`.
//! * [`ci_gamma_wsip`]: treats `θ̂ = Σ_h w_h e_hT` as a weighted sum of
//!   independent Poissons and applies the original Gamma method.

use rayon::prelude::*;

use crate::dist::{gamma_quantile, normal_quantile, quantile_sorted};
use crate::error::{invalid_param, Result};
use crate::estimator::estimate_theta;
use crate::generator::generate_stratum;
use crate::model::{
    check_level, CiMethod, Dataset, IntervalResult, ObservedStratum, RateEstimate, StratumParams,
};
use crate::rng::RngStream;

/// Bootstrap replicates used when the caller has no preference.
pub const DEFAULT_BOOTSTRAP_REPS: usize = 2000;

/// Smallest accepted number of bootstrap replicates.
pub const MIN_BOOTSTRAP_REPS: usize = 100;

/// `λ̂_T` for one simulated stratum, without building the full estimate.
fn tp_rate_estimate(obs: &ObservedStratum, mileage: f64) -> f64 {
    let mut c = obs.e[0] as f64;
    for t in 1..obs.e.len() {
        if obs.n[t - 1] == 0 {
            return 0.0;
        }
        c *= obs.e[t] as f64 / obs.n[t - 1] as f64;
    }
    c / mileage
}

/// Parametric bootstrap interval from `reps` resimulated datasets.
///
/// Replicate `b` simulates stratum `h` on stream `rng.child(b).child(h)`,
/// the same layout [`crate::generator::generate_dataset`] uses, so each
/// replicate is a draw of the full multi-stratum process. Replicates that
/// terminate early contribute `θ̂ = 0` and are kept.
pub fn ci_bootstrap(
    dataset: &Dataset,
    level: f64,
    reps: usize,
    rng: &RngStream,
) -> Result<IntervalResult> {
    check_level(level)?;
    if reps < MIN_BOOTSTRAP_REPS {
        return Err(invalid_param(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP_REPS} replicates, got {reps}"
        )));
    }
    let estimate = estimate_theta(dataset)?;
    bootstrap_from_estimate(&estimate, level, reps, rng)
}

pub(crate) fn bootstrap_from_estimate(
    estimate: &RateEstimate,
    level: f64,
    reps: usize,
    rng: &RngStream,
) -> Result<IntervalResult> {
    let result = |lower, upper| IntervalResult {
        method: CiMethod::Bootstrap,
        level,
        lower,
        upper,
    };
    let mileage = estimate.mileage;
    // A stratum with λ̂_T = 0 resimulates zero true positives, hence
    // contributes exactly 0 to every replicate; skipping it leaves the other
    // strata's streams untouched.
    let active: Vec<(u64, StratumParams)> = estimate
        .strata
        .iter()
        .enumerate()
        .filter(|(_, s)| s.tp_rate() > 0.0)
        .map(|(h, s)| {
            StratumParams::new(s.rates.clone(), s.sampling_rates.clone()).map(|p| (h as u64, p))
        })
        .collect::<Result<_>>()?;
    if active.is_empty() {
        return Ok(result(0.0, 0.0));
    }

    let mut thetas = (0..reps as u64)
        .into_par_iter()
        .map(|b| {
            let replicate = rng.child(b);
            active.iter().try_fold(0.0, |acc, (h, params)| {
                let (_, obs) = generate_stratum(params, mileage, &mut replicate.child(*h))?;
                Ok(acc + tp_rate_estimate(&obs, mileage))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    thetas.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    Ok(result(
        quantile_sorted(&thetas, alpha / 2.0),
        quantile_sorted(&thetas, 1.0 - alpha / 2.0),
    ))
}

/// Wald interval `θ̂ ± z_{1-α/2} sqrt((1/m) Σ_h λ̂_hT / π̂_h)`.
///
/// The lower bound can be negative; pass `clamp_at_zero` to truncate it.
/// `θ̂ = 0` gives the degenerate interval `(0, 0)`.
pub fn ci_wald(estimate: &RateEstimate, level: f64, clamp_at_zero: bool) -> Result<IntervalResult> {
    check_level(level)?;
    let z = normal_quantile(1.0 - (1.0 - level) / 2.0)?;
    let variance = estimate
        .strata
        .iter()
        .map(|s| s.tp_rate() / s.sampling_product)
        .sum::<f64>()
        / estimate.mileage;
    let half = z * variance.sqrt();
    let mut lower = estimate.theta_hat - half;
    if clamp_at_zero {
        lower = lower.max(0.0);
    }
    Ok(IntervalResult {
        method: CiMethod::Wald,
        level,
        lower,
        upper: estimate.theta_hat + half,
    })
}

/// Gamma interval for a weighted sum of independent Poissons.
///
/// Lower bound: `α/2` quantile of the Gamma with mean `θ̂` and variance
/// `Σ_h w_h² e_hT` (0 when `θ̂ = 0`). Upper bound: `1 - α/2` quantile of the
/// Gamma with both moments inflated by the largest weight `w_M`.
pub fn ci_gamma_wsip(estimate: &RateEstimate, level: f64) -> Result<IntervalResult> {
    check_level(level)?;
    let alpha = 1.0 - level;
    let variance: f64 = estimate
        .strata
        .iter()
        .map(|s| s.weight * s.weight * s.confirmed as f64)
        .sum();
    let w_max = estimate.max_weight();
    let theta = estimate.theta_hat;
    let lower = if theta > 0.0 {
        gamma_quantile(alpha / 2.0, theta, variance)?
    } else {
        0.0
    };
    let upper = gamma_quantile(1.0 - alpha / 2.0, theta + w_max, variance + w_max * w_max)?;
    Ok(IntervalResult {
        method: CiMethod::GammaWsip,
        level,
        lower,
        upper,
    })
}

/// Runs one method on a dataset. `rng` is only consumed by the bootstrap.
pub fn interval(
    method: CiMethod,
    dataset: &Dataset,
    estimate: &RateEstimate,
    level: f64,
    bootstrap_reps: usize,
    rng: &RngStream,
) -> Result<IntervalResult> {
    match method {
        CiMethod::Bootstrap => {
            check_level(level)?;
            if bootstrap_reps < MIN_BOOTSTRAP_REPS {
                return Err(invalid_param(format!(
                    "bootstrap needs at least {MIN_BOOTSTRAP_REPS} replicates, got {bootstrap_reps}"
                )));
            }
            debug_assert_eq!(dataset.strata().len(), estimate.strata.len());
            bootstrap_from_estimate(estimate, level, bootstrap_reps, rng)
        }
        CiMethod::Wald => ci_wald(estimate, level, false),
        CiMethod::GammaWsip => ci_gamma_wsip(estimate, level),
    }
}
