//! Closed-form maximum-likelihood estimates for partial tiered review.
//!
//! For one stratum, `Λ̂_t = (1/m) Π_{s≤t} e_s / Π_{1≤s≤t} n_s`: each tier's
//! review sample is up-weighted by the inverse of its empirical sampling
//! fraction. Individual rates follow as differences, `λ̂_t = Λ̂_t - Λ̂_{t+1}`,
//! and the aggregate is `θ̂ = Σ_h λ̂_hT`.

use crate::error::{invalid_input, invalid_param, Result};
use crate::model::{check_mileage, Dataset, ObservedStratum, RateEstimate, StratumEstimate};

fn check_stratum(stratum: &ObservedStratum) -> Result<()> {
    stratum.validate().map_err(|v| invalid_input(v.to_string()))
}

/// `Λ̂_t` at unit mileage. Zero from the first tier with no escalations on.
fn cumulative_counts(stratum: &ObservedStratum) -> Vec<f64> {
    let (e, n) = (&stratum.e, &stratum.n);
    let mut out = vec![0.0; e.len()];
    out[0] = e[0] as f64;
    for t in 1..e.len() {
        if n[t - 1] == 0 {
            // Only reachable after early termination; remaining entries stay 0.
            break;
        }
        // Ratio first: e_t = n_t then leaves Λ̂ unchanged exactly, and e_t < n_t
        // can only round down, so λ̂ never goes negative.
        out[t] = out[t - 1] * (e[t] as f64 / n[t - 1] as f64);
    }
    out
}

fn rates_from_cumulative(cumulative: &[f64]) -> Vec<f64> {
    let last = cumulative.len() - 1;
    (0..=last)
        .map(|t| {
            if t == last {
                cumulative[t]
            } else {
                cumulative[t] - cumulative[t + 1]
            }
        })
        .collect()
}

/// `Λ̂_0..Λ̂_T` per mile; non-increasing.
pub fn estimate_cumulative_rates(stratum: &ObservedStratum, mileage: f64) -> Result<Vec<f64>> {
    check_stratum(stratum)?;
    check_mileage(mileage)?;
    Ok(cumulative_counts(stratum)
        .into_iter()
        .map(|c| c / mileage)
        .collect())
}

/// `λ̂_0..λ̂_T` per mile; non-negative, summing to `e_0 / m`.
pub fn estimate_rates(stratum: &ObservedStratum, mileage: f64) -> Result<Vec<f64>> {
    check_stratum(stratum)?;
    check_mileage(mileage)?;
    Ok(rates_from_cumulative(&cumulative_counts(stratum))
        .into_iter()
        .map(|c| c / mileage)
        .collect())
}

/// `π̂_t = n_t / e_{t-1}`; tiers never reached get 1.
pub fn estimate_sampling_rates(stratum: &ObservedStratum) -> Result<Vec<f64>> {
    check_stratum(stratum)?;
    Ok(sampling_rates(stratum))
}

fn sampling_rates(stratum: &ObservedStratum) -> Vec<f64> {
    stratum
        .n
        .iter()
        .zip(&stratum.e)
        .map(|(&n, &pool)| {
            if pool == 0 {
                1.0
            } else {
                n as f64 / pool as f64
            }
        })
        .collect()
}

/// Per-stratum estimate without re-validating (callers guarantee validity).
pub(crate) fn estimate_stratum(stratum: &ObservedStratum, mileage: f64) -> StratumEstimate {
    let counts = cumulative_counts(stratum);
    let rates = rates_from_cumulative(&counts);
    let sampling_rates = sampling_rates(stratum);
    let sampling_product: f64 = sampling_rates.iter().product();
    StratumEstimate {
        cumulative_rates: counts.iter().map(|c| c / mileage).collect(),
        rates: rates.iter().map(|c| c / mileage).collect(),
        sampling_rates,
        sampling_product,
        weight: 1.0 / (mileage * sampling_product),
        confirmed: stratum.e_last(),
    }
}

/// Assembles per-stratum estimates, weights `w_h = 1 / (m π̂_h)` and
/// `θ̂ = Σ_h λ̂_hT`.
pub fn estimate_theta(dataset: &Dataset) -> Result<RateEstimate> {
    for (h, s) in dataset.strata().iter().enumerate() {
        s.validate()
            .map_err(|v| invalid_input(format!("stratum {h}: {v}")))?;
    }
    check_mileage(dataset.mileage())?;
    Ok(estimate_unchecked(dataset))
}

pub(crate) fn estimate_unchecked(dataset: &Dataset) -> RateEstimate {
    let strata: Vec<StratumEstimate> = dataset
        .strata()
        .iter()
        .map(|s| estimate_stratum(s, dataset.mileage()))
        .collect();
    let theta_hat = strata.iter().map(StratumEstimate::tp_rate).sum();
    RateEstimate {
        mileage: dataset.mileage(),
        strata,
        theta_hat,
    }
}

/// Residuals (left minus right side) of the EM fixed-point equations for a
/// two-tier stratum, evaluated at per-mile rates `lambdas`.
///
/// The M-step sets `λ_t = E[x_t0 | e, n]`; the E-step splits each unreviewed
/// remainder `e_s - n_{s+1}` proportionally to the rates still in play. All
/// three residuals vanish exactly at the closed-form MLE. Rates are scaled
/// to counts by `mileage` before evaluation, so residuals are in event units.
pub fn em_fixed_point_residual_t2(
    stratum: &ObservedStratum,
    lambdas: [f64; 3],
    mileage: f64,
) -> Result<[f64; 3]> {
    check_stratum(stratum)?;
    check_mileage(mileage)?;
    if stratum.tiers() != 2 {
        return Err(invalid_input(format!(
            "fixed-point system is defined for 2 tiers, got {}",
            stratum.tiers()
        )));
    }
    let [e0, e1, e2] = [stratum.e[0], stratum.e[1], stratum.e[2]].map(|v| v as f64);
    let [n1, n2] = [stratum.n[0], stratum.n[1]].map(|v| v as f64);
    if e0 < 1.0 || e1 < 1.0 {
        return Err(invalid_input(
            "fixed-point system needs review to reach tier 2 (e_0, e_1 >= 1)",
        ));
    }
    let [l0, l1, l2] = lambdas.map(|l| l * mileage);
    if lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(invalid_param("rates must be finite and non-negative"));
    }
    let pending1 = l1 + l2;
    if pending1 <= 0.0 {
        return Err(invalid_param("λ_1 + λ_2 must be positive"));
    }
    let total = l0 + pending1;
    let r0 = l0 - ((e0 - n1) * l0 / total + (n1 - e1));
    let r1 = l1 - ((e0 - n1) * l1 / total + (e1 - n2) * l1 / pending1 + (n2 - e2));
    let r2 = l2 - ((e0 - n1) * l2 / total + (e1 - n2) * l2 / pending1 + e2);
    Ok([r0, r1, r2])
}
