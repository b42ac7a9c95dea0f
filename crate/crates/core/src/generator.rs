//! Simulation of the partial tiered review process.
//!
//! Per stratum: latent label counts are drawn as independent Poissons, then
//! each tier reviews `max(1, Binomial(e_{t-1}, π_t))` escalated candidates
//! chosen without replacement, rejects its own false positives and
//! escalates the rest. Sampling without replacement is done at the count
//! level with one multivariate hypergeometric split per tier.
//!
//! Draw order within a stratum is fixed: the `T + 1` Poisson draws in rate
//! order, then for each reached tier one binomial draw followed by the
//! hypergeometric split.

use crate::dist::{fill_mv_hypergeometric, sample_binomial, sample_poisson};
use crate::error::Result;
use crate::model::{check_mileage, Dataset, LatentTable, ObservedStratum, Scenario, StratumParams};
use crate::rng::RngStream;

/// Runs the single-stratum process, returning the latent table and the
/// observable counts.
pub fn generate_stratum(
    params: &StratumParams,
    mileage: f64,
    rng: &mut RngStream,
) -> Result<(LatentTable, ObservedStratum)> {
    check_mileage(mileage)?;
    let tiers = params.tiers();
    let mut latent = LatentTable::zeros(tiers);
    let mut observed = ObservedStratum::empty(tiers);

    for (t, &rate) in params.lambdas().iter().enumerate() {
        latent.set(t, 0, sample_poisson(mileage * rate, rng)?);
    }
    observed.e[0] = latent.column_sum(0);

    let mut pool = Vec::with_capacity(tiers + 1);
    let mut drawn = vec![0u64; tiers + 1];
    for tier in 1..=tiers {
        let available = observed.e[tier - 1];
        if available == 0 {
            break;
        }
        let reviewed = sample_binomial(available, params.pis()[tier - 1], rng)?.max(1);
        observed.n[tier - 1] = reviewed;

        // Classes present in the escalation set of tier - 1: labels
        // tier - 1 (rejected here) through T.
        pool.clear();
        pool.extend((tier - 1..=tiers).map(|k| latent.get(k, tier - 1)));
        let drawn = &mut drawn[..pool.len()];
        fill_mv_hypergeometric(&pool, reviewed, rng, drawn)?;

        let mut escalated = 0;
        for (offset, &count) in drawn.iter().enumerate().skip(1) {
            latent.set(tier - 1 + offset, tier, count);
            escalated += count;
        }
        observed.e[tier] = escalated;
    }

    debug_assert!(observed.validate().is_ok());
    Ok((latent, observed))
}

/// Runs every stratum on its own child stream (`rng.child(h)`).
pub fn generate_dataset(
    scenario: &Scenario,
    rng: &RngStream,
) -> Result<(Vec<LatentTable>, Dataset)> {
    let mut latent = Vec::with_capacity(scenario.strata().len());
    let mut observed = Vec::with_capacity(scenario.strata().len());
    for (h, params) in scenario.strata().iter().enumerate() {
        let (l, o) = generate_stratum(params, scenario.mileage(), &mut rng.child(h as u64))?;
        latent.push(l);
        observed.push(o);
    }
    Ok((latent, Dataset::new_unchecked(scenario.mileage(), observed)))
}
