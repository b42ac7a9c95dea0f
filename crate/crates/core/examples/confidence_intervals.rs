//! The three interval constructions on a single simulated dataset.
//!
//! cargo run --release --example confidence_intervals -- [pi1] [seed]

use tiered_review::ci::{ci_bootstrap, ci_gamma_wsip, ci_wald, DEFAULT_BOOTSTRAP_REPS};
use tiered_review::study::scenario_rare;
use tiered_review::{estimate_theta, generate_dataset, RngStream};

fn main() -> tiered_review::Result<()> {
    let mut args = std::env::args().skip(1);
    let pi1: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);

    let scenario = scenario_rare(pi1)?;
    let root = RngStream::new(seed);
    let (_, data) = generate_dataset(&scenario, &root.child(0))?;
    let est = estimate_theta(&data)?;
    println!(
        "true theta {}, estimate {:.3}",
        scenario.theta(),
        est.theta_hat
    );

    let level = 0.9;
    let intervals = [
        ci_bootstrap(&data, level, DEFAULT_BOOTSTRAP_REPS, &root.child(1))?,
        ci_wald(&est, level, false)?,
        ci_wald(&est, level, true)?,
        ci_gamma_wsip(&est, level)?,
    ];
    for (ci, label) in intervals
        .iter()
        .zip(["bootstrap", "wald", "wald (clamped)", "gamma"])
    {
        println!(
            "{label:<15} [{:>8.3}, {:>8.3}]  width {:>7.3}  covers {}",
            ci.lower,
            ci.upper,
            ci.width(),
            ci.covers(scenario.theta())
        );
    }
    Ok(())
}
