//! Maximum-likelihood rates from observed review counts.
//!
//! cargo run --example point_estimate -- [dataset.json]

use tiered_review::{estimate_theta, Dataset};

const DEFAULT: &str = include_str!("data/partial_review.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT.to_string(),
    };
    let dataset: Dataset = serde_json::from_str(&text)?;
    let est = estimate_theta(&dataset)?;

    for (h, s) in est.strata.iter().enumerate() {
        println!("stratum {h}");
        println!("  Lambda_hat {:?}", s.cumulative_rates);
        println!("  lambda_hat {:?}", s.rates);
        println!("  pi_hat     {:?}", s.sampling_rates);
        println!("  weight {:.4}, confirmed {}", s.weight, s.confirmed);
    }
    println!("theta_hat = {:.4} per mile", est.theta_hat);
    Ok(())
}
