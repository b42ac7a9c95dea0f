//! A binomial sample of a Poisson count is again Poisson: compare the
//! empirical law of Binomial(Poisson(λ), π) with Poisson(λπ).
//!
//! cargo run --release --example poisson_thinning -- [lambda] [pi]

use tiered_review::dist::{sample_binomial, sample_poisson};
use tiered_review::RngStream;

fn main() -> tiered_review::Result<()> {
    let mut args = std::env::args().skip(1);
    let lambda: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5.0);
    let pi: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.3);
    let trials = 200_000;

    let mut rng = RngStream::new(1);
    let mut counts = vec![0u64; 64];
    for _ in 0..trials {
        let n = sample_poisson(lambda, &mut rng)?;
        let y = sample_binomial(n, pi, &mut rng)? as usize;
        counts[y.min(63)] += 1;
    }

    let mu = lambda * pi;
    let mut pmf = (-mu).exp();
    println!("{:>3} {:>10} {:>10}", "k", "empirical", "poisson");
    for (k, &c) in counts.iter().enumerate().take(12) {
        println!("{k:>3} {:>10.5} {:>10.5}", c as f64 / trials as f64, pmf);
        pmf *= mu / (k as f64 + 1.0);
    }
    Ok(())
}
