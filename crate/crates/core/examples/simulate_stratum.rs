//! One stratum of partial three-tier review, with the hidden label table
//! next to what a reviewer actually sees.
//!
//! cargo run --example simulate_stratum -- [seed]

use tiered_review::{generate_stratum, RngStream, StratumParams};

fn main() -> tiered_review::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let params = StratumParams::new(vec![10.0, 5.0, 2.5, 18.0], vec![0.3, 0.5, 0.95])?;
    let (latent, observed) = generate_stratum(&params, 1.0, &mut RngStream::new(seed))?;

    println!("latent x_ts (row t = label, column s = escalation set)");
    for (t, row) in latent.rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>4}")).collect();
        println!("  t={t} {}", cells.join(""));
    }
    println!("escalated e_t: {:?}", observed.e);
    println!("reviewed  n_t: {:?}", observed.n);
    println!(
        "true positives {} of which {} confirmed",
        latent.true_positives(),
        observed.e_last()
    );
    if let Some(t) = observed.terminated_at() {
        println!("review stopped before tier {t}");
    }
    Ok(())
}
