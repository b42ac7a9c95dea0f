//! Coverage of the three intervals as tier-1 review progresses, for the
//! common (θ = 58) or rare (θ = 11) fixed scenario.
//!
//! cargo run --release --example coverage_sweep -- [common|rare] [reps]

use tiered_review::study::{run_sweep, ScenarioSource, StudySpec};

fn main() -> tiered_review::Result<()> {
    let mut args = std::env::args().skip(1);
    let source: ScenarioSource = args.next().as_deref().unwrap_or("rare").parse()?;
    let reps = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);

    let spec = StudySpec {
        pi1_grid: vec![0.1, 0.25, 0.5, 0.75, 1.0],
        replications: reps,
        bootstrap_reps: 500,
        master_seed: 42,
        ..StudySpec::new(source)
    };
    let rows = run_sweep(&spec)?;

    println!(
        "{:>5} {:>11} {:>9} {:>9} {:>9} {:>9}",
        "pi1", "method", "coverage", "lo_miss", "hi_miss", "width"
    );
    for r in &rows {
        println!(
            "{:>5.2} {:>11} {:>9.3} {:>9.3} {:>9.3} {:>9.2}",
            r.pi1,
            r.method.name(),
            r.coverage(),
            r.lower_miss(),
            r.upper_miss(),
            r.mean_width
        );
    }
    Ok(())
}
