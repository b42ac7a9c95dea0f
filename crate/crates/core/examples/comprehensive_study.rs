//! Random scenarios, then a moving-window summary of per-scenario coverage
//! against the expected number of observed true positives.
//!
//! cargo run --release --example comprehensive_study -- [scenarios] [reps]

use tiered_review::study::{run_sweep, summarize_comprehensive, ScenarioSource, StudySpec};
use tiered_review::CiMethod;

fn main() -> tiered_review::Result<()> {
    let mut args = std::env::args().skip(1);
    let scenarios = args.next().and_then(|s| s.parse().ok()).unwrap_or(300);
    let reps = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);

    let spec = StudySpec {
        methods: vec![CiMethod::Wald, CiMethod::GammaWsip],
        num_scenarios: scenarios,
        replications: reps,
        master_seed: 9,
        ..StudySpec::new(ScenarioSource::Comprehensive)
    };
    let rows = run_sweep(&spec)?;
    let summary = summarize_comprehensive(&rows, 1.0)?;

    println!(
        "{:>4} {:>11} {:>5}   coverage min / median / max   upper-miss median",
        "x", "method", "n"
    );
    for w in summary.iter().filter(|w| !w.skipped) {
        let c = w.coverage.expect("non-empty window");
        let u = w.upper_miss.expect("non-empty window");
        println!(
            "{:>4} {:>11} {:>5}   {:.3} / {:.3} / {:.3}           {:.3}",
            w.center,
            w.method.name(),
            w.scenarios,
            c.min,
            c.median,
            c.max,
            u.median
        );
    }
    Ok(())
}
