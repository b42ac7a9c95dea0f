//! Command-line front end: `generate`, `estimate` and `study`.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid or unreadable input,
//! 3 internal failure (including output that could not be written).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ci::{interval, DEFAULT_BOOTSTRAP_REPS, MIN_BOOTSTRAP_REPS};
use crate::estimator::estimate_theta;
use crate::generator::generate_dataset;
use crate::model::{CiMethod, Dataset, IntervalResult, LatentTable, RateEstimate, Scenario};
use crate::rng::RngStream;
use crate::study::{
    run_sweep, summarize_comprehensive, write_rows_csv, write_summary_csv, ScenarioSource,
    StudySpec,
};

/// Environment variable consulted for `--seed` when the flag is absent.
pub const SEED_ENV: &str = "TIERED_REVIEW_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tiered-review",
    version,
    about = "Event-rate estimation under partial tiered review"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a dataset from a scenario file.
    Generate {
        scenario: PathBuf,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        /// Dataset output path.
        #[arg(long)]
        out: PathBuf,
        /// Also write the latent label tables here.
        #[arg(long)]
        latent: Option<PathBuf>,
    },
    /// Point estimate and confidence intervals for a dataset file.
    Estimate {
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = CiChoice::All)]
        ci: CiChoice,
        #[arg(long, default_value_t = 0.9, value_parser = parse_level)]
        level: f64,
        /// Bootstrap replicates.
        #[arg(long = "B", default_value_t = DEFAULT_BOOTSTRAP_REPS, value_parser = parse_bootstrap_reps)]
        bootstrap_reps: usize,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        /// Also write the report as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Coverage study; writes one CSV line per (scenario, grid point, method).
    Study {
        #[arg(long, value_enum)]
        study: StudyChoice,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        reps: u64,
        /// Comma-separated tier-1 sampling rates.
        #[arg(long, value_delimiter = ',', value_parser = parse_grid_value)]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        num_scenarios: u64,
        /// Comma-separated subset of bootstrap, wald, gamma.
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "bootstrap,wald,gamma"
        )]
        methods: Vec<MethodChoice>,
        #[arg(long = "B", default_value_t = DEFAULT_BOOTSTRAP_REPS, value_parser = parse_bootstrap_reps)]
        bootstrap_reps: usize,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.9, value_parser = parse_level)]
        level: f64,
        /// CSV output path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Moving-window summary CSV (comprehensive study only).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Half-width of the summary window in expected observed true positives.
        #[arg(long, default_value_t = 1.0)]
        window: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CiChoice {
    Bootstrap,
    Wald,
    Gamma,
    All,
}

impl CiChoice {
    fn methods(self) -> Vec<CiMethod> {
        match self {
            CiChoice::Bootstrap => vec![CiMethod::Bootstrap],
            CiChoice::Wald => vec![CiMethod::Wald],
            CiChoice::Gamma => vec![CiMethod::GammaWsip],
            CiChoice::All => CiMethod::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodChoice {
    Bootstrap,
    Wald,
    Gamma,
}

impl From<MethodChoice> for CiMethod {
    fn from(m: MethodChoice) -> Self {
        match m {
            MethodChoice::Bootstrap => CiMethod::Bootstrap,
            MethodChoice::Wald => CiMethod::Wald,
            MethodChoice::Gamma => CiMethod::GammaWsip,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StudyChoice {
    Common,
    Rare,
    Comprehensive,
}

impl From<StudyChoice> for ScenarioSource {
    fn from(s: StudyChoice) -> Self {
        match s {
            StudyChoice::Common => ScenarioSource::Common,
            StudyChoice::Rare => ScenarioSource::Rare,
            StudyChoice::Comprehensive => ScenarioSource::Comprehensive,
        }
    }
}

fn parse_level(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("level must lie in (0, 1), got {v}"))
    }
}

fn parse_grid_value(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("grid values must lie in (0, 1], got {v}"))
    }
}

fn parse_bootstrap_reps(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v >= MIN_BOOTSTRAP_REPS {
        Ok(v)
    } else {
        Err(format!(
            "need at least {MIN_BOOTSTRAP_REPS} bootstrap replicates, got {v}"
        ))
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Input(_) => EXIT_INPUT,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Internal(m) => m,
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    // serde_json reports line and column for both syntax and validation errors.
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Writes via a temporary file in the destination directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let internal = |e: std::io::Error| Failure::Internal(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(internal)?;
    tmp.write_all(bytes).map_err(internal)?;
    tmp.as_file().sync_all().map_err(internal)?;
    tmp.persist(path).map_err(|e| internal(e.error))?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn cmd_generate(
    scenario: &Path,
    seed: u64,
    out: &Path,
    latent: Option<&Path>,
) -> Result<String, Failure> {
    let scenario: Scenario = read_json(scenario)?;
    let (tables, dataset) = generate_dataset(&scenario, &RngStream::new(seed))
        .map_err(|e| Failure::Internal(e.to_string()))?;
    write_atomic(out, &to_json(&dataset)?)?;
    if let Some(path) = latent {
        #[derive(Serialize)]
        struct LatentFile<'a> {
            strata: &'a [LatentTable],
        }
        write_atomic(path, &to_json(&LatentFile { strata: &tables })?)?;
    }
    Ok(format!(
        "wrote {} strata to {}\n",
        dataset.strata().len(),
        out.display()
    ))
}

#[derive(Serialize)]
struct EstimateReport<'a> {
    estimate: &'a RateEstimate,
    intervals: &'a [IntervalResult],
}

fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", items.join(", "))
}

fn render_estimate(dataset: &Dataset, est: &RateEstimate, intervals: &[IntervalResult]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "strata {}  tiers {}  mileage {}",
        dataset.strata().len(),
        dataset.tiers(),
        dataset.mileage()
    );
    let _ = writeln!(s, "theta_hat {:.6}", est.theta_hat);
    for (h, st) in est.strata.iter().enumerate() {
        let _ = writeln!(s, "stratum {h}");
        let _ = writeln!(s, "  cumulative {}", fmt_vec(&st.cumulative_rates));
        let _ = writeln!(s, "  rates      {}", fmt_vec(&st.rates));
        let _ = writeln!(s, "  sampling   {}", fmt_vec(&st.sampling_rates));
        let _ = writeln!(s, "  weight     {:.6}", st.weight);
    }
    for ci in intervals {
        let _ = writeln!(
            s,
            "{:<10} {:.3}  [{:.6}, {:.6}]",
            ci.method.name(),
            ci.level,
            ci.lower,
            ci.upper
        );
    }
    s
}

fn cmd_estimate(
    path: &Path,
    methods: &[CiMethod],
    level: f64,
    bootstrap_reps: usize,
    seed: u64,
    json: Option<&Path>,
) -> Result<String, Failure> {
    let dataset: Dataset = read_json(path)?;
    let est = estimate_theta(&dataset).map_err(|e| Failure::Input(e.to_string()))?;
    let rng = RngStream::new(seed);
    let intervals = methods
        .iter()
        .map(|&m| interval(m, &dataset, &est, level, bootstrap_reps, &rng))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(|e| Failure::Internal(e.to_string()))?;
    if let Some(p) = json {
        write_atomic(
            p,
            &to_json(&EstimateReport {
                estimate: &est,
                intervals: &intervals,
            })?,
        )?;
    }
    Ok(render_estimate(&dataset, &est, &intervals))
}

fn cmd_study(
    spec: StudySpec,
    out: Option<&Path>,
    summary: Option<(&Path, f64)>,
) -> Result<String, Failure> {
    if summary.is_some() && spec.source != ScenarioSource::Comprehensive {
        return Err(Failure::Usage(
            "--summary requires --study comprehensive".into(),
        ));
    }
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let rows = run_sweep(&spec).map_err(|e| Failure::Internal(e.to_string()))?;
    let mut csv = Vec::new();
    write_rows_csv(&rows, &mut csv).map_err(|e| Failure::Internal(e.to_string()))?;
    if let Some((path, window)) = summary {
        let table =
            summarize_comprehensive(&rows, window).map_err(|e| Failure::Usage(e.to_string()))?;
        let mut buf = Vec::new();
        write_summary_csv(&table, &mut buf).map_err(|e| Failure::Internal(e.to_string()))?;
        write_atomic(path, &buf)?;
    }
    match out {
        Some(path) => {
            write_atomic(path, &csv)?;
            Ok(format!("wrote {} rows to {}\n", rows.len(), path.display()))
        }
        None => String::from_utf8(csv).map_err(|e| Failure::Internal(e.to_string())),
    }
}

fn dispatch(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Generate {
            scenario,
            seed,
            out,
            latent,
        } => cmd_generate(&scenario, seed, &out, latent.as_deref()),
        Command::Estimate {
            dataset,
            ci,
            level,
            bootstrap_reps,
            seed,
            json,
        } => cmd_estimate(
            &dataset,
            &ci.methods(),
            level,
            bootstrap_reps,
            seed,
            json.as_deref(),
        ),
        Command::Study {
            study,
            reps,
            grid,
            num_scenarios,
            methods,
            bootstrap_reps,
            seed,
            level,
            out,
            summary,
            window,
        } => {
            let mut chosen: Vec<CiMethod> = Vec::new();
            for m in methods {
                let m = CiMethod::from(m);
                if !chosen.contains(&m) {
                    chosen.push(m);
                }
            }
            let mut spec = StudySpec::new(study.into());
            if let Some(g) = grid {
                spec.pi1_grid = g;
            }
            spec.replications = reps as usize;
            spec.num_scenarios = num_scenarios as usize;
            spec.methods = chosen;
            spec.bootstrap_reps = bootstrap_reps;
            spec.master_seed = seed;
            spec.level = level;
            cmd_study(
                spec,
                out.as_deref(),
                summary.as_deref().map(|p| (p, window)),
            )
        }
    }
}

/// Parses `args` (program name first), runs the command, writes normal output
/// to `stdout` and diagnostics to `stderr`, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli) {
        Ok(text) => match stdout.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(_) => EXIT_INTERNAL,
        },
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}
