//! Monte Carlo coverage studies.
//!
//! Three scenario sources: two fixed five-stratum, three-tier scenarios
//! swept over a grid of tier-1 sampling rates, and a generator of random
//! scenarios. Each cell runs `replications` independent
//! generate → estimate → interval cycles per method and tallies coverage,
//! one-sided misses and mean width.
//!
//! Stream layout under `root = RngStream::new(master_seed)`:
//!
//! | path | use |
//! |------|-----|
//! | `s, 0` | random scenario parameters (comprehensive only) |
//! | `s, 1, g, r, 0` | data generation for replication `r` at grid point `g` |
//! | `s, 1, g, r, 1` | bootstrap resampling for the same replication |
//!
//! Fixed studies use `s = 0`; the comprehensive study uses `g = 0`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::ci::{interval, DEFAULT_BOOTSTRAP_REPS, MIN_BOOTSTRAP_REPS};
use crate::dist::{quantile_sorted, sample_exponential, sample_uniform};
use crate::error::{invalid_param, Error, Result};
use crate::estimator::estimate_unchecked;
use crate::generator::generate_dataset;
use crate::model::{check_level, CiMethod, IntervalResult, Scenario, StratumParams};
use crate::rng::RngStream;

const COMMON_LAMBDAS: [[f64; 4]; 5] = [
    [10.0, 5.0, 2.5, 18.0],
    [20.0, 15.0, 25.0, 10.0],
    [20.0, 30.0, 8.0, 5.0],
    [5.0, 6.0, 25.0, 10.0],
    [30.0, 12.0, 4.0, 15.0],
];

const RARE_TP_RATES: [f64; 5] = [4.0, 2.0, 1.0, 2.0, 2.0];

/// Tier-2 and tier-3 sampling rates per stratum.
const LATER_TIER_PIS: [[f64; 2]; 5] = [
    [0.5, 0.95],
    [0.6, 0.96],
    [0.7, 0.97],
    [0.8, 0.98],
    [0.9, 0.99],
];

fn fixed_scenario(lambdas: [[f64; 4]; 5], pi1: f64) -> Result<Scenario> {
    let strata = lambdas
        .iter()
        .zip(LATER_TIER_PIS)
        .map(|(l, [p2, p3])| StratumParams::new(l.to_vec(), vec![pi1, p2, p3]))
        .collect::<Result<Vec<_>>>()?;
    Scenario::new(1.0, strata)
}

/// Common-events scenario (`θ = 58`) at tier-1 sampling rate `pi1`.
pub fn scenario_common(pi1: f64) -> Result<Scenario> {
    fixed_scenario(COMMON_LAMBDAS, pi1)
}

/// Rare-events scenario (`θ = 11`): the common scenario with smaller
/// true-positive rates.
pub fn scenario_rare(pi1: f64) -> Result<Scenario> {
    let mut lambdas = COMMON_LAMBDAS;
    for (row, tp) in lambdas.iter_mut().zip(RARE_TP_RATES) {
        row[3] = tp;
    }
    fixed_scenario(lambdas, pi1)
}

/// Random five-stratum, three-tier scenario at unit mileage.
///
/// Per stratum: `μ_t ~ U(1, 4)` and `λ_t ~ Exp(mean μ_t)` for `t = 0..3`,
/// then `π_1 ~ U(0, 1]` and `π_t ~ U(π_{t-1}, 1]`. Intervals are open at
/// the bottom so every sampling rate is positive.
pub fn scenario_comprehensive(rng: &mut RngStream) -> Result<Scenario> {
    const STRATA: usize = 5;
    const TIERS: usize = 3;
    let mut strata = Vec::with_capacity(STRATA);
    for _ in 0..STRATA {
        let mut lambdas = Vec::with_capacity(TIERS + 1);
        for _ in 0..=TIERS {
            let mu = sample_uniform(1.0, 4.0, rng)?;
            lambdas.push(sample_exponential(mu, rng)?);
        }
        let mut pis = Vec::with_capacity(TIERS);
        let mut floor = 0.0;
        for _ in 0..TIERS {
            let pi = floor + (1.0 - floor) * (1.0 - rng.uniform());
            pis.push(pi);
            floor = pi;
        }
        strata.push(StratumParams::new(lambdas, pis)?);
    }
    Scenario::new(1.0, strata)
}

/// Which scenarios a study runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSource {
    Common,
    Rare,
    Comprehensive,
}

impl ScenarioSource {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioSource::Common => "common",
            ScenarioSource::Rare => "rare",
            ScenarioSource::Comprehensive => "comprehensive",
        }
    }
}

impl std::str::FromStr for ScenarioSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "common" => Ok(ScenarioSource::Common),
            "rare" => Ok(ScenarioSource::Rare),
            "comprehensive" => Ok(ScenarioSource::Comprehensive),
            other => Err(invalid_param(format!("unknown study '{other}'"))),
        }
    }
}

/// `0.1, 0.2, …, 1.0`.
pub fn default_pi1_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub source: ScenarioSource,
    /// Ignored by the comprehensive study, whose scenarios carry their own
    /// sampling rates.
    pub pi1_grid: Vec<f64>,
    pub replications: usize,
    pub level: f64,
    pub methods: Vec<CiMethod>,
    pub bootstrap_reps: usize,
    /// Comprehensive study only.
    pub num_scenarios: usize,
    pub master_seed: u64,
}

impl StudySpec {
    pub fn new(source: ScenarioSource) -> Self {
        StudySpec {
            source,
            pi1_grid: default_pi1_grid(),
            replications: 1000,
            level: 0.9,
            methods: CiMethod::ALL.to_vec(),
            bootstrap_reps: DEFAULT_BOOTSTRAP_REPS,
            num_scenarios: 100_000,
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_level(self.level)?;
        if self.replications == 0 {
            return Err(invalid_param("replications must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(invalid_param("no interval methods selected"));
        }
        if self.methods.contains(&CiMethod::Bootstrap) && self.bootstrap_reps < MIN_BOOTSTRAP_REPS {
            return Err(invalid_param(format!(
                "bootstrap needs at least {MIN_BOOTSTRAP_REPS} replicates, got {}",
                self.bootstrap_reps
            )));
        }
        match self.source {
            ScenarioSource::Comprehensive => {
                if self.num_scenarios == 0 {
                    return Err(invalid_param("num_scenarios must be at least 1"));
                }
            }
            _ => {
                if self.pi1_grid.is_empty() {
                    return Err(invalid_param("empty pi1 grid"));
                }
                if let Some(p) = self.pi1_grid.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
                    return Err(invalid_param(format!("grid value {p} outside (0, 1]")));
                }
            }
        }
        Ok(())
    }
}

/// Coverage tally for one (scenario, grid point, method) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub scenario_id: usize,
    /// Grid value for fixed studies; mean tier-1 rate across strata for
    /// random scenarios.
    pub pi1: f64,
    /// `Σ_h λ_hT Π_t π_ht` at the sampling rates actually used.
    pub expected_tp: f64,
    pub method: CiMethod,
    pub level: f64,
    pub reps: u64,
    pub covered: u64,
    pub lower_misses: u64,
    pub upper_misses: u64,
    pub mean_width: f64,
}

impl CoverageRow {
    pub fn coverage(&self) -> f64 {
        self.covered as f64 / self.reps as f64
    }

    /// Fraction of replications with `θ < lower`.
    pub fn lower_miss(&self) -> f64 {
        self.lower_misses as f64 / self.reps as f64
    }

    /// Fraction of replications with `θ > upper`.
    pub fn upper_miss(&self) -> f64 {
        self.upper_misses as f64 / self.reps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Covered,
    LowerMiss,
    UpperMiss,
}

fn classify(ci: &IntervalResult, theta: f64) -> Outcome {
    if theta < ci.lower {
        Outcome::LowerMiss
    } else if theta > ci.upper {
        Outcome::UpperMiss
    } else {
        Outcome::Covered
    }
}

struct Cell<'a> {
    scenario: &'a Scenario,
    methods: &'a [CiMethod],
    level: f64,
    bootstrap_reps: usize,
    replications: usize,
}

impl Cell<'_> {
    fn replicate(&self, theta: f64, rng: &RngStream) -> Result<Vec<(Outcome, f64)>> {
        let (_, data) = generate_dataset(self.scenario, &rng.child(0))?;
        let estimate = estimate_unchecked(&data);
        let boot = rng.child(1);
        self.methods
            .iter()
            .map(|&m| {
                let ci = interval(m, &data, &estimate, self.level, self.bootstrap_reps, &boot)?;
                Ok((classify(&ci, theta), ci.width()))
            })
            .collect()
    }

    /// Runs every replication on `base.child(r)` and reduces in index order.
    fn run(&self, base: &RngStream, scenario_id: usize, pi1: f64) -> Result<Vec<CoverageRow>> {
        let theta = self.scenario.theta();
        let outcomes = (0..self.replications as u64)
            .into_par_iter()
            .map(|r| self.replicate(theta, &base.child(r)))
            .collect::<Result<Vec<_>>>()?;

        let expected_tp = self.scenario.expected_observed_tp();
        let rows = self
            .methods
            .iter()
            .enumerate()
            .map(|(k, &method)| {
                let mut row = CoverageRow {
                    scenario_id,
                    pi1,
                    expected_tp,
                    method,
                    level: self.level,
                    reps: self.replications as u64,
                    covered: 0,
                    lower_misses: 0,
                    upper_misses: 0,
                    mean_width: 0.0,
                };
                let mut width = 0.0;
                for rep in &outcomes {
                    let (outcome, w) = rep[k];
                    match outcome {
                        Outcome::Covered => row.covered += 1,
                        Outcome::LowerMiss => row.lower_misses += 1,
                        Outcome::UpperMiss => row.upper_misses += 1,
                    }
                    width += w;
                }
                row.mean_width = width / self.replications as f64;
                row
            })
            .collect();
        Ok(rows)
    }
}

/// Runs a study. Rows are ordered by scenario, grid point, then method in
/// the order given by the spec; the output is independent of thread count.
pub fn run_sweep(spec: &StudySpec) -> Result<Vec<CoverageRow>> {
    spec.validate()?;
    let root = RngStream::new(spec.master_seed);
    fn cell<'a>(spec: &'a StudySpec, scenario: &'a Scenario) -> Cell<'a> {
        Cell {
            scenario,
            methods: &spec.methods,
            level: spec.level,
            bootstrap_reps: spec.bootstrap_reps,
            replications: spec.replications,
        }
    }

    match spec.source {
        ScenarioSource::Common | ScenarioSource::Rare => {
            let reps_root = root.child(0).child(1);
            let mut rows = Vec::new();
            for (g, &pi1) in spec.pi1_grid.iter().enumerate() {
                let scenario = match spec.source {
                    ScenarioSource::Common => scenario_common(pi1)?,
                    _ => scenario_rare(pi1)?,
                };
                rows.extend(cell(spec, &scenario).run(&reps_root.child(g as u64), 0, pi1)?);
            }
            Ok(rows)
        }
        ScenarioSource::Comprehensive => {
            let per_scenario = (0..spec.num_scenarios)
                .into_par_iter()
                .map(|s| {
                    let stream = root.child(s as u64);
                    let scenario = scenario_comprehensive(&mut stream.child(0))?;
                    let pi1 = scenario.strata().iter().map(|p| p.pis()[0]).sum::<f64>()
                        / scenario.strata().len() as f64;
                    cell(spec, &scenario).run(&stream.child(1).child(0), s, pi1)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(per_scenario.into_iter().flatten().collect())
        }
    }
}

#[derive(Serialize)]
struct CsvRow {
    scenario_id: usize,
    pi1: f64,
    expected_tp: f64,
    method: &'static str,
    level: f64,
    reps: u64,
    coverage: f64,
    lower_miss: f64,
    upper_miss: f64,
    mean_width: f64,
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

/// Long-format CSV, one line per row.
pub fn write_rows_csv<W: Write>(rows: &[CoverageRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(CsvRow {
            scenario_id: r.scenario_id,
            pi1: r.pi1,
            expected_tp: r.expected_tp,
            method: r.method.name(),
            level: r.level,
            reps: r.reps,
            coverage: r.coverage(),
            lower_miss: r.lower_miss(),
            upper_miss: r.upper_miss(),
            mean_width: r.mean_width,
        })
        .map_err(csv_error)?;
    }
    if rows.is_empty() {
        w.write_record([
            "scenario_id",
            "pi1",
            "expected_tp",
            "method",
            "level",
            "reps",
            "coverage",
            "lower_miss",
            "upper_miss",
            "mean_width",
        ])
        .map_err(csv_error)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

/// `min, p25, median, p75, max` (type-7 quantiles).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiveNumber {
    pub min: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() || values.iter().any(|v| v.is_nan()) {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(FiveNumber {
            min: v[0],
            p25: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            p75: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Distribution of per-scenario results for one method inside the window
/// `[center - window, center + window]` of expected observed true
/// positives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSummary {
    pub center: f64,
    pub method: CiMethod,
    pub scenarios: usize,
    /// Set when no scenario falls in the window; the statistics are then
    /// absent.
    pub skipped: bool,
    pub coverage: Option<FiveNumber>,
    pub lower_miss: Option<FiveNumber>,
    pub upper_miss: Option<FiveNumber>,
    pub width: Option<FiveNumber>,
}

/// Moving-window summary over the integer centers `0, 1, …, ceil(max x)`.
pub fn summarize_comprehensive(rows: &[CoverageRow], window: f64) -> Result<Vec<WindowSummary>> {
    let top = rows
        .iter()
        .map(|r| r.expected_tp)
        .fold(0.0, f64::max)
        .ceil();
    let centers: Vec<f64> = (0..=top as usize).map(|c| c as f64).collect();
    summarize_on_grid(rows, window, &centers)
}

/// Moving-window summary at caller-chosen centers. Output is ordered by
/// center, then by method in order of first appearance in `rows`.
pub fn summarize_on_grid(
    rows: &[CoverageRow],
    window: f64,
    centers: &[f64],
) -> Result<Vec<WindowSummary>> {
    if !(window >= 0.0 && window.is_finite()) {
        return Err(invalid_param(format!(
            "window must be finite and non-negative, got {window}"
        )));
    }
    let mut methods: Vec<CiMethod> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let mut out = Vec::with_capacity(centers.len() * methods.len());
    for &center in centers {
        for &method in &methods {
            let inside: Vec<&CoverageRow> = rows
                .iter()
                .filter(|r| r.method == method && (r.expected_tp - center).abs() <= window)
                .collect();
            let stat = |f: fn(&CoverageRow) -> f64| {
                FiveNumber::from_values(&inside.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            out.push(WindowSummary {
                center,
                method,
                scenarios: inside.len(),
                skipped: inside.is_empty(),
                coverage: stat(CoverageRow::coverage),
                lower_miss: stat(CoverageRow::lower_miss),
                upper_miss: stat(CoverageRow::upper_miss),
                width: stat(|r| r.mean_width),
            });
        }
    }
    Ok(out)
}

/// One line per (center, method); statistics columns are empty for skipped
/// windows.
pub fn write_summary_csv<W: Write>(summary: &[WindowSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "center".to_string(),
        "method".into(),
        "scenarios".into(),
        "skipped".into(),
    ];
    for stat in ["coverage", "lower_miss", "upper_miss", "width"] {
        for q in ["min", "p25", "median", "p75", "max"] {
            header.push(format!("{stat}_{q}"));
        }
    }
    w.write_record(&header).map_err(csv_error)?;
    for s in summary {
        let mut record = vec![
            s.center.to_string(),
            s.method.name().to_string(),
            s.scenarios.to_string(),
            s.skipped.to_string(),
        ];
        for stat in [&s.coverage, &s.lower_miss, &s.upper_miss, &s.width] {
            match stat {
                Some(f) => record.extend(
                    [f.min, f.p25, f.median, f.p75, f.max]
                        .iter()
                        .map(|v| v.to_string()),
                ),
                None => record.extend(std::iter::repeat_n(String::new(), 5)),
            }
        }
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(source: ScenarioSource) -> StudySpec {
        StudySpec {
            pi1_grid: vec![0.3, 1.0],
            replications: 20,
            methods: vec![CiMethod::Wald, CiMethod::GammaWsip],
            num_scenarios: 4,
            master_seed: 17,
            ..StudySpec::new(source)
        }
    }

    #[test]
    fn common_scenario_values() {
        let s = scenario_common(0.5).unwrap();
        assert_eq!(s.theta(), 58.0);
        assert_eq!(s.strata()[2].lambdas(), &[20.0, 30.0, 8.0, 5.0]);
        assert_eq!(s.strata()[4].pis(), &[0.5, 0.9, 0.99]);
        assert_eq!((s.mileage(), s.tiers(), s.strata().len()), (1.0, 3, 5));
    }

    #[test]
    fn rare_scenario_values() {
        let rare = scenario_rare(0.5).unwrap();
        let common = scenario_common(0.5).unwrap();
        assert_eq!(rare.theta(), 11.0);
        assert_eq!(rare.strata()[0].lambdas(), &[10.0, 5.0, 2.5, 4.0]);
        for (r, c) in rare.strata().iter().zip(common.strata()) {
            assert_eq!(r.lambdas()[..3], c.lambdas()[..3]);
            assert_eq!(r.pis(), c.pis());
        }
    }

    #[test]
    fn comprehensive_scenarios() {
        let root = RngStream::new(5);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0.0;
        for s in 0..n {
            let scenario = scenario_comprehensive(&mut root.child(s)).unwrap();
            assert_eq!((scenario.tiers(), scenario.strata().len()), (3, 5));
            for p in scenario.strata() {
                assert!(p.pis().windows(2).all(|w| w[0] <= w[1]), "{:?}", p.pis());
                assert!(p.pis().iter().all(|&x| x > 0.0 && x <= 1.0));
                for &l in p.lambdas() {
                    assert!(l > 0.0);
                    sum += l;
                    sum_sq += l * l;
                    count += 1.0;
                }
            }
        }
        let mean = sum / count;
        let sd = (sum_sq / count - mean * mean).sqrt();
        // Draws within a scenario are independent, so the plain SE applies.
        assert!((mean - 2.5).abs() < 3.0 * sd / count.sqrt(), "{mean}");
    }

    #[test]
    fn single_replication_rows() {
        let spec = StudySpec {
            replications: 1,
            ..small_spec(ScenarioSource::Common)
        };
        for row in run_sweep(&spec).unwrap() {
            assert!(row.coverage() == 0.0 || row.coverage() == 1.0);
            assert_eq!(row.covered + row.lower_misses + row.upper_misses, row.reps);
        }
    }

    #[test]
    fn row_order_and_accounting() {
        let spec = small_spec(ScenarioSource::Rare);
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        let keys: Vec<_> = rows.iter().map(|r| (r.pi1, r.method)).collect();
        assert_eq!(
            keys,
            [
                (0.3, CiMethod::Wald),
                (0.3, CiMethod::GammaWsip),
                (1.0, CiMethod::Wald),
                (1.0, CiMethod::GammaWsip)
            ]
        );
        for r in &rows {
            assert_eq!(r.covered + r.lower_misses + r.upper_misses, r.reps);
            assert!((r.coverage() + r.lower_miss() + r.upper_miss() - 1.0).abs() < 1e-12);
            assert!(r.mean_width >= 0.0);
        }
        assert!(
            (rows[3].expected_tp - scenario_rare(1.0).unwrap().expected_observed_tp()).abs()
                < 1e-12
        );
    }

    #[test]
    fn comprehensive_rows_group_by_scenario() {
        let rows = run_sweep(&small_spec(ScenarioSource::Comprehensive)).unwrap();
        assert_eq!(rows.len(), 8);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.scenario_id, i / 2);
        }
    }

    #[test]
    fn adding_a_method_keeps_other_results() {
        let base = small_spec(ScenarioSource::Common);
        let mut more = base.clone();
        more.methods = vec![CiMethod::Wald, CiMethod::Bootstrap, CiMethod::GammaWsip];
        more.bootstrap_reps = 100;
        more.replications = 5;
        let less = StudySpec {
            replications: 5,
            ..base
        };
        let a = run_sweep(&less).unwrap();
        let b = run_sweep(&more).unwrap();
        let b: Vec<_> = b
            .into_iter()
            .filter(|r| r.method != CiMethod::Bootstrap)
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_is_deterministic_across_thread_counts() {
        let spec = small_spec(ScenarioSource::Comprehensive);
        let render = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let rows = pool.install(|| run_sweep(&spec).unwrap());
            let mut buf = Vec::new();
            write_rows_csv(&rows, &mut buf).unwrap();
            buf
        };
        let one = render(1);
        assert_eq!(one, render(4));
        let text = String::from_utf8(one).unwrap();
        assert!(text.starts_with(
            "scenario_id,pi1,expected_tp,method,level,reps,coverage,lower_miss,upper_miss,mean_width\n"
        ));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn empty_csv_has_header() {
        let mut buf = Vec::new();
        write_rows_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn invalid_specs() {
        let ok = small_spec(ScenarioSource::Common);
        assert!(ok.validate().is_ok());
        for bad in [
            StudySpec {
                replications: 0,
                ..ok.clone()
            },
            StudySpec {
                level: 1.0,
                ..ok.clone()
            },
            StudySpec {
                pi1_grid: vec![0.0],
                ..ok.clone()
            },
            StudySpec {
                pi1_grid: vec![1.1],
                ..ok.clone()
            },
            StudySpec {
                pi1_grid: vec![],
                ..ok.clone()
            },
            StudySpec {
                methods: vec![],
                ..ok.clone()
            },
            StudySpec {
                methods: vec![CiMethod::Bootstrap],
                bootstrap_reps: 50,
                ..ok.clone()
            },
            StudySpec {
                source: ScenarioSource::Comprehensive,
                num_scenarios: 0,
                ..ok.clone()
            },
        ] {
            assert!(run_sweep(&bad).is_err(), "{bad:?}");
        }
        assert!("weird".parse::<ScenarioSource>().is_err());
        assert_eq!(
            "rare".parse::<ScenarioSource>().unwrap(),
            ScenarioSource::Rare
        );
    }

    fn row(x: f64, method: CiMethod, covered: u64) -> CoverageRow {
        CoverageRow {
            scenario_id: 0,
            pi1: 0.5,
            expected_tp: x,
            method,
            level: 0.9,
            reps: 10,
            covered,
            lower_misses: 10 - covered,
            upper_misses: 0,
            mean_width: x,
        }
    }

    #[test]
    fn single_row_window_is_degenerate() {
        let rows = [row(3.2, CiMethod::Wald, 7)];
        let s = summarize_on_grid(&rows, 1.0, &[3.0]).unwrap();
        let c = s[0].coverage.unwrap();
        assert_eq!([c.min, c.p25, c.median, c.p75, c.max], [0.7; 5]);
        assert_eq!(s[0].scenarios, 1);
    }

    #[test]
    fn window_boundaries_are_closed() {
        let rows = [
            row(1.0, CiMethod::Wald, 5),
            row(3.0, CiMethod::Wald, 6),
            row(3.5, CiMethod::Wald, 9),
        ];
        let s = summarize_on_grid(&rows, 1.0, &[2.0, 10.0]).unwrap();
        assert_eq!(s[0].scenarios, 2);
        assert!(!s[0].skipped);
        assert!(s[1].skipped);
        assert_eq!(s[1].coverage, None);
    }

    #[test]
    fn five_numbers_are_ordered() {
        let rows: Vec<_> = (0..37)
            .map(|i| {
                row(
                    (i % 7) as f64 * 0.5,
                    if i % 2 == 0 {
                        CiMethod::Wald
                    } else {
                        CiMethod::GammaWsip
                    },
                    (i * 7 % 11) as u64 % 11,
                )
            })
            .map(|mut r| {
                r.covered = r.covered.min(10);
                r.lower_misses = 10 - r.covered;
                r
            })
            .collect();
        for s in summarize_comprehensive(&rows, 1.0).unwrap() {
            for f in [s.coverage, s.lower_miss, s.upper_miss, s.width]
                .into_iter()
                .flatten()
            {
                assert!(f.min <= f.p25 && f.p25 <= f.median && f.median <= f.p75 && f.p75 <= f.max);
            }
        }
        assert!(summarize_on_grid(&rows, -1.0, &[0.0]).is_err());
    }

    #[test]
    fn summary_csv_shape() {
        let rows = [row(1.0, CiMethod::Wald, 5)];
        let s = summarize_on_grid(&rows, 1.0, &[1.0, 5.0]).unwrap();
        let mut buf = Vec::new();
        write_summary_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0].split(',').count(), 24);
        assert!(lines[2].ends_with(",,,,"));
    }
}
