//! Domain types for partial tiered review: configurations, per-stratum
//! parameters, latent label tables, observed counts, estimates and
//! intervals.
//!
//! Tiers are numbered `1..=T`. Rates are indexed `0..=T`: rate `t < T`
//! belongs to candidates that tier `t + 1` would reject, rate `T` to true
//! positives.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, invalid_param, Error, Result};

/// Mileage, stratum count and tier count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReviewConfig {
    pub mileage: f64,
    pub strata: usize,
    pub tiers: usize,
}

impl ReviewConfig {
    pub fn new(mileage: f64, strata: usize, tiers: usize) -> Result<Self> {
        check_mileage(mileage)?;
        if strata == 0 {
            return Err(invalid_param("stratum count must be at least 1"));
        }
        if tiers == 0 {
            return Err(invalid_param("tier count must be at least 1"));
        }
        Ok(ReviewConfig {
            mileage,
            strata,
            tiers,
        })
    }
}

pub(crate) fn check_mileage(m: f64) -> Result<()> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(invalid_param(format!(
            "mileage must be positive and finite, got {m}"
        )))
    }
}

/// Per-mile Poisson rates `λ_0..λ_T` and tier sampling rates `π_1..π_T`
/// for one stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStratumParams")]
pub struct StratumParams {
    lambdas: Vec<f64>,
    pis: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStratumParams {
    lambdas: Vec<f64>,
    pis: Vec<f64>,
}

impl TryFrom<RawStratumParams> for StratumParams {
    type Error = Error;
    fn try_from(raw: RawStratumParams) -> Result<Self> {
        StratumParams::new(raw.lambdas, raw.pis)
    }
}

impl StratumParams {
    pub fn new(lambdas: Vec<f64>, pis: Vec<f64>) -> Result<Self> {
        if pis.is_empty() {
            return Err(invalid_param("at least one tier sampling rate is required"));
        }
        if lambdas.len() != pis.len() + 1 {
            return Err(invalid_param(format!(
                "expected {} rates for {} tiers, got {}",
                pis.len() + 1,
                pis.len(),
                lambdas.len()
            )));
        }
        if let Some((t, l)) = lambdas
            .iter()
            .enumerate()
            .find(|(_, l)| !(l.is_finite() && **l >= 0.0))
        {
            return Err(invalid_param(format!(
                "rate {t} must be finite and >= 0, got {l}"
            )));
        }
        if let Some((t, p)) = pis
            .iter()
            .enumerate()
            .find(|(_, p)| !(**p > 0.0 && **p <= 1.0))
        {
            return Err(invalid_param(format!(
                "sampling rate for tier {} must lie in (0, 1], got {p}",
                t + 1
            )));
        }
        Ok(StratumParams { lambdas, pis })
    }

    pub fn tiers(&self) -> usize {
        self.pis.len()
    }

    /// `λ_0..λ_T` (per mile).
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `π_1..π_T`; `pis()[t - 1]` is the tier-`t` rate.
    pub fn pis(&self) -> &[f64] {
        &self.pis
    }

    /// True-positive rate `λ_T`.
    pub fn tp_rate(&self) -> f64 {
        self.lambdas[self.tiers()]
    }

    /// `Λ_t = Σ_{s ≥ t} λ_s` for `t = 0..=T`.
    pub fn cumulative_rates(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.lambdas.len()];
        let mut acc = 0.0;
        for t in (0..self.lambdas.len()).rev() {
            acc += self.lambdas[t];
            out[t] = acc;
        }
        out
    }

    /// `Π_t π_t`.
    pub fn sampling_product(&self) -> f64 {
        self.pis.iter().product()
    }

    /// Copy with the tier-1 sampling rate replaced.
    pub fn with_pi1(&self, pi1: f64) -> Result<Self> {
        let mut pis = self.pis.clone();
        pis[0] = pi1;
        StratumParams::new(self.lambdas.clone(), pis)
    }
}

/// Full parameterization of the multi-stratum review process.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    config: ReviewConfig,
    strata: Vec<StratumParams>,
}

impl Scenario {
    pub fn new(mileage: f64, strata: Vec<StratumParams>) -> Result<Self> {
        let tiers = strata
            .first()
            .map(StratumParams::tiers)
            .ok_or_else(|| invalid_param("a scenario needs at least one stratum"))?;
        if let Some(h) = strata.iter().position(|s| s.tiers() != tiers) {
            return Err(invalid_param(format!(
                "stratum {h} has {} tiers, expected {tiers}",
                strata[h].tiers()
            )));
        }
        let config = ReviewConfig::new(mileage, strata.len(), tiers)?;
        Ok(Scenario { config, strata })
    }

    pub fn config(&self) -> ReviewConfig {
        self.config
    }

    pub fn mileage(&self) -> f64 {
        self.config.mileage
    }

    pub fn tiers(&self) -> usize {
        self.config.tiers
    }

    pub fn strata(&self) -> &[StratumParams] {
        &self.strata
    }

    /// Target rate `θ = Σ_h λ_hT`.
    pub fn theta(&self) -> f64 {
        self.strata.iter().map(StratumParams::tp_rate).sum()
    }

    /// Expected number of observed true positives per mile,
    /// `Σ_h λ_hT Π_t π_ht`.
    pub fn expected_observed_tp(&self) -> f64 {
        self.strata
            .iter()
            .map(|s| s.tp_rate() * s.sampling_product())
            .sum()
    }

    /// Copy with every stratum's tier-1 sampling rate set to `pi1`.
    pub fn with_pi1(&self, pi1: f64) -> Result<Self> {
        let strata = self
            .strata
            .iter()
            .map(|s| s.with_pi1(pi1))
            .collect::<Result<Vec<_>>>()?;
        Scenario::new(self.config.mileage, strata)
    }
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    m: f64,
    #[serde(rename = "H")]
    h: usize,
    #[serde(rename = "T")]
    t: usize,
    strata: Vec<StratumParams>,
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScenarioFile {
            m: self.config.mileage,
            h: self.config.strata,
            t: self.config.tiers,
            strata: self.strata.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = ScenarioFile::deserialize(d)?;
        if file.strata.len() != file.h {
            return Err(D::Error::custom(format!(
                "H = {} but {} strata given",
                file.h,
                file.strata.len()
            )));
        }
        if let Some(h) = file.strata.iter().position(|s| s.tiers() != file.t) {
            return Err(D::Error::custom(format!(
                "T = {} but stratum {h} has {} tiers",
                file.t,
                file.strata[h].tiers()
            )));
        }
        Scenario::new(file.m, file.strata).map_err(D::Error::custom)
    }
}

/// Complete-review label counts `x_ts`, `0 ≤ s ≤ t ≤ T`.
///
/// `x_ts` counts, within escalation set `s`, the candidates tier `t + 1`
/// would reject (`t < T`) or the true positives (`t = T`). Column sums give
/// the escalation counts `e_s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatentTable {
    /// Row `t` holds `x_t0..x_tt`.
    x: Vec<Vec<u64>>,
}

impl LatentTable {
    pub fn zeros(tiers: usize) -> Self {
        LatentTable {
            x: (0..=tiers).map(|t| vec![0; t + 1]).collect(),
        }
    }

    pub fn from_rows(x: Vec<Vec<u64>>) -> Result<Self> {
        if x.len() < 2 {
            return Err(invalid_input("latent table needs at least two rows"));
        }
        if let Some(t) = x.iter().enumerate().position(|(t, row)| row.len() != t + 1) {
            return Err(invalid_input(format!(
                "latent row {t} must have {} entries",
                t + 1
            )));
        }
        Ok(LatentTable { x })
    }

    pub fn tiers(&self) -> usize {
        self.x.len() - 1
    }

    pub fn get(&self, t: usize, s: usize) -> u64 {
        self.x[t][s]
    }

    pub(crate) fn set(&mut self, t: usize, s: usize, v: u64) {
        self.x[t][s] = v;
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.x
    }

    /// `e_s = Σ_{t ≥ s} x_ts`.
    pub fn column_sum(&self, s: usize) -> u64 {
        (s..self.x.len()).map(|t| self.x[t][s]).sum()
    }

    /// True-positive count in the full corpus, `x_T0`.
    pub fn true_positives(&self) -> u64 {
        self.x[self.tiers()][0]
    }
}

/// Observable counts for one stratum: escalations `e_0..e_T` and review
/// sample sizes `n_1..n_T` (`n()[t - 1]` is `n_t`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedStratum {
    pub e: Vec<u64>,
    pub n: Vec<u64>,
}

/// First violated constraint of an [`ObservedStratum`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Shape { e_len: usize, n_len: usize },
    TierCount { expected: usize, found: usize },
    EscalationExceedsReview { tier: usize, e: u64, n: u64 },
    ReviewExceedsPool { tier: usize, n: u64, pool: u64 },
    MissingReview { tier: usize, pool: u64 },
    ActivityAfterTermination { tier: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Shape { e_len, n_len } => write!(
                f,
                "shape mismatch: e has {e_len} entries and n has {n_len}; expected len(e) = len(n) + 1 >= 2"
            ),
            Violation::TierCount { expected, found } => {
                write!(f, "expected {expected} tiers, found {found}")
            }
            Violation::EscalationExceedsReview { tier, e, n } => {
                write!(f, "tier {tier}: e_{tier} = {e} exceeds n_{tier} = {n}")
            }
            Violation::ReviewExceedsPool { tier, n, pool } => write!(
                f,
                "tier {tier}: n_{tier} = {n} exceeds e_{} = {pool}",
                tier - 1
            ),
            Violation::MissingReview { tier, pool } => write!(
                f,
                "tier {tier}: e_{} = {pool} candidates escalated but n_{tier} = 0",
                tier - 1
            ),
            Violation::ActivityAfterTermination { tier } => write!(
                f,
                "tier {tier}: nonzero counts after review terminated"
            ),
        }
    }
}

impl ObservedStratum {
    pub fn new(e: Vec<u64>, n: Vec<u64>) -> Result<Self> {
        let s = ObservedStratum { e, n };
        s.validate().map_err(|v| invalid_input(v.to_string()))?;
        Ok(s)
    }

    /// All-zero stratum (no candidates).
    pub fn empty(tiers: usize) -> Self {
        ObservedStratum {
            e: vec![0; tiers + 1],
            n: vec![0; tiers],
        }
    }

    pub fn tiers(&self) -> usize {
        self.n.len()
    }

    /// Confirmed true positives `e_T`.
    pub fn e_last(&self) -> u64 {
        self.e[self.e.len() - 1]
    }

    /// Checks shape, `e_t ≤ n_t ≤ e_{t-1}`, `n_t ≥ 1` whenever `e_{t-1} > 0`,
    /// and all-zero counts after early termination.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let (e, n) = (&self.e, &self.n);
        if n.is_empty() || e.len() != n.len() + 1 {
            return Err(Violation::Shape {
                e_len: e.len(),
                n_len: n.len(),
            });
        }
        let mut terminated = false;
        for tier in 1..=n.len() {
            let pool = e[tier - 1];
            let (nt, et) = (n[tier - 1], e[tier]);
            if terminated || pool == 0 {
                terminated = true;
                if nt != 0 || et != 0 {
                    return Err(Violation::ActivityAfterTermination { tier });
                }
                continue;
            }
            if nt == 0 {
                return Err(Violation::MissingReview { tier, pool });
            }
            if nt > pool {
                return Err(Violation::ReviewExceedsPool { tier, n: nt, pool });
            }
            if et > nt {
                return Err(Violation::EscalationExceedsReview { tier, e: et, n: nt });
            }
        }
        Ok(())
    }

    pub fn validate_tiers(&self, tiers: usize) -> std::result::Result<(), Violation> {
        self.validate()?;
        if self.tiers() != tiers {
            return Err(Violation::TierCount {
                expected: tiers,
                found: self.tiers(),
            });
        }
        Ok(())
    }

    /// Tier at which review stopped (`e_{t-1} = 0`), if it did.
    pub fn terminated_at(&self) -> Option<usize> {
        (1..=self.tiers()).find(|&t| self.e[t - 1] == 0)
    }
}

/// Validation report for one stratum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    pub diagnostic: Option<String>,
}

/// Checks every [`ObservedStratum`] invariant; the diagnostic names the
/// first violated constraint.
pub fn validate_observed(stratum: &ObservedStratum) -> ValidationReport {
    match stratum.validate() {
        Ok(()) => ValidationReport {
            valid: true,
            diagnostic: None,
        },
        Err(v) => ValidationReport {
            valid: false,
            diagnostic: Some(v.to_string()),
        },
    }
}

/// Observed counts for every stratum plus the mileage they cover.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    mileage: f64,
    strata: Vec<ObservedStratum>,
}

impl Dataset {
    pub fn new(mileage: f64, strata: Vec<ObservedStratum>) -> Result<Self> {
        check_mileage(mileage)?;
        let tiers = strata
            .first()
            .map(ObservedStratum::tiers)
            .ok_or_else(|| invalid_input("a dataset needs at least one stratum"))?;
        for (h, s) in strata.iter().enumerate() {
            s.validate_tiers(tiers)
                .map_err(|v| invalid_input(format!("stratum {h}: {v}")))?;
        }
        Ok(Dataset { mileage, strata })
    }

    pub(crate) fn new_unchecked(mileage: f64, strata: Vec<ObservedStratum>) -> Self {
        Dataset { mileage, strata }
    }

    pub fn mileage(&self) -> f64 {
        self.mileage
    }

    pub fn strata(&self) -> &[ObservedStratum] {
        &self.strata
    }

    pub fn tiers(&self) -> usize {
        self.strata[0].tiers()
    }

    pub fn config(&self) -> ReviewConfig {
        ReviewConfig {
            mileage: self.mileage,
            strata: self.strata.len(),
            tiers: self.tiers(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    m: f64,
    strata: Vec<ObservedStratum>,
}

impl Serialize for Dataset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DatasetFile {
            m: self.mileage,
            strata: self.strata.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dataset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = DatasetFile::deserialize(d)?;
        Dataset::new(file.m, file.strata).map_err(D::Error::custom)
    }
}

/// Point estimates for one stratum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumEstimate {
    /// `Λ̂_0..Λ̂_T` per mile.
    pub cumulative_rates: Vec<f64>,
    /// `λ̂_0..λ̂_T` per mile.
    pub rates: Vec<f64>,
    /// `π̂_1..π̂_T`.
    pub sampling_rates: Vec<f64>,
    /// `π̂_h = Π_t π̂_t`.
    pub sampling_product: f64,
    /// `w_h = 1 / (m π̂_h)`.
    pub weight: f64,
    /// `e_T`.
    pub confirmed: u64,
}

impl StratumEstimate {
    pub fn tp_rate(&self) -> f64 {
        *self.rates.last().expect("rates are never empty")
    }
}

/// Point estimates for all strata and the aggregate rate `θ̂ = Σ_h λ̂_hT`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    pub mileage: f64,
    pub strata: Vec<StratumEstimate>,
    pub theta_hat: f64,
}

impl RateEstimate {
    pub fn weights(&self) -> Vec<f64> {
        self.strata.iter().map(|s| s.weight).collect()
    }

    /// `w_M = max_h w_h`.
    pub fn max_weight(&self) -> f64 {
        self.strata.iter().map(|s| s.weight).fold(0.0, f64::max)
    }
}

/// Confidence-interval construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Bootstrap,
    Wald,
    GammaWsip,
}

impl CiMethod {
    pub const ALL: [CiMethod; 3] = [CiMethod::Bootstrap, CiMethod::Wald, CiMethod::GammaWsip];

    pub fn name(self) -> &'static str {
        match self {
            CiMethod::Bootstrap => "bootstrap",
            CiMethod::Wald => "wald",
            CiMethod::GammaWsip => "gamma_wsip",
        }
    }
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CiMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bootstrap" => Ok(CiMethod::Bootstrap),
            "wald" => Ok(CiMethod::Wald),
            "gamma" | "gamma_wsip" => Ok(CiMethod::GammaWsip),
            other => Err(invalid_param(format!("unknown interval method '{other}'"))),
        }
    }
}

/// A two-sided confidence interval for `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalResult {
    pub method: CiMethod,
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
}

impl IntervalResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Closed-interval containment.
    pub fn covers(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(invalid_param(format!(
            "confidence level must lie in (0, 1), got {level}"
        )))
    }
}
