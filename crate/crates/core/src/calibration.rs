//! Calibration of `(η², c_m, c_a)` from a corpus of published p-values.
//!
//! Each p-value maps to a two-sided z-statistic. The share of statistics
//! just above the significance cutoff measures bunching and pins down the
//! manipulation cost; an upper percentile of `|t|`, shifted for unpublished
//! studies, pins down the prior variance; the attention cost is whatever
//! makes the truthful cutoff equal the significance level. `S²` is
//! normalised to one throughout.

use crate::design::publication_cutoff;
use crate::error::{Error, Result};
use crate::gaussian::{cdf, upper_quantile};
use crate::numeric::bisect;
use serde::{Deserialize, Serialize};
use std::io::Read;

pub const MIN_OBSERVATIONS: usize = 1000;
/// Percentiles at or below this value may be contaminated by manipulation.
pub const ROBUST_PERCENTILE_FLOOR: f64 = 2.56;
/// Tail probability of the upper percentile used for `η²`.
pub const UPPER_TAIL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    FivePct,
    OnePct,
}

impl Level {
    pub fn cutoff(self) -> f64 {
        match self {
            Level::FivePct => 1.96,
            Level::OnePct => 2.56,
        }
    }
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "five_pct" => Ok(Level::FivePct),
            "one_pct" => Ok(Level::OnePct),
            _ => Err(Error::invalid(format!("unknown level `{s}`, expected five_pct or one_pct"))),
        }
    }
}

/// Scale on which the bunching equation is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmScale {
    /// `Φ(q) − Φ(q − 1/c_m) = b` with the standard normal.
    #[default]
    Standard,
    /// The same equation with `X ~ N(0, S² + η²)`.
    Marginal,
    /// Two-sided mass of `|X| ∈ (q − 1/c_m, q)` under `N(0, S² + η²)`.
    Folded,
}

impl std::str::FromStr for CmScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(CmScale::Standard),
            "marginal" => Ok(CmScale::Marginal),
            "folded" => Ok(CmScale::Folded),
            _ => Err(Error::invalid(format!("unknown scale `{s}`, expected standard, marginal or folded"))),
        }
    }
}

/// Map from the adjusted 95th percentile `q̄` of `|t|` to `η²` (with `S² = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eta2Mapping {
    /// `(q̄/2)² − 1`.
    #[default]
    HalfQuantile,
    /// `(q̄/z)² − 1` with `z = Φ⁻¹(0.975)`, exact when `|X|` is folded normal.
    Gaussian,
}

impl std::str::FromStr for Eta2Mapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half_quantile" => Ok(Eta2Mapping::HalfQuantile),
            "gaussian" => Ok(Eta2Mapping::Gaussian),
            _ => Err(Error::invalid(format!("unknown eta2 mapping `{s}`, expected half_quantile or gaussian"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub level: Level,
    pub q: f64,
    pub bunch_window: (f64, f64),
    pub unpublished_share: f64,
    pub prereg_share: f64,
    pub raw_bunch_share_override: Option<f64>,
    pub cm_scale: CmScale,
    pub eta2_mapping: Eta2Mapping,
}

impl CalibrationConfig {
    pub fn five_pct() -> Self {
        CalibrationConfig {
            level: Level::FivePct,
            q: 1.96,
            bunch_window: (1.95, 2.00),
            unpublished_share: 0.36,
            prereg_share: 0.27,
            raw_bunch_share_override: None,
            cm_scale: CmScale::Standard,
            eta2_mapping: Eta2Mapping::HalfQuantile,
        }
    }

    pub fn one_pct() -> Self {
        CalibrationConfig { level: Level::OnePct, q: 2.56, bunch_window: (2.55, 2.60), ..Self::five_pct() }
    }

    pub fn for_level(level: Level) -> Self {
        match level {
            Level::FivePct => Self::five_pct(),
            Level::OnePct => Self::one_pct(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bunch_window;
        if !(lo < self.q && self.q <= hi) {
            return Err(Error::invalid(format!("bunch window [{lo}, {hi}] must satisfy lo < q <= hi for q = {}", self.q)));
        }
        for (name, s) in [("unpublished_share", self.unpublished_share), ("prereg_share", self.prereg_share)] {
            if !(0.0..1.0).contains(&s) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1), got {s}")));
            }
        }
        if let Some(r) = self.raw_bunch_share_override {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::invalid(format!("raw bunch share must lie in [0, 1], got {r}")));
            }
        }
        Ok(())
    }

    /// Percentile (in points) of observed `|t|` matching the 95th percentile
    /// of all studies.
    pub fn percentile_used(&self) -> f64 {
        let u = self.unpublished_share;
        100.0 * (1.0 - UPPER_TAIL) - 100.0 * UPPER_TAIL * u / (1.0 - u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedParams {
    pub eta2: f64,
    pub cm: f64,
    pub ca: f64,
    pub level: Level,
}

/// Published p-values in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueDataset {
    pub p_values: Vec<f64>,
    pub label: String,
    /// Rows of the source that could not be used.
    pub n_rejected: usize,
}

fn valid_p(p: f64) -> bool {
    p > 0.0 && p <= 1.0
}

impl PValueDataset {
    pub fn new(p_values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if let Some(bad) = p_values.iter().find(|&&p| !valid_p(p)) {
            return Err(Error::domain(format!("p-value {bad} outside (0, 1]")));
        }
        Ok(PValueDataset { p_values, label: label.into(), n_rejected: 0 })
    }

    /// Reads delimited text with a `p_value` column. Unparseable rows and
    /// values outside `(0, 1]` are counted in `n_rejected`.
    pub fn from_reader(reader: impl Read, label: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
        let col = headers
            .iter()
            .position(|h| h == "p_value")
            .ok_or_else(|| Error::Parse("missing `p_value` header".into()))?;
        let mut p_values = Vec::new();
        let mut n_rejected = 0;
        for row in rdr.records() {
            let parsed = row.ok().and_then(|r| r.get(col).and_then(|s| s.parse::<f64>().ok()));
            match parsed {
                Some(p) if valid_p(p) => p_values.push(p),
                _ => n_rejected += 1,
            }
        }
        Ok(PValueDataset { p_values, label: label.into(), n_rejected })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(std::io::BufReader::new(file), path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.p_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_values.is_empty()
    }
}

/// `X = Φ⁻¹(1 − p/2)`.
pub fn pvalue_to_tstat(p: f64) -> Result<f64> {
    if !valid_p(p) {
        return Err(Error::domain(format!("p-value {p} outside (0, 1]")));
    }
    upper_quantile(p / 2.0)
}

pub fn pvalues_to_tstats(data: &PValueDataset) -> Result<Vec<f64>> {
    data.p_values.iter().map(|&p| pvalue_to_tstat(p)).collect()
}

/// Rescales the observed bunching share for unpublished and preregistered
/// studies.
pub fn adjusted_bunch_share(cfg: &CalibrationConfig, raw_share: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&raw_share) {
        return Err(Error::domain(format!("raw share must lie in [0, 1], got {raw_share}")));
    }
    Ok(raw_share * (1.0 - cfg.unpublished_share) / (1.0 - cfg.prereg_share))
}

/// Share of statistics with `|t|` inside the bunching window.
pub fn raw_bunch_share(cfg: &CalibrationConfig, tstats: &[f64]) -> Result<f64> {
    if tstats.is_empty() {
        return Err(Error::domain("no statistics to measure bunching on"));
    }
    let (lo, hi) = cfg.bunch_window;
    let k = tstats.iter().filter(|t| (lo..=hi).contains(&t.abs())).count();
    Ok(k as f64 / tstats.len() as f64)
}

/// Mass that manipulation moves into the cutoff when the jump width is `w`.
pub fn bunched_mass(scale: CmScale, q: f64, w: f64, sd: f64) -> f64 {
    match scale {
        CmScale::Standard => cdf(q) - cdf(q - w),
        CmScale::Marginal => cdf(q / sd) - cdf((q - w) / sd),
        CmScale::Folded => 2.0 * (cdf(q / sd) - cdf((q - w).max(0.0) / sd)),
    }
}

/// Manipulation cost solving the bunching equation on the standard scale
/// (or the configured scale with unit standard deviation).
pub fn estimate_cm(cfg: &CalibrationConfig, b: f64) -> Result<f64> {
    estimate_cm_scaled(cfg, b, 1.0)
}

/// Manipulation cost on the configured scale with marginal sd `sd`.
pub fn estimate_cm_scaled(cfg: &CalibrationConfig, b: f64, sd: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::domain(format!("bunching share must be positive, got {b}")));
    }
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(Error::invalid(format!("scale sd must be positive, got {sd}")));
    }
    let q = cfg.q;
    let w_max = q + 10.0;
    let f = |w: f64| bunched_mass(cfg.cm_scale, q, w, sd) - b;
    if f(w_max) <= 0.0 {
        return Err(Error::Infeasible(format!("no manipulation cost generates a bunching share of {b} at q = {q}")));
    }
    let w = bisect(f, 0.0, w_max, 1e-13)?;
    Ok(1.0 / w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eta2Estimate {
    pub eta2: f64,
    pub percentile_used: f64,
    pub percentile_value: f64,
    /// False when the percentile sits in the region manipulation can reach.
    pub robust: bool,
}

/// `(q̄/2)² − 1`, the prior variance implied by the adjusted 95th
/// percentile when `S² = 1`.
pub fn eta2_from_percentile(q_bar: f64) -> f64 {
    (q_bar / 2.0).powi(2) - 1.0
}

pub fn eta2_from_percentile_with(mapping: Eta2Mapping, q_bar: f64) -> f64 {
    match mapping {
        Eta2Mapping::HalfQuantile => eta2_from_percentile(q_bar),
        Eta2Mapping::Gaussian => {
            let z = upper_quantile(UPPER_TAIL / 2.0).expect("fixed tail in (0, 1)");
            (q_bar / z).powi(2) - 1.0
        }
    }
}

/// Nearest-rank percentile (in points) of `values`, which must be sorted.
pub fn nearest_rank(sorted: &[f64], percentile: f64) -> f64 {
    let n = sorted.len();
    let rank = ((percentile / 100.0) * n as f64).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

pub fn estimate_eta2(tstats: &[f64], cfg: &CalibrationConfig) -> Result<Eta2Estimate> {
    if tstats.len() < MIN_OBSERVATIONS {
        return Err(Error::domain(format!(
            "need at least {MIN_OBSERVATIONS} statistics to estimate eta2, got {}",
            tstats.len()
        )));
    }
    let mut abs: Vec<f64> = tstats.iter().map(|t| t.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let percentile_used = cfg.percentile_used();
    let q_bar = nearest_rank(&abs, percentile_used);
    Ok(Eta2Estimate {
        eta2: eta2_from_percentile_with(cfg.eta2_mapping, q_bar),
        percentile_used,
        percentile_value: q_bar,
        robust: q_bar > ROBUST_PERCENTILE_FLOOR,
    })
}

/// Attention cost for which the truthful cutoff equals `target_cutoff`.
pub fn derive_ca(eta2: f64, target_cutoff: f64) -> Result<f64> {
    if !(eta2 > 0.0 && eta2.is_finite()) {
        return Err(Error::invalid(format!("eta2 must be positive, got {eta2}")));
    }
    if !(target_cutoff > 0.0 && target_cutoff.is_finite()) {
        return Err(Error::invalid(format!("cutoff must be positive, got {target_cutoff}")));
    }
    Ok((target_cutoff * eta2 / (1.0 + eta2)).powi(2))
}

/// `γ*` implied by calibrated parameters at `S² = 1`.
pub fn implied_cutoff(p: &CalibratedParams) -> f64 {
    publication_cutoff(p.eta2, 1.0, p.ca)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub label: String,
    pub eta2: f64,
    pub cm: f64,
    pub ca: f64,
    pub level: Level,
    pub raw_share: f64,
    pub adjusted_b: f64,
    pub percentile_used: f64,
    pub percentile_value: f64,
    pub robust: bool,
    pub n_used: usize,
    pub n_rejected: usize,
    pub config: CalibrationConfig,
}

impl CalibrationReport {
    pub fn params(&self) -> CalibratedParams {
        CalibratedParams { eta2: self.eta2, cm: self.cm, ca: self.ca, level: self.level }
    }
}

pub fn calibrate_pipeline(data: &PValueDataset, cfg: &CalibrationConfig) -> Result<CalibrationReport> {
    cfg.validate()?;
    let tstats = pvalues_to_tstats(data)?;
    let eta = estimate_eta2(&tstats, cfg)?;
    if !(eta.eta2 > 0.0) {
        return Err(Error::Infeasible(format!(
            "adjusted percentile {} implies a non-positive eta2",
            eta.percentile_value
        )));
    }
    let raw_share = match cfg.raw_bunch_share_override {
        Some(r) => r,
        None => raw_bunch_share(cfg, &tstats)?,
    };
    let adjusted_b = adjusted_bunch_share(cfg, raw_share)?;
    let sd = match cfg.cm_scale {
        CmScale::Standard => 1.0,
        CmScale::Marginal | CmScale::Folded => (1.0 + eta.eta2).sqrt(),
    };
    let cm = estimate_cm_scaled(cfg, adjusted_b, sd)?;
    let ca = derive_ca(eta.eta2, cfg.q)?;
    Ok(CalibrationReport {
        label: data.label.clone(),
        eta2: eta.eta2,
        cm,
        ca,
        level: cfg.level,
        raw_share,
        adjusted_b,
        percentile_used: eta.percentile_used,
        percentile_value: eta.percentile_value,
        robust: eta.robust,
        n_used: data.len(),
        n_rejected: data.n_rejected,
        config: *cfg,
    })
}
