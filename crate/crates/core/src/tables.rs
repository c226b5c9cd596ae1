//! The calibrated table and the data series behind the figures.

use crate::calibration::{derive_ca, Level};
use crate::design::{indifference_cost, Design, Environment};
use crate::error::Result;
use crate::manipulation::{
    expected_loss_under_rule, optimize_rule, prereg_crossover_cost, prereg_loss_ratio, rule_moments, ManipulationEnv,
    ManipulationSolution, PublicationRule, ResponsePolicy, RuleMoments,
};
use crate::sim::rng::replicate_seed;
use crate::sim::{
    histogram_export, sample_population, simulate_equilibrium, summarize, BinSpec, Draw, Histogram, HistogramField,
    SimRule, SummaryStats,
};
use serde::{Deserialize, Serialize};

pub const CALIBRATED_ETA2: f64 = 1.94;

/// Narrow enough that bunching atoms dominate their neighbouring bins.
pub const FIGURE_BIN_WIDTH: f64 = 0.005;

/// Environment of a calibration level: `η² = 1.94`, `S² = 1`, `C0 = 0`.
pub fn calibrated_env(level: Level) -> Result<ManipulationEnv> {
    let cm = match level {
        Level::FivePct => 0.98,
        Level::OnePct => 0.83,
    };
    let ca = derive_ca(CALIBRATED_ETA2, level.cutoff())?;
    ManipulationEnv::new(CALIBRATED_ETA2, 1.0, ca, cm, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Threshold at `γ*`, no manipulation.
    Truthful,
    /// Threshold at `γ*`, researchers best respond.
    NaiveThreshold,
    /// Optimal smoothed rule, researchers best respond.
    Optimal,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Truthful, Regime::NaiveThreshold, Regime::Optimal];

    pub fn sim_rule(self, env: &ManipulationEnv, sol: &ManipulationSolution) -> Result<(SimRule, ResponsePolicy)> {
        Ok(match self {
            Regime::Truthful => (SimRule::Fixed(PublicationRule::threshold(env.gamma_star())?), ResponsePolicy::Truthful),
            Regime::NaiveThreshold => {
                (SimRule::Fixed(PublicationRule::threshold(env.gamma_star())?), ResponsePolicy::BestRespond)
            }
            Regime::Optimal => (SimRule::Optimal(*sol), ResponsePolicy::BestRespond),
        })
    }

    /// Location of the bunching atom, if the regime can produce one.
    pub fn atom_location(self, env: &ManipulationEnv, sol: &ManipulationSolution) -> Option<f64> {
        match self {
            Regime::Truthful => None,
            Regime::NaiveThreshold => Some(env.gamma_star()),
            Regime::Optimal => Some(sol.x_star),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub regime: Regime,
    pub rule: PublicationRule,
    pub simulated: SummaryStats,
    pub quadrature: RuleMoments,
}

pub fn regime_row(
    env: &ManipulationEnv,
    sol: &ManipulationSolution,
    regime: Regime,
    population: &[Draw],
    seed: u64,
) -> Result<RegimeRow> {
    let (rule, policy) = regime.sim_rule(env, sol)?;
    let records = simulate_equilibrium(env, &rule, policy, population, seed);
    Ok(RegimeRow {
        regime,
        rule: rule.publication_rule(),
        simulated: summarize(&records)?,
        quadrature: rule_moments(env, &rule.publication_rule(), policy)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Block {
    pub level: Level,
    pub env: ManipulationEnv,
    pub solution: ManipulationSolution,
    /// Lowest `|X|` published with positive probability, `X* − 1/c_m`.
    pub lower_edge: f64,
    pub rows: Vec<RegimeRow>,
}

/// One calibration block. Each level draws its own replicate from `seed`,
/// so blocks carry independent Monte Carlo error.
pub fn table2_block(level: Level, n: usize, seed: u64) -> Result<Table2Block> {
    let env = calibrated_env(level)?;
    let sol = optimize_rule(&env)?;
    let seed = replicate_seed(seed, level as u64);
    let population = sample_population(&env, n, seed)?;
    let rows = Regime::ALL
        .iter()
        .map(|&r| regime_row(&env, &sol, r, &population, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(Table2Block { level, env, solution: sol, lower_edge: sol.x_star - 1.0 / env.cm, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndifferencePoint {
    pub s2_o: f64,
    /// Cost of the precise design at which the planner is indifferent;
    /// `None` when one design dominates for every cost.
    pub cost_e: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndifferenceCurve {
    pub eta2: f64,
    pub ca: f64,
    pub s2_e: f64,
    pub cost_o: f64,
    pub points: Vec<IndifferencePoint>,
}

/// Indifference cost of a precise design against a free noisy design, over
/// a grid of noisy variances.
pub fn indifference_curve(env: &Environment, s2_e: f64, cost_o: f64, s2_grid: &[f64]) -> Result<IndifferenceCurve> {
    let points = s2_grid
        .iter()
        .map(|&s2_o| {
            let o = Design::new(s2_o, cost_o)?;
            Ok(IndifferencePoint { s2_o, cost_e: indifference_cost(env, s2_e, &o) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IndifferenceCurve { eta2: env.eta2, ca: env.ca, s2_e, cost_o, points })
}

/// Curves for `η² = 1`, `S²_E = 0`, free observational design and
/// `c_a ∈ {0.5, 1}`, with `S²_O` on `(0, 3]`.
pub fn fig2_series() -> Result<Vec<IndifferenceCurve>> {
    let grid: Vec<f64> = (1..=150).map(|k| k as f64 * 0.02).collect();
    [0.5, 1.0]
        .iter()
        .map(|&ca| indifference_curve(&Environment::new(1.0, ca)?, 0.0, 0.0, &grid))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeHistogram {
    pub regime: Regime,
    pub summary: SummaryStats,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSeries {
    pub env: ManipulationEnv,
    pub solution: ManipulationSolution,
    pub published_only: bool,
    pub regimes: Vec<RegimeHistogram>,
}

/// Histograms of `|X|` under each regime from one common population.
pub fn regime_histograms(
    env: &ManipulationEnv,
    bins: &BinSpec,
    published_only: bool,
    n: usize,
    seed: u64,
) -> Result<HistogramSeries> {
    let sol = optimize_rule(env)?;
    let population = sample_population(env, n, seed)?;
    let regimes = Regime::ALL
        .iter()
        .map(|&regime| {
            let (rule, policy) = regime.sim_rule(env, &sol)?;
            let records = simulate_equilibrium(env, &rule, policy, &population, seed);
            let atoms: Vec<f64> = regime.atom_location(env, &sol).into_iter().collect();
            Ok(RegimeHistogram {
                regime,
                summary: summarize(&records)?,
                histogram: histogram_export(&records, bins, HistogramField::ReportedXAbs, published_only, &atoms)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HistogramSeries { env: *env, solution: sol, published_only, regimes })
}

/// Illustrative environment: `c_m = 2`, `η² = 2`, `S² = 0`, `c_a = 0.5`.
pub fn fig3_env() -> Result<ManipulationEnv> {
    ManipulationEnv::new(2.0, 0.0, 0.5, 2.0, 0.0)
}

pub fn fig3_series(n: usize, seed: u64) -> Result<HistogramSeries> {
    regime_histograms(&fig3_env()?, &BinSpec::new(0.0, FIGURE_BIN_WIDTH, 600)?, false, n, seed)
}

/// Published `|X|` under the five-percent calibration.
pub fn fig5_series(n: usize, seed: u64) -> Result<HistogramSeries> {
    regime_histograms(&calibrated_env(Level::FivePct)?, &BinSpec::new(0.0, FIGURE_BIN_WIDTH, 1200)?, true, n, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRatioPoint {
    pub c_e: f64,
    pub loss_experiment: f64,
    /// `L*_E / L_M` against the naive threshold with manipulation.
    pub ratio_naive: f64,
    /// `L*_E / L*_M` against the optimal manipulable rule.
    pub ratio_optimal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSweep {
    pub env: ManipulationEnv,
    pub solution: ManipulationSolution,
    pub loss_naive: f64,
    pub crossover_optimal: Option<f64>,
    pub points: Vec<CostRatioPoint>,
}

/// Loss ratios of a costly pre-registered experiment against the
/// manipulable study, for `c_e` on `[0, 0.6]` in steps of 0.01.
pub fn fig4_series() -> Result<CostSweep> {
    let env = calibrated_env(Level::FivePct)?;
    let sol = optimize_rule(&env)?;
    let naive = PublicationRule::threshold(env.gamma_star())?;
    let loss_naive = expected_loss_under_rule(&env, &naive, ResponsePolicy::BestRespond)?;
    let points = (0..=60)
        .map(|k| {
            let c_e = k as f64 * 0.01;
            let ratio_optimal = prereg_loss_ratio(&env, sol.expected_loss, c_e)?;
            let loss_experiment = ratio_optimal * sol.expected_loss;
            Ok(CostRatioPoint { c_e, loss_experiment, ratio_naive: loss_experiment / loss_naive, ratio_optimal })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CostSweep { env, solution: sol, loss_naive, crossover_optimal: prereg_crossover_cost(&env, &sol)?, points })
}
