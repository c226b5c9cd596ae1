use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "pubrules", version, about = "Optimal publication rules: solve, simulate, calibrate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal threshold and loss for a verifiable design.
    #[command(allow_negative_numbers = true)]
    Rule(RuleArgs),
    /// Compare a precise costly design with a noisy one.
    #[command(allow_negative_numbers = true)]
    Compare(CompareArgs),
    /// Optimal publication rule under manipulation.
    #[command(allow_negative_numbers = true)]
    Optimize(OptimizeArgs),
    /// Simulate one rule and response policy.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Calibrated table rows.
    #[command(allow_negative_numbers = true)]
    Table2(Table2Args),
    /// Data series behind the figures.
    #[command(allow_negative_numbers = true)]
    FigureData(FigureArgs),
    /// Calibrate (eta2, cm, ca) from a p-value file.
    #[command(allow_negative_numbers = true)]
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct RuleArgs {
    #[arg(long)]
    pub eta2: f64,
    #[arg(long)]
    pub s2: f64,
    #[arg(long)]
    pub cost: f64,
    #[arg(long)]
    pub ca: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub eta2: f64,
    #[arg(long)]
    pub ca: f64,
    #[arg(long)]
    pub s2_e: f64,
    #[arg(long)]
    pub cost_e: f64,
    #[arg(long)]
    pub s2_o: f64,
    #[arg(long, default_value_t = 0.0)]
    pub cost_o: f64,
    /// Also trace the indifference cost of E over a grid of S²_O.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value_t = 0.02)]
    pub sweep_step: f64,
    #[arg(long, default_value_t = 3.0)]
    pub sweep_max: f64,
}

/// Manipulation environment; the attention cost is given directly or
/// through the truthful cutoff it implies.
#[derive(Debug, Args, Serialize)]
pub struct EnvArgs {
    #[arg(long)]
    pub eta2: f64,
    #[arg(long)]
    pub s2: f64,
    #[arg(long)]
    pub cm: f64,
    #[arg(long, conflicts_with = "cutoff_target", required_unless_present = "cutoff_target")]
    pub ca: Option<f64>,
    #[arg(long)]
    pub cutoff_target: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub c0: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub env: EnvArgs,
    /// Also compare with a pre-registered experiment of this cost.
    #[arg(long)]
    pub experiment_cost: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Optimal,
    Threshold,
    Smoothed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum PolicyArg {
    BestRespond,
    Truthful,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub env: EnvArgs,
    #[arg(long, value_enum, default_value_t = RuleKind::Optimal)]
    pub rule: RuleKind,
    /// Cutoff of a threshold or smoothed rule (default: the truthful cutoff).
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Ramp slope of a smoothed rule (default: cm).
    #[arg(long)]
    pub slope: Option<f64>,
    #[arg(long, value_enum, default_value_t = PolicyArg::BestRespond)]
    pub policy: PolicyArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum CalibrationChoice {
    FivePct,
    OnePct,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct Table2Args {
    #[arg(long, value_enum, default_value_t = CalibrationChoice::Both)]
    pub calibration: CalibrationChoice,
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Debug, Args, Serialize)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum LevelArg {
    FivePct,
    OnePct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum ScaleArg {
    Standard,
    Marginal,
    Folded,
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    /// Delimited file with a `p_value` column.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = LevelArg::FivePct)]
    pub level: LevelArg,
    #[arg(long)]
    pub unpublished_share: Option<f64>,
    #[arg(long)]
    pub prereg_share: Option<f64>,
    /// Use this bunching share instead of measuring it.
    #[arg(long)]
    pub raw_share: Option<f64>,
    #[arg(long)]
    pub window_lo: Option<f64>,
    #[arg(long)]
    pub window_hi: Option<f64>,
    #[arg(long, value_enum, default_value_t = ScaleArg::Standard)]
    pub cm_scale: ScaleArg,
    #[arg(long, value_enum, default_value_t = MappingArg::HalfQuantile)]
    pub eta2_mapping: MappingArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum MappingArg {
    HalfQuantile,
    Gaussian,
}
