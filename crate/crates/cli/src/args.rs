use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const DEFAULT_SEED: u64 = 20_240_101;
pub const DEFAULT_REPS: u64 = 100_000;

#[derive(Parser, Debug)]
#[command(
    name = "seqmon",
    version,
    about = "Design, monitoring and Monte Carlo evaluation of two-arm sequential trials",
    args_override_self = true
)]
pub struct Cli {
    /// Full-precision key=value output plus a tab-separated summary line.
    #[arg(long, global = true)]
    pub machine: bool,

    /// Flat key=value file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, env = "SEQMON_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Monte Carlo replications.
    #[arg(long, global = true, default_value_t = DEFAULT_REPS)]
    pub reps: u64,

    /// Worker threads for simulation and optimization (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fixed sample size for two proportions.
    Design(DesignCmdArgs),
    /// Re-estimate the sample size from a blinded pooled event rate.
    Reestimate(ReestimateArgs),
    /// Conditional-power calibration and threshold tables.
    Boundary(BoundaryArgs),
    /// Apply the stopping rule to an interim 2x2 table.
    Interim(InterimArgs),
    /// Monte Carlo operating characteristics.
    Simulate(SimulateArgs),
    /// Expected-sample-size optimal group-sequential design.
    Optimize(OptimizeArgs),
    /// Infection and mortality counterfactuals against the trial as run.
    Counterfactuals,
}

#[derive(Args, Debug, Clone)]
pub struct DesignArgs {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// 1 or 2.
    #[arg(long, default_value_t = 2)]
    pub sides: u8,
    #[arg(long, default_value_t = 0.8)]
    pub power: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p_control: f64,
    #[arg(long, default_value_t = 0.3)]
    pub p_treatment: f64,
    /// Fraction of patients who cannot have an event in either arm.
    #[arg(long, default_value_t = 0.0)]
    pub dilution: f64,
    /// Treatment to control ratio.
    #[arg(long, default_value_t = 1.0)]
    pub allocation: f64,
}

#[derive(Args, Debug, Clone)]
pub struct DesignCmdArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[command(flatten)]
    pub formula: FormulaArg,
}

#[derive(Args, Debug, Clone)]
pub struct FormulaArg {
    /// SIMPLE_POOLED, POOLED_PLUS_ALT_VARIANCE or ALL.
    #[arg(long, default_value = "ALL")]
    pub formula: String,
}

#[derive(Args, Debug, Clone)]
pub struct ReestimateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[command(flatten)]
    pub formula: FormulaArg,
    /// Blinded pooled event rate observed so far.
    #[arg(long)]
    pub observed_rate: f64,
    /// Patients observed so far; the result never falls below it.
    #[arg(long, default_value_t = 0)]
    pub n_observed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct RuleArgs {
    #[arg(long, default_value_t = 0.0081)]
    pub p_sig: f64,
    #[arg(long, default_value_t = 0.382)]
    pub p_fut: f64,
    /// One-sided significance level of the final analysis.
    #[arg(long, default_value_t = 0.025)]
    pub alpha1: f64,
}

#[derive(Args, Debug, Clone)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Information fraction at which p-sig and p-fut are quoted.
    #[arg(long = "t", default_value_t = 0.5)]
    pub t: f64,
    /// Use these conditional-power levels instead of calibrating.
    #[arg(long, requires = "gamma_fut")]
    pub gamma_sig: Option<f64>,
    #[arg(long, requires = "gamma_sig")]
    pub gamma_fut: Option<f64>,
    /// Comma-separated information fractions for the threshold table.
    #[arg(long, default_value = "0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    pub grid: String,
    /// Equally spaced looks for the comparator boundaries.
    #[arg(long, default_value_t = 2)]
    pub looks: usize,
}

#[derive(Args, Debug, Clone)]
pub struct InterimArgs {
    /// events_a total_a events_b total_b (group A is treatment under the true labeling).
    #[arg(num_args = 4, value_names = ["EVENTS_A", "TOTAL_A", "EVENTS_B", "TOTAL_B"])]
    pub counts: Vec<u64>,
    /// The same four integers as one whitespace-separated value.
    #[arg(long, conflicts_with = "counts")]
    pub table: Option<String>,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long = "t", default_value_t = 0.5)]
    pub t: f64,
    /// Evaluate the rule under both label assignments.
    #[arg(long)]
    pub blinded: bool,
    /// treatment-fewer, treatment-more, A_EXCEEDS_B or B_EXCEEDS_A.
    #[arg(long, default_value = "treatment-fewer")]
    pub benefit_direction: String,
    /// Decide with the smaller of the two one-sided p-values.
    #[arg(long)]
    pub emulate_ambiguous: bool,
    /// Mortality table as four whitespace-separated integers (diagnostic only).
    #[arg(long)]
    pub mortality: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    /// Preset: null, harm or alternative.
    #[arg(long, default_value = "null")]
    pub scenario: String,
    #[arg(long)]
    pub p_control: Option<f64>,
    #[arg(long)]
    pub p_treatment: Option<f64>,
    #[arg(long)]
    pub death_infected_control: Option<f64>,
    #[arg(long)]
    pub death_infected_treatment: Option<f64>,
    #[arg(long)]
    pub death_uninfected: Option<f64>,
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Comma-separated interim fractions; "none" for a fixed design.
    #[arg(long)]
    pub interims: Option<String>,
    #[command(flatten)]
    pub rule: RuleArgs,
    /// EXACT, NORMAL_APPROX or RANDOMIZED.
    #[arg(long, default_value = "EXACT")]
    pub test: String,
    /// Also compare against the same trial without interim stopping.
    #[arg(long)]
    pub harm_report: bool,
}

#[derive(Args, Debug, Clone)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 5)]
    pub looks: usize,
    /// INFECTION or MORTALITY; sets n-fixed and the objective drift.
    #[arg(long, default_value = "INFECTION")]
    pub endpoint: String,
    #[arg(long)]
    pub n_fixed: Option<u64>,
    /// Drift at which E[N] is minimized (fixed-design z units).
    #[arg(long, allow_hyphen_values = true)]
    pub objective_drift: Option<f64>,
    #[arg(long, default_value_t = 0.025)]
    pub alpha1: f64,
    #[arg(long, default_value_t = 0.8)]
    pub power: f64,
    /// Smallest coordinate step of the boundary search.
    #[arg(long, default_value_t = 1.0 / 32.0)]
    pub min_step: f64,
}
