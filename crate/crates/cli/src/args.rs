use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "distillery", version, about = "Entanglement versus nonlocality distillation of noisy Bell states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep V_ED against V_ND (pure) or the mixed-state ND bound over p.
    Bounds(BoundsArgs),
    /// Locate where nonlocality distillation beats entanglement distillation.
    Crossover(CrossoverArgs),
    /// Check the N² decomposition and the norm certificates.
    Verify(VerifyArgs),
    /// See-saw search for the mixed-state CHSH optimum.
    Optimize(OptimizeArgs),
    /// Run a pipeline in the statevector simulator.
    Simulate(SimulateArgs),
    /// Structural resource counts of both pipelines at two copies.
    Resources(ResourcesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Pure,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Meas,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Ed,
    Nd,
}

/// Flags shared by every command.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(value_enum)]
    pub mode: Option<Mode>,
    #[arg(long = "mode", value_enum, conflicts_with = "mode")]
    pub mode_flag: Option<Mode>,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    /// SVG line chart of the sweep.
    #[arg(long)]
    pub chart: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CrossoverArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0.75)]
    pub p: f64,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Family::Meas)]
    pub family: Family,
    /// Random quads drawn for `--family random`.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, env = "DISTILLERY_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 0.75)]
    pub p: f64,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, env = "DISTILLERY_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub protocol: Protocol,
    #[arg(long, default_value_t = 0.75)]
    pub p: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Protocol runs (ed) or measurement shots (nd).
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, env = "DISTILLERY_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ResourcesArgs {
    #[arg(long, default_value_t = 0.75)]
    pub p: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}
