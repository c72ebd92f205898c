use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "quantacode", version, about = "Finite-precision frequency tables for arithmetic coding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Decimal digits for logarithms, roots and bounds.
    #[arg(long, global = true, env = "QUANTACODE_PRECISION", default_value_t = 50)]
    pub precision: u32,

    /// Worker threads for scans.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Seed recorded in CSV output and used by `simulate`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Round a distribution to a frequency table and report its redundancy
    /// against every applicable bound.
    Approximate(ApproximateArgs),
    /// Scan denominators up to --t-max and flag record approximations.
    Scan(ScanArgs),
    /// Choose a register width and table for a target redundancy.
    Plan(PlanArgs),
    /// Range-code a file of byte symbols.
    Encode(EncodeArgs),
    /// Invert `encode`.
    Decode(DecodeArgs),
    /// Measure the coder's rate on seeded iid data.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct Source {
    /// Comma-separated probabilities (decimals or fractions), or a preset:
    /// golden, silver, surd3.
    #[arg(short = 'p', long = "probs", allow_hyphen_values = true)]
    pub probs: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KappaArg {
    Golden,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Guaranteed,
    Opportunistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Delta,
    Divergence,
}

#[derive(Debug, Args)]
pub struct ApproximateArgs {
    #[command(flatten)]
    pub source: Source,
    /// Common denominator.
    #[arg(short = 't', conflicts_with = "width", required_unless_present = "width")]
    pub t: Option<u64>,
    /// Register width; the best table with t ≤ 2^W is chosen.
    #[arg(short = 'W', long)]
    pub width: Option<u32>,
    /// What the width search minimizes.
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Divergence, requires = "width")]
    pub objective: ObjectiveArg,
    /// Binary sources only; detected from the source when omitted.
    #[arg(long, value_enum)]
    pub kappa: Option<KappaArg>,
    /// Table file to write; printed to stdout when omitted.
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
    /// Also write the bound report as CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long = "t-max")]
    pub t_max: u64,
    #[arg(long, value_enum)]
    pub kappa: Option<KappaArg>,
    /// CSV file to write; printed to stdout when omitted.
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub source: Source,
    /// Target redundancy in nats per symbol.
    #[arg(short = 'R', long = "target")]
    pub target: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Guaranteed)]
    pub mode: ModeArg,
    #[arg(long, value_enum)]
    pub kappa: Option<KappaArg>,
    /// Also write the plan as CSV.
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
    /// Also write the chosen table.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Input file; every byte is one symbol index.
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
    /// Table file; embedded in the output when --framed is set.
    #[arg(long)]
    pub table: PathBuf,
    /// Prefix the stream with the table and symbol count.
    #[arg(long)]
    pub framed: bool,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
    /// Table file for unframed streams.
    #[arg(long, required_unless_present = "framed", conflicts_with = "framed")]
    pub table: Option<PathBuf>,
    /// Symbol count for unframed streams.
    #[arg(short = 'n', required_unless_present = "framed", conflicts_with = "framed")]
    pub n: Option<u64>,
    #[arg(long)]
    pub framed: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: Source,
    /// Table file; otherwise the min-max table for -t.
    #[arg(long, conflicts_with = "t", required_unless_present = "t")]
    pub table: Option<PathBuf>,
    #[arg(short = 't')]
    pub t: Option<u64>,
    #[arg(short = 'n', default_value_t = 1_000_000)]
    pub n: u64,
    /// CSV file to write; printed to stdout when omitted.
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}
