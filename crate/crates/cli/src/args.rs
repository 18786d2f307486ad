use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 2007;

#[derive(Debug, Parser, Serialize)]
#[command(name = "entperc", version, about = "Entanglement percolation experiments")]
pub struct Cli {
    /// Results file; stdout when absent. A `<out>.manifest.json` is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Worker threads; defaults to the available parallelism. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Also write the network used by the command as JSON.
    #[arg(long, global = true)]
    pub dump_network: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Singlet conversion probability and related quantities of one bond.
    Scp(BondArgs),
    /// Bell-basis swapping of two qubit bonds at one repeater.
    Swap(SwapArgs),
    /// CEP against left-to-right swapping on repeater chains of 1..=N repeaters.
    Chain(ChainArgs),
    /// Bond percolation thresholds of the square, triangular and honeycomb lattices.
    Thresholds(ThresholdArgs),
    /// CEP against swapping between opposite corners of a 2×2 square.
    Square2x2(Square2x2Args),
    /// Doubled-bond honeycomb: CEP against swapping to a triangular lattice then CEP.
    HoneycombDemo(HoneycombArgs),
    /// Connection probability against distance under CEP on a lattice.
    TwoPoint(TwoPointArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BondArgs {
    /// Schmidt coefficients, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "lambda1")]
    pub coeffs: Option<Vec<f64>>,
    /// Largest coefficient of a qubit bond (λ2 = 1 − λ1).
    #[arg(long)]
    pub lambda1: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SwapArgs {
    #[command(flatten)]
    pub bond: BondArgs,
    /// Second bond, as coefficients; defaults to the first bond.
    #[arg(long, value_delimiter = ',', conflicts_with = "other_lambda1")]
    pub other_coeffs: Option<Vec<f64>>,
    #[arg(long)]
    pub other_lambda1: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ChainArgs {
    #[command(flatten)]
    pub bond: BondArgs,
    /// Largest number of repeaters.
    #[arg(long = "N", default_value_t = 10)]
    #[serde(rename = "N")]
    pub repeaters: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind2d {
    Square,
    Triangular,
    Honeycomb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryArg {
    Open,
    Periodic,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    /// Lattice kinds to estimate; all three when omitted.
    #[arg(long, value_enum)]
    pub kind: Vec<Kind2d>,
    #[arg(long = "L", default_value_t = 64)]
    #[serde(rename = "L")]
    pub size: usize,
    /// Trials per bisection point.
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    /// Bisection resolution (at least 0.005).
    #[arg(long, default_value_t = 0.005)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Square2x2Args {
    #[command(flatten)]
    pub bond: BondArgs,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct HoneycombArgs {
    /// Largest coefficient of the two-qubit state doubled on every edge;
    /// defaults to √(1/2 + sin(π/18)).
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long = "L", default_value_t = 32)]
    #[serde(rename = "L")]
    pub size: usize,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TwoPointArgs {
    #[arg(long, value_enum)]
    pub kind: Kind2d,
    #[arg(long = "L", default_value_t = 64)]
    #[serde(rename = "L")]
    pub size: usize,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
    pub boundary: BoundaryArg,
    /// Uniform open probability; otherwise derived from the bond.
    #[arg(long, conflicts_with_all = ["coeffs", "lambda1"])]
    pub p: Option<f64>,
    #[command(flatten)]
    pub bond: BondArgs,
    /// Bond copies per edge.
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    /// Cell separations along the first lattice axis; defaults to 1..=L/2.
    #[arg(long, value_delimiter = ',')]
    pub distances: Option<Vec<usize>>,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
}
