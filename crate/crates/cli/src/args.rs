use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "starved",
    version,
    about = "Strata of monic hyperbolic polynomials sharing their leading coefficients"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The refinement lattice of compositions of d.
    Lattice(LatticeArgs),
    /// Classify one stratum as empty, a point or full-dimensional.
    Classify(ClassifyArgs),
    /// Occurring compositions via pairwise joins and upward closure.
    Occurs(OccursArgs),
    /// Solved points whose composition has at most s parts.
    Atoms(StratumArgs),
    /// Subdiscriminants, distinct-root count and real-rootedness certificate.
    Subdisc(SubdiscArgs),
    /// Sample every stratum for plotting.
    Mesh(MeshArgs),
    /// Build the lattice of strata and check its properties.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    /// Coefficients f_1,...,f_d of t^d + f_1 t^(d-1) + ... + f_d.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["roots", "poly"])]
    pub coeffs: Option<Vec<f64>>,
    /// Distinct roots, increasing.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "poly")]
    pub roots: Option<Vec<f64>>,
    /// Multiplicities of --roots (default all 1).
    #[arg(long, value_delimiter = ',', requires = "roots")]
    pub mults: Option<Vec<usize>>,
    /// JSON file with `coeffs`, or `roots` and optional `mults`.
    #[arg(long, value_name = "FILE")]
    pub poly: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    /// Largest accepted imaginary part of a root.
    #[arg(long)]
    pub tol_hyper: Option<f64>,
    /// Relative gap below which roots are merged.
    #[arg(long)]
    pub tol_cluster: Option<f64>,
    /// Newton convergence threshold.
    #[arg(long)]
    pub tol_residual: Option<f64>,
    /// Seed for the multistart clouds; overrides STARVED_POLY_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long)]
    pub d: usize,
    /// Keep only compositions with more than s parts.
    #[arg(long, conflicts_with = "min_len")]
    pub s: Option<usize>,
    /// Keep only compositions with at least this many parts.
    #[arg(long)]
    pub min_len: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct StratumArgs {
    #[command(flatten)]
    pub poly: PolyArgs,
    /// Number of fixed leading coefficients.
    #[arg(long)]
    pub s: usize,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: StratumArgs,
    /// Stratum label, e.g. 1,2 or 2-1-2.
    #[arg(long)]
    pub u: String,
}

#[derive(Debug, Args)]
pub struct OccursArgs {
    #[command(flatten)]
    pub common: StratumArgs,
    /// Cross-check against classifying every composition.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: StratumArgs,
    /// Cross-check the occurrence table against classifying every composition.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct SubdiscArgs {
    #[command(flatten)]
    pub poly: PolyArgs,
    /// Also compute the sequence in exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[command(flatten)]
    pub common: StratumArgs,
    /// Grid points per swept coefficient.
    #[arg(long, default_value_t = 60)]
    pub grid: usize,
    /// Per-axis bounds lo:hi for f_(s+1), f_(s+2), ...; required when s <= 1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bounds: Option<Vec<String>>,
}
