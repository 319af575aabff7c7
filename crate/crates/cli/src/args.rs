use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use frameorbit::SymmetricGauge;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "frameorbit", version, about = "Orbit certificates for closed-range matrices and frame equivalence checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: Options,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Options {
    /// Symmetric gauge: op, sinf, s<p> (p >= 1) or kf:<k>.
    #[arg(long, global = true, default_value = "s2")]
    pub gauge: SymmetricGauge,

    /// Threshold below which a gauge norm counts as small.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub tau: f64,

    /// Relative rank cutoff applied to matrix inputs.
    #[arg(long = "rank-tol", global = true, default_value_t = frameorbit::linalg::DEFAULT_RANK_TOL)]
    pub rank_tol: f64,

    /// Relative gap below which singular values share a block.
    #[arg(long = "group-tol", global = true, default_value_t = frameorbit::orbits::DEFAULT_GROUPING_TOL)]
    pub group_tol: f64,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Competitors drawn by the sampling checks.
    #[arg(long, global = true, default_value_t = 100)]
    pub samples: usize,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Also bound the logarithmic distance (frame distance).
    #[arg(long, global = true)]
    pub djl: bool,

    /// Local search steps for the logarithmic distance bound.
    #[arg(long, global = true, default_value_t = 0)]
    pub refine: usize,
}

#[derive(ValueEnum, Serialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Serialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Left,
    Bi,
    LeftUnitary,
    BiUnitary,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Moore-Penrose inverse.
    Pinv { a: PathBuf },
    /// Polar decomposition A = V|A|.
    Polar { a: PathBuf },
    /// Reduced minimum modulus.
    Gamma { a: PathBuf },
    /// Singular values grouped into blocks with their partial isometries.
    Blocksvd { a: PathBuf },
    /// Essential codimension of two projections.
    Index { p: PathBuf, q: PathBuf },
    /// Test B against the left, two-sided and unitary orbits of A.
    Classify { a: PathBuf, b: PathBuf },
    /// Build a witness relating A and B.
    Certify {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Re-check a certificate against A and B.
    Verify { certificate: PathBuf, a: PathBuf, b: PathBuf },
    /// Witnesses for the polar partial isometry and the Moore-Penrose dual.
    Representatives { a: PathBuf },
    /// Sample competitors against the polar and dual minimizers.
    Optimality { a: PathBuf },
    /// Operations on finite frames.
    #[command(subcommand)]
    Frame(FrameCommand),
}

#[derive(Subcommand, Debug)]
pub enum FrameCommand {
    /// Canonical dual frame.
    Dual { f: PathBuf },
    /// Associated Parseval frame.
    Parseval { f: PathBuf },
    /// Optimal frame bounds on the spanned subspace.
    Bounds { f: PathBuf },
    /// Gauge distance between synthesis operators.
    Distance { f: PathBuf, g: PathBuf },
    /// Equivalence g_n = G f_n, tested four ways.
    Equiv { f: PathBuf, g: PathBuf },
    /// Unitary equivalence g_n = U f_n, tested three ways.
    Uequiv { f: PathBuf, g: PathBuf },
    /// Check that no sampled Parseval frame is closer than the associated one.
    NearestParseval { f: PathBuf },
    /// Check that no sampled dual frame is closer than the canonical dual.
    NearestDual { f: PathBuf },
    /// Distance to the class of self-dual frames, tested five ways.
    Deficiency { f: PathBuf },
}
