use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Approximate f(A), diag(f(A)) or trace(f(A)) for banded and HSS matrices.
#[derive(Debug, Parser)]
#[command(name = "funm", version, args_conflicts_with_subcommands = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub funm: FunmArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep n or the method parameter and write one CSV row per configuration.
    Bench(BenchArgs),
    /// Write a generated test matrix in Matrix Market format.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dc,
    SplittingFixed,
    SplittingAdaptive,
    Chebyshev,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dc => "dc",
            Method::SplittingFixed => "splitting-fixed",
            Method::SplittingAdaptive => "splitting-adaptive",
            Method::Chebyshev => "chebyshev",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFlag {
    Full,
    Diag,
    Trace,
}

impl OutputFlag {
    pub fn name(self) -> &'static str {
        match self {
            OutputFlag::Full => "full",
            OutputFlag::Diag => "diag",
            OutputFlag::Trace => "trace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reference {
    Dense,
    None,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    /// Function: exp, sqrt, inv_sqrt, sign, heaviside, fermi_dirac:beta=..,mu=.., poly:c0=..,c1=..
    #[arg(long = "f", default_value = "exp")]
    pub function: String,
    #[arg(long, value_enum, default_value = "dc")]
    pub method: Method,
    /// inf | extended | list:a+bi,a-bi,...
    #[arg(long, default_value = "inf")]
    pub poles: String,
    #[arg(long, default_value_t = 1)]
    pub lag: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    #[arg(long, default_value_t = 64)]
    pub nmin: usize,
    #[arg(long, value_enum, default_value = "full")]
    pub flag: OutputFlag,
    /// Block size for splitting-fixed.
    #[arg(long)]
    pub s: Option<usize>,
    /// Degree for the Chebyshev baseline.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Interpolation interval `lo,hi` for the Chebyshev baseline (default: a spectral enclosure).
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<String>,
    /// Use the symmetric rank-b splitting in dc.
    #[arg(long)]
    pub spd_rank_b: bool,
    #[arg(long, default_value_t = 60)]
    pub max_poles: usize,
    #[arg(long = "ref", value_enum, default_value = "none")]
    pub reference: Reference,
    /// Largest n for which the dense reference is computed.
    #[arg(long, default_value_t = 4096)]
    pub ref_cap: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FunmArgs {
    /// Generator spec such as anderson:n=512,seed=7.
    #[arg(long, conflicts_with = "input")]
    pub gen: Option<String>,
    /// Matrix Market input file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Result file: HSS container for dc full, Matrix Market for banded results, text otherwise.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Metrics CSV file (stdout if absent).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Generator spec; `n` is overridden by --n.
    #[arg(long)]
    pub gen: String,
    /// Comma-separated sizes; an empty list gives a header-only CSV.
    #[arg(long)]
    pub n: Option<String>,
    /// Comma-separated values of the method parameter (s, degree or eps).
    #[arg(long)]
    pub params: Option<String>,
    #[command(flatten)]
    pub method: MethodArgs,
    /// CSV file (stdout if absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    pub spec: String,
    #[arg(long)]
    pub output: PathBuf,
}
