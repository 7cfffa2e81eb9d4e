use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "degreelab", version, about = "Degree and thresholded nonlocal energy of sphere maps")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "DEGREELAB_THREADS")]
    pub threads: Option<usize>,

    /// Root seed; per-component streams derive from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Fill the `runtime_ms` columns (output is then not reproducible).
    #[arg(long, global = true)]
    pub timing: bool,

    /// Re-run the configuration echoed in a previous output file.
    #[arg(long)]
    pub replay: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Everything that determines an output body.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub format: Format,
    pub timing: bool,
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Degree of a sampled map (winding number or Kronecker integral).
    Degree(DegreeArgs),
    /// Thresholded energy by pair quadrature or Monte Carlo.
    Energy(EnergyArgs),
    /// Degree/energy ratios over a family of maps and a δ grid.
    Sweep(SweepArgs),
    /// Annealing search for maps with a large ratio at fixed degree.
    Search(SearchArgs),
    /// Ratios in the regime δ ≥ ℓ_d.
    Probe(ProbeArgs),
    /// Linear extrapolation of E_δ / ∫|∇g|^d to δ = 0.
    Limit(LimitArgs),
    /// Average extension u(X) at a point of the open ball.
    Extension(ExtensionArgs),
    /// Stopping radius ρ at a point or at every grid node.
    Rho(RhoArgs),
    /// Both sides of |deg g| ≤ C ∫_{ρ<1} ρ^{-d}.
    RhoBound(RhoBoundArgs),
    /// Mean increments against the thresholded integral on an interval or disk.
    Lemma1(Lemma1Args),
    /// Write a grid in the plain-text format.
    Grids(GridsArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DegreeArgs {
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub grid: String,
    /// Also count signed preimages of this point (`x,y[,z]`).
    #[arg(long)]
    pub target: Option<String>,
    /// Scan samples (d = 1) or icosphere level (d = 2) for the preimage count.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EnergyArgs {
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub grid: String,
    /// One value, a list `a,b,...`, or `log:a:b:n` / `lin:a:b:n`.
    #[arg(long)]
    pub delta: String,
    /// Omit the δ^d factor.
    #[arg(long)]
    pub unscaled: bool,
    /// Monte Carlo with `n[,seed]` samples instead of quadrature.
    #[arg(long)]
    pub mc: Option<String>,
    /// Threshold a single component (1-based) instead of the full map.
    #[arg(long)]
    pub component: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub d: usize,
    /// `default` for the built-in population.
    #[arg(long)]
    pub families: Option<String>,
    /// Additional map specs (repeatable).
    #[arg(long = "map")]
    pub maps: Vec<String>,
    #[arg(long, default_value = "log:0.05:1:10")]
    pub deltas: String,
    /// Default: `circle:8192` for d = 1, `ico:6` for d = 2.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SearchArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub degree: i64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
    #[arg(long)]
    pub search_grid: Option<String>,
    #[arg(long)]
    pub verify_grid: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ProbeArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub delta: f64,
    /// Maps in escalation order (default: `bubble:k=1,lambda=` 1, 10, 100).
    #[arg(long = "map")]
    pub maps: Vec<String>,
    /// Default: `circle:8192` for d = 1, `ico:5` for d = 2.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LimitArgs {
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub grid: String,
    /// Strictly decreasing.
    #[arg(long, default_value = "0.4,0.2,0.1,0.05")]
    pub deltas: String,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExtensionArgs {
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub grid: String,
    /// `X1,X2,X3` inside the ball, or `x,y,z,t` for `X = (1 - t) x / |x|`.
    #[arg(long)]
    pub point: String,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RhoArgs {
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub grid: String,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// A single sphere point `x,y[,z]`; default is every grid node.
    #[arg(long)]
    pub point: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RhoBoundArgs {
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub grid: String,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainArg {
    Interval,
    Disk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionArg {
    /// Random piecewise-linear functions.
    RandomPl,
    /// Random trigonometric polynomials.
    RandomTrig,
    /// f(x) = x_1 (one trial).
    Identity,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Lemma1Args {
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value = "0.1")]
    pub delta: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Nodes per dimension.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = DomainArg::Interval)]
    pub domain: DomainArg,
    #[arg(long, value_enum, default_value_t = FunctionArg::RandomPl)]
    pub function: FunctionArg,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GridsArgs {
    #[arg(long)]
    pub grid: String,
    /// One summary row instead of the full grid.
    #[arg(long)]
    pub summary: bool,
}
