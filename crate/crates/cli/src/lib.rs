//! Command-line front end. `run` parses arguments, dispatches to the library
//! and returns the process exit code: 0 when every check passes, 1 when a
//! check fails, 2 on usage, I/O or parse errors.

mod commands;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use report::{Format, Report, ReportParseError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: ribe_core::Error,
    },
    #[error(transparent)]
    Core(#[from] ribe_core::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "ribe", version, about = "Finite metric space laboratory")]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Accepted for compatibility; results never depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct SeedArg {
    #[arg(long, env = "RIBE_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph, metric, ultrametric or cube function.
    Gen(GenArgs),
    /// Convert a graph to its metric, or summarize a metric file.
    Metric(MetricArgs),
    /// Build a distance oracle and dump it.
    BuildOracle(BuildOracleArgs),
    /// Approximate distance between two points.
    Query(QueryArgs),
    /// Approximate ranking around a point.
    Rank(RankArgs),
    /// Check an oracle against its metric on every pair.
    Verify(VerifyArgs),
    /// Query latency, structure size and distortion histogram.
    Bench(BenchArgs),
    /// Markov chain functionals.
    #[command(subcommand)]
    Walk(WalkCommand),
    /// Girth graph spectra.
    #[command(subcommand)]
    Spectral(SpectralCommand),
    /// Hypercube analysis.
    #[command(subcommand)]
    Cube(CubeCommand),
    /// Extract an ultrametric skeleton.
    Skeleton(SkeletonArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).multiple(false))]
pub struct GenArgs {
    /// Named graph: petersen, heawood, tutte_coxeter, cycle(m), torus(a,b), hypercube(d).
    #[arg(long, group = "source")]
    pub named: Option<String>,
    /// Random regular graph on this many vertices.
    #[arg(long, group = "source")]
    pub regular: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long, default_value_t = 0)]
    pub girth: usize,
    /// Laakso graph of this level.
    #[arg(long, group = "source")]
    pub laakso: Option<usize>,
    /// Complete tree with this root degree; see `--depth`.
    #[arg(long, group = "source")]
    pub tree: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Uniform point cloud in the unit cube of dimension `--dim`, as a metric.
    #[arg(long, group = "source")]
    pub cloud: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Random ultrametric on this many points.
    #[arg(long, group = "source")]
    pub hst: Option<usize>,
    /// Random function on the cube of this dimension into R^`--codim`.
    #[arg(long, group = "source")]
    pub cube_function: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub codim: usize,
    /// Random reversible chain on this many states.
    #[arg(long, group = "source")]
    pub chain: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("metric_source").required(true).multiple(false))]
pub struct MetricArgs {
    /// Graph file to turn into its shortest-path metric.
    #[arg(long, group = "metric_source")]
    pub graph: Option<PathBuf>,
    /// Metric file to validate and summarize.
    #[arg(long, group = "metric_source")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildOracleArgs {
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub oracle: PathBuf,
    #[arg(long)]
    pub i: usize,
    #[arg(long)]
    pub j: usize,
    /// Also report the true distance and the stretch.
    #[arg(long)]
    pub metric: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub oracle: PathBuf,
    /// The metric the oracle was built from; ranking needs its distances.
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long)]
    pub x: usize,
    /// 1-based rank to look up.
    #[arg(long)]
    pub i: Option<usize>,
    /// Point whose rank to report.
    #[arg(long)]
    pub u: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub oracle: PathBuf,
    #[arg(long)]
    pub metric: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub oracle: PathBuf,
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    pub queries: usize,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct SkeletonArgs {
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum WalkCommand {
    /// Exact drift profile `E d(Z_t, Z_0)`, or sampled on the lamplighter group.
    Drift(DriftArgs),
    /// Markov type ratio of a chain under a map.
    Type(TypeArgs),
    /// Markov convexity lower bound.
    Convexity(ConvexityArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("space").required(true).multiple(false))]
pub struct DriftArgs {
    /// Stationary walk on this graph under its own metric.
    #[arg(long, group = "space")]
    pub graph: Option<PathBuf>,
    /// Walk on the Hamming cube of this dimension.
    #[arg(long, group = "space")]
    pub hypercube: Option<usize>,
    /// Outward walk on the complete tree with this root degree and `--depth`.
    #[arg(long, group = "space")]
    pub tree: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Sampled walk on the lamplighter group over Z.
    #[arg(long, group = "space")]
    pub lamplighter: bool,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 16)]
    pub t_max: usize,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("chain_src").required(true).multiple(false))]
#[command(group = clap::ArgGroup::new("target").required(true).multiple(false))]
pub struct TypeArgs {
    #[arg(long, group = "chain_src")]
    pub chain: Option<PathBuf>,
    /// Random reversible chain on this many states.
    #[arg(long, group = "chain_src")]
    pub states: Option<usize>,
    /// Metric on the states.
    #[arg(long, group = "target")]
    pub metric: Option<PathBuf>,
    /// Random points in R^d as images of the states.
    #[arg(long, group = "target")]
    pub euclidean: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 50)]
    pub t_max: usize,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("space").required(true).multiple(false))]
pub struct ConvexityArgs {
    /// Outward walk on the complete tree with this root degree and `--depth`.
    #[arg(long, group = "space")]
    pub tree: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Walk down the Laakso graph of this level.
    #[arg(long, group = "space")]
    pub laakso: Option<usize>,
    /// Chain file, with `--metric` on its states.
    #[arg(long, group = "space", requires = "metric")]
    pub chain: Option<PathBuf>,
    #[arg(long)]
    pub metric: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Defaults to the depth of the tree or `4^k` for Laakso.
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum SpectralCommand {
    /// The polynomial counting non-backtracking walks, and its roots.
    Geronimus {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
    },
    /// Check `P_m(A) = A_(m)` in integer arithmetic.
    Identity(SpectralArgs),
    /// Smallest eigenvalue of the distance-m graph against its floor.
    Floor(SpectralArgs),
    /// Self-mixing bound on one subset, or on all subsets of a small graph.
    Mixing {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated vertex ids; omit to scan every subset.
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<usize>>,
    },
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Degree; defaults to the degree of the graph.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Plain,
    Enflo,
    Bmw,
}

#[derive(Debug, Subcommand)]
pub enum CubeCommand {
    /// Walsh coefficients, written in the cube function format.
    Transform {
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Heat semigroup at time `--t`, with contraction checks.
    Heat {
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        t: f64,
        /// `p >= 1` or `inf`.
        #[arg(long, value_parser = commands::parse_norm, default_value = "2")]
        norm: ribe_core::cube::Norm,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact Pisier ratio against the heat-flow factor.
    Pisier {
        #[arg(long)]
        function: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, value_parser = commands::parse_norm, default_value = "2")]
        norm: ribe_core::cube::Norm,
    },
    /// Smallest type constant of the function.
    Type {
        #[arg(long)]
        function: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_enum, default_value_t = VariantArg::Enflo)]
        variant: VariantArg,
        #[arg(long, value_parser = commands::parse_norm, default_value = "2")]
        norm: ribe_core::cube::Norm,
    },
    /// Cotype constant of random two-valued maps on the torus `Z_m^n`.
    Cotype {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
}

/// Parses `args` (program name first) and runs the command, writing the
/// report or data to stdout and errors to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli, &argv) {
        Ok(out) => {
            print!("{}", out.text);
            match out.report {
                Some(r) if !r.all_pass() => 1,
                _ => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
