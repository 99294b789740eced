use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtwidx::bench::{BoundKind, OutputFormat, SweepKind};

#[derive(Debug, Parser)]
#[command(name = "dtwidx", version, about = "Exact DTW range search over variable-length time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an index file from a UCR-format dataset.
    Build(BuildArgs),
    /// Run an epsilon-range query against an index file.
    Query(QueryArgs),
    /// Measure lower-bound tightness and pruning power.
    #[command(subcommand)]
    Bench(BenchCommand),
}

/// `auto` or a fixed extension length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmaxArg {
    Auto,
    Fixed(usize),
}

impl LmaxArg {
    pub fn fixed(self) -> Option<usize> {
        match self {
            LmaxArg::Auto => None,
            LmaxArg::Fixed(l) => Some(l),
        }
    }
}

impl FromStr for LmaxArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LmaxArg::Auto);
        }
        s.parse()
            .map(LmaxArg::Fixed)
            .map_err(|_| format!("expected 'auto' or a positive integer, got '{s}'"))
    }
}

impl fmt::Display for LmaxArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LmaxArg::Auto => f.write_str("auto"),
            LmaxArg::Fixed(l) => write!(f, "{l}"),
        }
    }
}

/// Band radius and sequence-extension settings shared by `build` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Sakoe-Chiba band radius in samples.
    #[arg(long = "r", conflicts_with = "r_frac")]
    pub r: Option<usize>,
    /// Band radius as a fraction of the longest sequence.
    #[arg(long = "r-frac", default_value_t = 0.10)]
    pub r_frac: f64,
    /// Number of PAA segments.
    #[arg(long = "paa", default_value_t = 16)]
    pub n_paa: usize,
    /// Extension length, or `auto` for the smallest multiple of --paa above the longest sequence.
    #[arg(long, default_value_t = LmaxArg::Auto)]
    pub lmax: LmaxArg,
    /// Constant used to pad sequences to lmax.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub pad: f64,
    /// Truncate each sequence to a random length first (seeded).
    #[arg(long)]
    pub truncate_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// UCR-format dataset (label first, one sequence per line).
    #[arg(long)]
    pub input: PathBuf,
    /// Index file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Maximum entries per R-tree node.
    #[arg(long, default_value_t = 16)]
    pub node_cap: usize,
    /// Add a full-resolution LB_Keogh check before each DTW.
    #[arg(long)]
    pub keogh_filter: bool,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Index file written by `build`.
    #[arg(long)]
    pub index: PathBuf,
    /// Query file: one UCR line (tab-separated, label first) or plain samples.
    #[arg(long)]
    pub query: PathBuf,
    /// Range threshold.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Re-run the query as a linear scan and fail on any difference.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Jsonl => OutputFormat::JsonLines,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonBenchArgs {
    /// UCR-format dataset.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Query sampling seed; generated and reported when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of queries drawn from the dataset.
    #[arg(long, default_value_t = 100)]
    pub queries: usize,
    /// Lower bounds to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "keogh_plus,yi,kim,paa")]
    pub bounds: Vec<BoundKind>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run on one thread.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Mean tightness of each bound.
    Tightness(CommonBenchArgs),
    /// Pruning power of each bound at each epsilon.
    Pruning {
        #[command(flatten)]
        common: CommonBenchArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilon: Vec<f64>,
    },
    /// Sweep one parameter over a grid.
    Sweep {
        #[command(flatten)]
        common: CommonBenchArgs,
        #[arg(long, value_parser = parse_sweep_kind)]
        kind: SweepKind,
        #[arg(long, value_delimiter = ',')]
        epsilon: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        paa_grid: Vec<usize>,
        /// Band radii in samples.
        #[arg(long, value_delimiter = ',', conflicts_with = "r_frac_grid")]
        r_grid: Vec<usize>,
        /// Band radii as fractions of the longest sequence.
        #[arg(long, value_delimiter = ',', default_value = "0.10,0.15,0.20")]
        r_frac_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        lmax_grid: Vec<usize>,
    },
}

fn parse_sweep_kind(s: &str) -> Result<SweepKind, String> {
    s.parse().map_err(|e: dtwidx::Error| e.to_string())
}
