use std::path::PathBuf;

use aecode::codec::{Maintenance, RoundOrder, DEFAULT_BLOCK_SIZE};
use aecode::me::{MAX_PATTERN, MAX_WINDOW};
use aecode::CodeParams;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod analyze;
mod encode;
mod simulate;

#[derive(Parser, Debug)]
#[command(
    name = "aecode",
    version,
    about = "Alpha entanglement codes: encode, repair, simulate disasters, analyze minimal erasures"
)]
struct Cli {
    /// Cap on worker threads (defaults to one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split a file (or synthetic data) into blocks, entangle them and write a block store.
    Encode(EncodeArgs),
    /// Rebuild missing blocks of a block store and optionally decode the original file.
    Repair(RepairArgs),
    /// Run disaster-recovery scenarios and print summary tables.
    Simulate(SimulateArgs),
    /// Search for minimal erasure patterns and report |ME(x)|.
    AnalyzeMe(AnalyzeArgs),
    /// List the parities that must be recomputed to alter one data block.
    Tamper(TamperArgs),
}

/// Code parameters, either as `--code AE(3,2,5)` or as `--alpha/--s/--p`.
#[derive(Args, Debug, Clone)]
struct CodeArgs {
    /// Code as `AE(a,s,p)`, `a,s,p` or `AE(1,-,-)`.
    #[arg(long, conflicts_with_all = ["alpha", "s", "p"])]
    code: Option<String>,
    #[arg(long)]
    alpha: Option<u32>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    p: Option<u32>,
}

impl CodeArgs {
    fn is_set(&self) -> bool {
        self.code.is_some() || self.alpha.is_some()
    }

    fn params(&self) -> Result<CodeParams> {
        if let Some(code) = &self.code {
            return Ok(code.parse()?);
        }
        match (self.alpha, self.s, self.p) {
            (Some(1), None, None) => Ok(CodeParams::single()),
            (Some(alpha), s, p) => Ok(CodeParams::new(alpha, s.unwrap_or(1), p.unwrap_or(0))?),
            (None, None, None) => bail!("code parameters required: --code or --alpha/--s/--p"),
            _ => bail!("--s and --p need --alpha"),
        }
    }
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// File to encode.
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Encode N blocks of seeded random bytes instead of a file.
    #[arg(long, value_name = "N")]
    synthetic: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE)]
    block_size: usize,
    /// Seed for synthetic data.
    #[arg(long, env = "AECODE_SEED", default_value_t = 1)]
    seed: u64,
    /// Store directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RepairArgs {
    /// Store directory written by `encode`.
    #[arg(long)]
    store: PathBuf,
    #[arg(long, value_enum, default_value_t = MaintenanceArg::Full)]
    maintenance: MaintenanceArg,
    /// Write the decoded original file here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Reed-Solomon code as `k,m`.
    #[arg(long, value_name = "K,M")]
    rs: Option<String>,
    /// n-way replication.
    #[arg(long, value_name = "N")]
    replicas: Option<u32>,
    /// Extra schemes such as `AE(3,2,5)`, `RS(10,4)` or `3-way`; repeatable.
    #[arg(long)]
    scheme: Vec<String>,
    /// Data blocks per scenario.
    #[arg(long, default_value_t = aecode::sim::DESK_BLOCKS)]
    blocks: u64,
    /// Use the full evaluation volume of one million data blocks.
    #[arg(long, conflicts_with = "blocks")]
    full_scale: bool,
    #[arg(long, default_value_t = 100)]
    locations: u32,
    /// Percentages of failed locations.
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
    fractions: Vec<f64>,
    #[arg(long, value_delimiter = ',', env = "AECODE_SEED", default_value = "1,2,3,4,5")]
    seeds: Vec<u64>,
    #[arg(long, value_enum, default_value_t = MaintenanceArg::Full)]
    maintenance: MaintenanceArg,
    /// Whether repairs become usable within the round that made them.
    #[arg(long, value_enum, default_value_t = RoundsArg::Sequential)]
    rounds: RoundsArg,
    /// CSV file with one row per scenario.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for whitespace-separated per-metric tables for plotting.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Record wall times in the CSV (makes it differ between runs).
    #[arg(long)]
    timings: bool,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Further codes to analyze; repeatable.
    #[arg(long = "grid", value_name = "CODE")]
    grid: Vec<String>,
    /// Data loss values x.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    x: Vec<usize>,
    /// Data blocks a pattern may span.
    #[arg(long, default_value_t = MAX_WINDOW)]
    window: u64,
    #[arg(long, default_value_t = MAX_PATTERN)]
    max_size: usize,
    /// Search steps per code and x before giving up.
    #[arg(long, default_value_t = 200_000_000)]
    budget: u64,
    /// CSV output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TamperArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Index of the data block to alter.
    #[arg(long)]
    node: u64,
    /// Last data block written.
    #[arg(long)]
    window_end: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MaintenanceArg {
    Full,
    Minimal,
}

impl From<MaintenanceArg> for Maintenance {
    fn from(m: MaintenanceArg) -> Self {
        match m {
            MaintenanceArg::Full => Maintenance::Full,
            MaintenanceArg::Minimal => Maintenance::Minimal,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum RoundsArg {
    Sequential,
    Snapshot,
}

impl From<RoundsArg> for RoundOrder {
    fn from(r: RoundsArg) -> Self {
        match r {
            RoundsArg::Sequential => RoundOrder::Sequential,
            RoundsArg::Snapshot => RoundOrder::Snapshot,
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Encode(args) => encode::encode(args),
        Command::Repair(args) => encode::repair(args),
        Command::Simulate(args) => simulate::simulate(args),
        Command::AnalyzeMe(args) => analyze::analyze(args),
        Command::Tamper(args) => tamper(args),
    }
}

fn tamper(args: TamperArgs) -> Result<()> {
    let params = args.code.params()?;
    if args.node == 0 || args.node > args.window_end {
        bail!("need 1 <= node <= window-end");
    }
    let set = aecode::codec::tamper_set(args.node, args.window_end, &params);
    for id in &set {
        println!("{}", id.key(&params));
    }
    println!("{} parities", set.len());
    Ok(())
}
