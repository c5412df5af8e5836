use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use balsp::generate;
use balsp::io::{parse_dimacs, write_dimacs};
use balsp::min_balance::{MinBalanceConfig, Precheck};
use balsp::pipeline::{preprocess, Preprocessed};
use balsp::Graph;

mod bench;
mod report;
mod verify;

/// Shortest paths through min-balanced reduced costs.
#[derive(Parser)]
#[command(name = "balsp", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a min-balancing potential and the reduced costs.
    Balance(Common),
    /// Single-source distances.
    Sssp {
        #[command(flatten)]
        common: Common,
        /// Source node, 1-indexed.
        #[arg(short, long)]
        source: usize,
        /// Compare against Dijkstra.
        #[arg(long)]
        check: bool,
    },
    /// All-pairs distances.
    Apsp {
        #[command(flatten)]
        common: Common,
        /// Compare against Floyd-Warshall (or Dijkstra above 512 nodes).
        #[arg(long)]
        check: bool,
        /// Emit one row per source as it is computed.
        #[arg(long)]
        stream: bool,
    },
    /// Run invariant suites against the oracles; exit status 1 on failure.
    Verify(verify::VerifyArgs),
    /// Scaling measurements as CSV or JSON.
    Bench(bench::BenchArgs),
    /// Write a seeded random graph in DIMACS format.
    Generate {
        #[arg(long, value_enum, default_value_t = Family::StronglyConnected)]
        family: Family,
        #[arg(short, long, default_value_t = 16)]
        n: usize,
        #[arg(short, long, default_value_t = 48)]
        m: usize,
        #[arg(long, default_value_t = 1_000_000)]
        max_cost: i128,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
pub struct Common {
    /// DIMACS graph file, or '-' for stdin.
    input: PathBuf,
    /// Balance parameter; the result is (1 + 1/2^(rho-1))-min-balanced.
    #[arg(long, default_value_t = 0)]
    rho: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Level::Sampled)]
    level: Level,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Off,
    Sampled,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    StronglyConnected,
    Arbitrary,
    Multiscale,
    Clustered,
    BoundedDegree,
}

pub fn config(rho: u32, level: Level, seed: u64) -> MinBalanceConfig {
    match level {
        Level::Off => MinBalanceConfig {
            rho,
            precheck: Precheck::Skip,
            audit: false,
        },
        Level::Sampled => MinBalanceConfig {
            rho,
            precheck: Precheck::Sampled(seed),
            audit: false,
        },
        Level::Full => MinBalanceConfig {
            rho,
            precheck: Precheck::Sampled(seed),
            audit: true,
        },
    }
}

pub fn load(path: &Path) -> Result<Graph> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    let ing = parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))?;
    for w in &ing.warnings {
        eprintln!("warning: {w}");
    }
    Ok(ing.graph)
}

fn prepare(c: &Common) -> Result<(Graph, Preprocessed)> {
    let g = load(&c.input)?;
    let pre = preprocess(&g, &config(c.rho, c.level, c.seed))?;
    Ok((g, pre))
}

fn run(cli: Cli) -> Result<bool> {
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let ok = match cli.cmd {
        Cmd::Balance(c) => {
            let (g, pre) = prepare(&c)?;
            report::balance(&mut out, &g, &pre, c.format, c.level)?
        }
        Cmd::Sssp {
            common,
            source,
            check,
        } => {
            if common.rho != 0 {
                bail!("shortest paths need --rho 0");
            }
            let (g, pre) = prepare(&common)?;
            if source == 0 || source > g.node_count() {
                bail!("source {source} out of range 1..={}", g.node_count());
            }
            report::sssp(&mut out, &g, &pre, source - 1, check, common.format)?
        }
        Cmd::Apsp {
            common,
            check,
            stream,
        } => {
            if common.rho != 0 {
                bail!("shortest paths need --rho 0");
            }
            let (g, pre) = prepare(&common)?;
            report::apsp(&mut out, &g, &pre, check, stream, common.format)?
        }
        Cmd::Verify(args) => verify::run(&mut out, &args)?,
        Cmd::Bench(args) => bench::run(&mut out, &args)?,
        Cmd::Generate {
            family,
            n,
            m,
            max_cost,
            seed,
        } => {
            if n == 0 {
                bail!("need at least one node");
            }
            let mut rng = generate::rng(seed);
            let g = match family {
                Family::StronglyConnected => {
                    generate::strongly_connected(&mut rng, n, m, 1, max_cost)
                }
                Family::Arbitrary => generate::arbitrary(&mut rng, n, m, 0, max_cost),
                Family::Multiscale => generate::multiscale(&mut rng, n, m, 30),
                Family::Clustered => generate::clustered(&mut rng, n.div_ceil(8), 8, 20),
                Family::BoundedDegree => {
                    generate::bounded_degree(&mut rng, n, (m / n).max(1), 1, max_cost)
                }
            };
            out.write_all(write_dimacs(&g).as_bytes())?;
            true
        }
    };
    out.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
