//! `divlab`: exact counts, sweeps and verification suites.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use divlab::parse;

use output::Format;

/// A whole `lo:hi:steps` grid parsed as one value.
type Grid = Vec<f64>;

/// Default master seed for Monte-Carlo estimates.
pub const DEFAULT_SEED: u64 = 0xD1F1_50E5;

#[derive(Parser, Debug)]
#[command(name = "divlab", version, about = "Divisors in a window: counts, sweeps and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Master seed for Monte-Carlo estimates (decimal or 0x-prefixed hex).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED, value_parser = seed)]
    pub seed: u64,

    /// Worker threads; defaults to DIVLAB_THREADS, then the number of CPUs.
    #[arg(long, global = true, env = "DIVLAB_THREADS", value_parser = threads)]
    pub threads: Option<usize>,

    /// Samples per Monte-Carlo chunk. Results depend on this, not on threads.
    #[arg(long, global = true, default_value_t = divlab::order_stats::DEFAULT_CHUNK, value_parser = count)]
    pub chunk: u64,

    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// H(x, y, z): integers up to x with a divisor in (y, z].
    Count {
        #[arg(long, value_parser = count)]
        x: u64,
        #[arg(long, value_parser = real)]
        y: f64,
        #[arg(long, value_parser = real)]
        z: f64,
    },
    /// H(x, y, 2y) and its normalized density over a geometric grid of y.
    Sweep {
        #[arg(long, value_parser = count)]
        x: u64,
        /// lo:hi:steps, both ends included.
        #[arg(long = "y-geom", value_parser = geom)]
        y_geom: Grid,
    },
    /// A(x) with its window-count sandwich.
    Multtable {
        #[arg(long, value_parser = count)]
        x: u64,
    },
    /// L(a), W(a) and the clustering bounds for a ≤ a-max; with --P, the
    /// truncated sum over P-smooth squarefree a in [Q, a-max].
    Cluster {
        #[arg(long = "a-max", value_parser = count)]
        a_max: u64,
        #[arg(long = "P", value_parser = count)]
        p: Option<u64>,
        #[arg(long = "Q", value_parser = count, default_value = "1")]
        q: u64,
        /// Restrict the truncated sum to ω(a) = k.
        #[arg(long, value_parser = count)]
        k: Option<u64>,
    },
    /// Greedy prime blocks up to --x, or the P-weighted partition with --P.
    Blocks {
        #[arg(long, value_parser = count, required_unless_present = "p")]
        x: Option<u64>,
        #[arg(long = "P", value_parser = count, conflicts_with = "x")]
        p: Option<u64>,
    },
    /// Barrier probability Q_k(u, v): exact, Monte-Carlo and bound ratio.
    Orderstats {
        #[arg(long, value_parser = count)]
        k: u64,
        #[arg(long, value_parser = real)]
        u: f64,
        #[arg(long, value_parser = real)]
        v: f64,
        #[arg(long, value_parser = count, default_value = "100000")]
        samples: u64,
        /// Also estimate k!·Vol 𝒯(k, v, γ) (requires integer v).
        #[arg(long, value_parser = count)]
        gamma: Option<u64>,
    },
    /// Exact rational identity checks.
    Identities {
        #[arg(long, value_parser = count, default_value = "8")]
        kmax: u64,
    },
    /// Full verification suite with a machine-readable summary.
    Report {
        #[arg(long, value_parser = count, default_value = "100000")]
        samples: u64,
    },
}

fn count(s: &str) -> Result<u64, String> {
    parse::parse_count(s).map_err(|e| e.to_string())
}

fn real(s: &str) -> Result<f64, String> {
    parse::parse_real(s).map_err(|e| e.to_string())
}

fn geom(s: &str) -> Result<Vec<f64>, String> {
    parse::parse_geom(s).map_err(|e| e.to_string())
}

fn seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16).map_err(|e| format!("bad hex seed: {e}")),
        None => count(t),
    }
}

fn threads(s: &str) -> Result<usize, String> {
    match count(s)? {
        0 => Err("threads must be ≥ 1".into()),
        n => usize::try_from(n).map_err(|e| e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.run.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("divlab: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let (name, result) = commands::execute(&cli.command, &cli.run);
    let artifact = match result {
        Ok(a) => a,
        Err(e) => {
            eprintln!("divlab {name}: {e}");
            return ExitCode::from(2);
        }
    };
    let text = artifact.render(cli.run.format, name, cli.run.seed);
    if let Err(e) = output::write_out(cli.run.out.as_deref(), &text) {
        eprintln!("divlab {name}: cannot write output: {e}");
        return ExitCode::from(1);
    }
    if artifact.verified {
        ExitCode::SUCCESS
    } else {
        eprintln!("divlab {name}: verification failed");
        ExitCode::from(1)
    }
}
