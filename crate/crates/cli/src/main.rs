//! `gridac`: exact counts, chain decompositions, supersaturation audits,
//! container bounds and asymptotic tables for the grid `[n]^D`.
//!
//! Exit status: 0 on success, 1 when a checked bound or invariant fails,
//! 2 on a usage error, 3 when a size cap is exceeded.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grid_antichains::{Error, Limits};
use serde::Serialize;
use serde_json::{json, Value};

use commands::Outcome;

#[derive(Debug, Parser, Serialize)]
#[command(name = "gridac", version, about = "Antichains, chains and containers in the grid [n]^D")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the record here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Cap on the number of objects any exhaustive enumeration may produce.
    #[arg(long, global = true, env = "GRIDAC_CAP")]
    pub cap: Option<u64>,

    /// Add the wall-clock duration to the record. Off by default so that
    /// identical invocations give byte-identical output.
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Count antichains of [n]^D, or d-dimensional partitions P_d(n).
    Count(CountArgs),
    /// Sample random chain decompositions and check them.
    Chains(ChainsArgs),
    /// Audit the comparable-pair bound for large sets.
    Supersat(SupersatArgs),
    /// Container bound, premise audit and (optionally) the family itself.
    Containers(ContainersArgs),
    /// Gaussian estimate of the middle layer against the exact value.
    Asym(AsymArgs),
    /// Weighted cover graph between levels i and i+1.
    LevelGraph(LevelArgs),
    /// Exact matching distribution used for levels i and i+1.
    Distribution(LevelArgs),
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("dims").required(true).args(["dim", "d"])))]
pub struct CountArgs {
    /// Side length: coordinates range over 0..n.
    #[arg(long)]
    pub n: u32,
    /// Dimension D of the box.
    #[arg(long = "D")]
    pub dim: Option<usize>,
    /// Partition dimension d; counts P_d(n), the antichains of [n]^(d+1).
    #[arg(long = "d")]
    pub d: Option<usize>,
    /// Also compute the container upper bound.
    #[arg(long)]
    pub certified: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ChainsArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long = "D")]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Include the chains of the first sample.
    #[arg(long)]
    pub emit: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SupersatArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long = "D")]
    pub dim: usize,
    /// Minimum rank gap of the counted pairs.
    #[arg(long, default_value_t = 1)]
    pub a: u32,
    #[arg(long, default_value_t = 500)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ContainersArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long = "D")]
    pub dim: usize,
    /// Custom rounds `d:m,d:m,…` with rationals such as `3/7:6`; the
    /// default is the two-round choice driven by D and n.
    #[arg(long)]
    pub rounds: Option<String>,
    /// Random sets per round for the premise audit on larger boxes.
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Build the family and check it against every antichain.
    #[arg(long)]
    pub family: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct AsymArgs {
    #[arg(long)]
    pub n: u32,
    /// A single dimension; overrides the range.
    #[arg(long = "D")]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub from: usize,
    #[arg(long, default_value_t = 20)]
    pub to: usize,
    #[arg(long, default_value_t = 1)]
    pub step: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct LevelArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long = "D")]
    pub dim: usize,
    /// Lower level i; the graph joins V_i and V_(i+1).
    #[arg(long)]
    pub level: usize,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Count(_) => "count",
            Command::Chains(_) => "chains",
            Command::Supersat(_) => "supersat",
            Command::Containers(_) => "containers",
            Command::Asym(_) => "asym",
            Command::LevelGraph(_) => "level-graph",
            Command::Distribution(_) => "distribution",
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } => 3,
        Error::InvalidBox { .. }
        | Error::DimensionMismatch { .. }
        | Error::PointOutOfBox { .. }
        | Error::LevelOutOfRange { .. }
        | Error::OutOfRange(_)
        | Error::Degenerate(_) => 2,
        _ => 1,
    }
}

fn render(cli: &Cli, body: Result<&Outcome, &Error>, elapsed_ms: Option<u128>) -> String {
    let version = env!("CARGO_PKG_VERSION");
    let config = serde_json::to_value(cli).unwrap_or(Value::Null);
    match cli.format {
        Format::Json => {
            let mut record = json!({
                "tool": "gridac",
                "version": version,
                "command": cli.command.name(),
                "config": config,
            });
            match body {
                Ok(o) => {
                    record["status"] = json!(if o.violation { "violation" } else { "ok" });
                    record["result"] = o.json.clone();
                }
                Err(e) => {
                    record["status"] = json!("error");
                    record["error"] = json!({ "kind": e.kind(), "message": e.to_string() });
                }
            }
            if let Some(ms) = elapsed_ms {
                record["duration_ms"] = json!(ms);
            }
            let mut s = serde_json::to_string_pretty(&record).expect("records serialize");
            s.push('\n');
            s
        }
        Format::Csv | Format::Text => {
            let mut s = format!("# gridac {version} {} {}\n", cli.command.name(), config);
            if let Some(ms) = elapsed_ms {
                s.push_str(&format!("# duration_ms {ms}\n"));
            }
            match body {
                Ok(o) => {
                    if o.violation {
                        s.push_str("# status violation\n");
                    }
                    s.push_str(if cli.format == Format::Csv { &o.csv } else { &o.text });
                }
                Err(e) => s.push_str(&format!("# error {}: {e}\n", e.kind())),
            }
            s
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut limits = Limits::default();
    if let Some(cap) = cli.cap {
        limits.enumeration = cap;
    }
    let start = Instant::now();
    let result = commands::run(&cli.command, &limits);
    let elapsed = cli.timing.then(|| start.elapsed().as_millis());
    let text = render(&cli, result.as_ref(), elapsed);
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("gridac: cannot write output: {e}");
        return ExitCode::from(1);
    }
    match result {
        Ok(o) if o.violation => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gridac: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
