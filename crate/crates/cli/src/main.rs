use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relureach::reach::{ExportForm, ReachMode};
use relureach::{Activation, Error};

mod commands;

/// Exact reachable sets and safety verification for ReLU networks.
#[derive(Parser)]
#[command(name = "relureach", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random network with uniform [-1, 1] weights.
    GenNet(GenNetArgs),
    /// Compute the output reachable set of a network over an input set.
    Reach(ReachArgs),
    /// Check whether any reachable output lies in an unsafe set.
    Verify(VerifyArgs),
    /// Check sampled forward outputs against a reach file.
    SampleCheck(SampleCheckArgs),
    /// Summarize a reach file.
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenNetArgs {
    /// Layer widths, input first, e.g. 3,7,7,2.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value = "relu")]
    hidden: Activation,
    #[arg(long, default_value = "linear")]
    output: Activation,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReachFlags {
    #[arg(long, default_value = "neuronwise")]
    mode: ReachMode,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = relureach::reach::DEFAULT_REGION_CAP)]
    region_cap: usize,
}

#[derive(Args)]
struct ReachArgs {
    net: PathBuf,
    input: PathBuf,
    #[command(flatten)]
    flags: ReachFlags,
    #[arg(long, default_value = "regions")]
    export: ExportForm,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Timing JSON destination; standard error if omitted.
    #[arg(long)]
    timing: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    net: PathBuf,
    input: PathBuf,
    spec: PathBuf,
    #[command(flatten)]
    flags: ReachFlags,
}

#[derive(Args)]
struct SampleCheckArgs {
    net: PathBuf,
    input: PathBuf,
    reach: PathBuf,
    /// Grid with N points per axis.
    #[arg(long, group = "strategy")]
    grid: Option<usize>,
    /// Grid with a fixed step per axis.
    #[arg(long, group = "strategy")]
    grid_step: Option<f64>,
    /// N uniform random samples.
    #[arg(long, group = "strategy", requires = "seed")]
    uniform: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = relureach::oracle::SOUNDNESS_TOL)]
    tol: f64,
    /// Report JSON destination; standard output if omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// CSV dump of inputs, outputs and membership flags.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    reach: PathBuf,
    /// Network the reach file was computed for; adds worst-case count bounds.
    #[arg(long)]
    net: Option<PathBuf>,
}

fn exit_code_for(e: &Error) -> u8 {
    if e.is_resource_cap() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("REACH_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenNet(a) => commands::gen_net(a),
        Command::Reach(a) => commands::reach(a),
        Command::Verify(a) => commands::verify(a),
        Command::SampleCheck(a) => commands::sample_check(a),
        Command::Stats(a) => commands::stats(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
