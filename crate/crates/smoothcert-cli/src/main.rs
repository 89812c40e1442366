//! Single entry point for the certification workflow: dataset generation,
//! base-classifier training, certification runs, experiment sweeps, the
//! oracle self-check suite, and a node-classification demo.
//!
//! Exit codes: 0 success, 1 configuration/usage error, 2 internal failure
//! (including oracle violations, which mean the build is unsound).

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

mod commands;

#[derive(Parser)]
#[command(
    name = "smoothcert",
    about = "Certified L0 robustness for graph classifiers via edge-flip smoothing",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the eight-family synthetic topology dataset (JSONL).
    GenData(GenDataArgs),
    /// Train the GCN base classifier on a JSONL dataset.
    Train(TrainArgs),
    /// Certify every graph of a dataset under a trained model.
    Certify(CertifyArgs),
    /// Produce certified-accuracy curves over a beta/alpha/samples sweep.
    Sweep(SweepArgs),
    /// Run the enumeration-oracle self-checks and print a JSON report.
    OracleCheck(OracleCheckArgs),
    /// Stochastic-block-model node-classification demo with certification.
    NodeDemo(NodeDemoArgs),
}

/// Flags shared by every subcommand: optional JSON config file (flags win
/// on conflict) and the output directory.
#[derive(Args)]
struct CommonArgs {
    /// JSON file with the same keys as the flags; explicit flags override.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; the resolved configuration is written next to
    /// the outputs as config.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenDataArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    per_family: Option<usize>,
    #[arg(long)]
    train_per_family: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Training dataset (JSON Lines).
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Train on freshly noise-flipped topologies at this beta each epoch.
    #[arg(long)]
    noise_beta: Option<f64>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    d_max: Option<usize>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Monte Carlo samples per instance (M).
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Radius scan cap (default: the instance bit length).
    #[arg(long)]
    l_max: Option<u64>,
    /// Scan every weight up to the cap and report non-monotone patterns.
    #[arg(long)]
    paranoid: bool,
    /// Split samples into selection and estimation halves.
    #[arg(long)]
    two_phase: bool,
    /// Worker threads (0 = all cores). Results are independent of it.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which parameter to sweep: beta, alpha, or samples.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Values for --kind beta.
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Values for --kind alpha.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Values for --kind samples.
    #[arg(long, value_delimiter = ',')]
    samples_list: Option<Vec<u64>>,
    /// Base noise level used by non-beta sweeps.
    #[arg(long)]
    beta: Option<f64>,
    /// Base significance level used by non-alpha sweeps.
    #[arg(long)]
    alpha: Option<f64>,
    /// Base sample count used by non-samples sweeps.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Curves cover r = 0..=r_max.
    #[arg(long)]
    r_max: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct OracleCheckArgs {
    /// Enumeration width cap for the region and bound oracles.
    #[arg(long, default_value_t = 12)]
    max_bits: usize,
    /// Random classifiers for the end-to-end soundness check.
    #[arg(long, default_value_t = 100)]
    e2e_classifiers: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NodeDemoArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long)]
    p_in: Option<f64>,
    #[arg(long)]
    p_out: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    noise_beta: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::GenData(args) => commands::gen_data(args),
        Command::Train(args) => commands::train(args),
        Command::Certify(args) => commands::certify(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::OracleCheck(args) => commands::oracle_check(args),
        Command::NodeDemo(args) => commands::node_demo(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn exit_code(e: &smoothcert::Error) -> i32 {
    use smoothcert::Error::*;
    match e {
        InvalidInput(_) | InvalidParameter(_) | Config(_) | Io(_) | Json(_)
        | OracleTooLarge { .. } => 1,
        _ => 2,
    }
}
