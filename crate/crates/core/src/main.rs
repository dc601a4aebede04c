use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rfim::harness::{self, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "rfim", version, about = "Random field Ising model experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact identities and inequalities on tiny graphs.
    OracleVerify(Common),
    /// Seeded runs of the three couplings with pathwise assertions.
    CouplingVerify(Common),
    /// Bracket the Kertész line at fixed beta.
    KerteszScan(Common),
    /// Truncated two-point function against distance, with a rate fit.
    DecayFit(Common),
    /// Field strength thresholds against beta.
    ThresholdTable(Common),
    /// Boundary sensitivity of the center marginal against box size.
    MixingTv(Common),
    /// Crossing probabilities around the percolation thresholds in use.
    VerifyConstants(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Largest exact enumeration, in bits.
    #[arg(long)]
    cap: Option<usize>,
    /// Extra `key=value` settings, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::OracleVerify(c) => (Experiment::OracleVerify, c),
            Command::CouplingVerify(c) => (Experiment::CouplingVerify, c),
            Command::KerteszScan(c) => (Experiment::KerteszScan, c),
            Command::DecayFit(c) => (Experiment::DecayFit, c),
            Command::ThresholdTable(c) => (Experiment::ThresholdTable, c),
            Command::MixingTv(c) => (Experiment::MixingTv, c),
            Command::VerifyConstants(c) => (Experiment::VerifyConstants, c),
        }
    }
}

fn build_config(kind: Experiment, args: Common) -> rfim::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p, Some(kind))?,
        None => ExperimentConfig::defaults(kind),
    };
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| rfim::Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = args.out {
        cfg.out = o;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if let Some(c) = args.cap {
        cfg.cap = c;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().command.split();
    let cfg = match build_config(kind, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cfg.threads > 0 {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    match harness::run(&cfg) {
        Ok(report) => {
            for n in &report.notes {
                println!("note: {n}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            let failed = report.failures().count();
            println!("{kind}: {} checks, {failed} failed", report.checks.len());
            for c in report.failures().take(20) {
                println!(
                    "  FAIL {} [{} draw {}]: value {:.6e} bound {:.6e}",
                    c.check, c.instance, c.draw, c.value, c.bound
                );
            }
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
