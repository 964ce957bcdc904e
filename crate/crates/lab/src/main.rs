use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sidecode_lab::config::{validate, ExperimentConfig, ExperimentKind};
use sidecode_lab::harness;
use sidecode_lab::parallel::Runner;
use sidecode_lab::Result;

#[derive(Parser, Debug)]
#[command(name = "sidecode", version, about = "Syndrome source and channel coding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Channel capacity, optionally restricted to few signaling inputs
    Capacity(Common),
    /// Certify hash parameters of a matrix ensemble
    HashVerify(Common),
    /// Syndrome source coding error against rate and block length
    Sw(Common),
    /// Channel code search over message maps
    Channel(Common),
    /// MAP against posterior-sampling decisions on random problems
    Decision(Common),
    /// Total-variation test of the constrained sampler
    CrngTest(Common),
}

#[derive(clap::Args, Debug)]
struct Common {
    /// TOML experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (overrides the config; stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores (overrides the config)
    #[arg(long)]
    threads: Option<usize>,
}

fn run(kind: ExperimentKind, args: Common) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.seed = args.seed.or(cfg.seed);
    cfg.output = args.out.or(cfg.output);
    cfg.threads = args.threads.or(cfg.threads);
    let resolved = cfg.resolve(Some(kind))?;
    for finding in validate(&resolved)? {
        eprintln!("{finding}");
    }
    let runner = Runner::new(resolved.threads);
    let table = harness::run(&resolved, &runner)?;
    match &resolved.output {
        Some(path) => table.write_file(path, &format!("sidecode {kind}, seed {}", resolved.seed)),
        None => match io::stdout().lock().write_all(table.to_csv()?.as_bytes()) {
            // a closed pipe (e.g. `| head`) is not a failure of the run
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Capacity(a) => (ExperimentKind::Capacity, a),
        Command::HashVerify(a) => (ExperimentKind::HashVerify, a),
        Command::Sw(a) => (ExperimentKind::Sw, a),
        Command::Channel(a) => (ExperimentKind::Channel, a),
        Command::Decision(a) => (ExperimentKind::Decision, a),
        Command::CrngTest(a) => (ExperimentKind::CrngTest, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
