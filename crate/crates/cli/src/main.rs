use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fmradar::cli_io::{self, Outcome, RunConfig};

/// Passive FM radar simulator: IFFT and MUSIC range detectors.
#[derive(Parser)]
#[command(name = "fmradar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed of the run (base seed for batch commands).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one two-target scenario.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Resolution sweep reduced to the per-channel-count table.
    Table1 {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo delay error per channel count and method.
    Fig10 {
        #[command(flatten)]
        common: Common,
        /// Monte Carlo iterations (overrides the config).
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Resolve rate for every channel count, method and separation.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
}

fn batch_config(c: &Common) -> fmradar::Result<RunConfig> {
    cli_io::load_run_config(c.config.as_deref(), &[], c.seed)
}

fn run(cli: Cli) -> fmradar::Result<Outcome> {
    match cli.command {
        Command::Simulate { common } => {
            let Some(path) = common.config.as_deref() else {
                return Err(fmradar::Error::MissingKeys(
                    cli_io::SIMULATE_REQUIRED.iter().map(|k| k.to_string()).collect(),
                ));
            };
            cli_io::cmd_simulate(path, &common.out, common.seed)
        }
        Command::Table1 { common } => cli_io::cmd_table1(&batch_config(&common)?, &common.out),
        Command::Sweep { common } => cli_io::cmd_sweep(&batch_config(&common)?, &common.out),
        Command::Fig10 { common, iterations } => {
            let mut cfg = batch_config(&common)?;
            if let Some(n) = iterations {
                cfg.iterations = n;
                cfg.validate()?;
            }
            cli_io::cmd_fig10(&cfg, &common.out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for p in &outcome.manifest.output_paths {
                println!("wrote {}", p.display());
            }
            println!("wall time {:.2} s", outcome.manifest.wall_time_s);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error kind={} msg={}", e.kind(), msg);
            ExitCode::FAILURE
        }
    }
}
