use clap::{Parser, Subcommand};
use rdcp_core::cli::{regen_goldens, run, Overrides, RunError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rdcp", version, about = "Rate-distortion workbench with conditional perception constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file and write its reports.
    Run {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace the config's seed.
        #[arg(long)]
        seed_override: Option<u64>,
        /// Worker threads for independent cells.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Rewrite the golden bitstreams and pipeline files.
    RegenGoldens {
        /// Directory holding the goldens.
        #[arg(long)]
        dir: PathBuf,
        /// Explicit opt-in; refused otherwise.
        #[arg(long)]
        yes: bool,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, seed_override, jobs } => {
            let overrides = Overrides { out_dir: out, seed: seed_override, jobs };
            match run(&config, &overrides) {
                Ok(summary) => {
                    for check in &summary.checks {
                        println!(
                            "[{}] {}: {}",
                            if check.passed { "PASS" } else { "FAIL" },
                            check.name,
                            check.detail
                        );
                    }
                    if summary.all_passed {
                        println!("{}: all checks passed", summary.kind);
                        ExitCode::from(0)
                    } else {
                        eprintln!("{}: some checks FAILED", summary.kind);
                        ExitCode::from(1)
                    }
                }
                Err(RunError::Config(e)) => {
                    eprintln!("config error: {e}");
                    ExitCode::from(2)
                }
                Err(RunError::Failed(e)) => {
                    eprintln!("run failed: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::RegenGoldens { dir, yes } => match regen_goldens(&dir, yes) {
            Ok(diffs) => {
                for line in diffs {
                    println!("{line}");
                }
                ExitCode::from(0)
            }
            Err(RunError::Config(e)) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
            Err(RunError::Failed(e)) => {
                eprintln!("regen failed: {e}");
                ExitCode::from(1)
            }
        },
    }
}
