use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cantori::cli::{run_scenario, RunConfig, Scenario};
use cantori::Result;

#[derive(Parser)]
#[command(name = "cantori", version, about = "Classical and quantum transport in the double-pulse kicked rotor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate {
        config: PathBuf,
        /// Print the canonical form of the config.
        #[arg(long)]
        canonical: bool,
    },
    /// List the available scenarios.
    ListScenarios,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, output_dir } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let manifest = run_scenario(&cfg)?;
            println!("{}", manifest.run_dir.display());
            log::info!("{} files in {:.1} s", manifest.files.len(), manifest.wall_clock_seconds);
        }
        Command::Validate { config, canonical } => {
            let cfg = RunConfig::load(&config)?;
            let r = cfg.resolve()?;
            if canonical {
                print!("{}", cfg.to_toml_string()?);
            } else {
                println!(
                    "ok: {} k={:?} eta={:?} hbar={} N={} kicks={}",
                    r.scenario, r.kick_strengths, r.etas, r.params.scaled_planck, r.params.basis_size, r.params.n_kicks
                );
            }
        }
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<10} {}", s.name(), s.description());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
