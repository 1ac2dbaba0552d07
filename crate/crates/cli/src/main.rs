use std::path::PathBuf;
use std::process::ExitCode;

use approach_cli::{config, experiment, verify, Built};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "approach",
    version,
    about = "Steer a vector-valued average reward into a target set"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the controller for one or more seeds and write CSV traces.
    Run {
        config: PathBuf,
        /// First seed; later seeds count up from it.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of seeds.
        #[arg(long)]
        seeds: Option<usize>,
        /// Output directory for traces and summary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a tabular game against its exact model.
    Verify { config: PathBuf },
    /// Print the resolved configuration, or the defaults without a file.
    ShowConfig { config: Option<PathBuf> },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            seeds,
            out,
        } => {
            let mut cfg = match config::load(&config) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(k) = seeds {
                if k == 0 {
                    eprintln!("error: --seeds must be at least 1");
                    return ExitCode::from(2);
                }
                cfg.seeds = k;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            let built = match Built::new(&cfg) {
                Ok(b) => b,
                Err(e) => return config_error(e),
            };
            match experiment::run_experiment(&cfg, &built) {
                Ok(outcomes) => {
                    for o in &outcomes {
                        println!(
                            "seed {}: {} episodes, {} steps, final distance {:.4e} -> {}",
                            o.seed,
                            o.episodes,
                            o.steps,
                            o.final_distance,
                            o.trace_path.display()
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Verify { config } => {
            let cfg = match config::load(&config) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            match verify::verify(&cfg) {
                Ok(checks) => {
                    for c in &checks {
                        println!("{c}");
                    }
                    if checks.iter().all(|c| c.passed()) {
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
        Command::ShowConfig { config } => {
            let cfg = match config {
                Some(path) => match config::load(&path) {
                    Ok(c) => c,
                    Err(e) => return config_error(e),
                },
                None => approach_cli::default_config(),
            };
            print!("{}", config::render(&cfg));
            ExitCode::SUCCESS
        }
    }
}

fn config_error(e: approach_cli::ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}
