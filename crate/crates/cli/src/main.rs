use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swiptmc_cli::{run_experiment, CliError, Experiment, ScenarioConfig};

#[derive(Parser)]
#[command(name = "swiptmc", version, about = "Rate-energy trade-off and computation outage of indoor SWIPT networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment: validate, operating-points, outage-tasks,
    /// outage-cycles, outage-qhit or densify.
    Run {
        experiment: String,
        /// Configuration file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the configured number of Monte Carlo trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Overrides the configured base seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the recognised configuration keys.
    Keys,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Keys => {
            for (key, unit, what) in swiptmc_cli::config::KEYS {
                println!("{key:<20} {unit:<5} {what}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            experiment,
            config,
            out,
            trials,
            seed,
        } => {
            let experiment: Experiment = match experiment.parse() {
                Ok(e) => e,
                Err(err) => {
                    eprintln!("error: {err}");
                    let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                    eprintln!("expected one of: {}", names.join(", "));
                    return ExitCode::from(2);
                }
            };
            match execute(experiment, config, out, trials, seed) {
                Ok(()) => ExitCode::SUCCESS,
                Err(err) => {
                    eprintln!("error: {err}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}

fn execute(
    experiment: Experiment,
    config: Option<PathBuf>,
    out: PathBuf,
    trials: Option<usize>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut config = match config {
        Some(path) => ScenarioConfig::load(&path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(t) = trials {
        config.solver.trials = t;
    }
    if let Some(s) = seed {
        config.solver.seed = s;
    }
    let manifest = run_experiment(experiment, &config, &out)?;
    println!(
        "{}: {} files in {} ({:.1} s, config {})",
        manifest.experiment,
        manifest.files.len(),
        out.display(),
        manifest.runtime_seconds,
        &manifest.config_hash[..12]
    );
    Ok(())
}
