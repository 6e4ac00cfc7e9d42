//! Command-line front end: configuration files, experiment drivers and
//! result files.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::Path;
use std::time::Instant;

pub use config::ScenarioConfig;
pub use error::CliError;
pub use experiments::Experiment;

use output::{config_hash, write_manifest, Manifest};

/// Runs one experiment and writes its CSV files plus a manifest into `out_dir`.
pub fn run_experiment(experiment: Experiment, config: &ScenarioConfig, out_dir: &Path) -> Result<Manifest, CliError> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let start = Instant::now();
    let ctx = experiments::RunContext { config, out_dir };
    let files = experiments::run(experiment, &ctx)?;
    let manifest = Manifest {
        experiment: experiment.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(config)?,
        seed: config.solver.seed,
        trials: config.solver.trials,
        runtime_seconds: start.elapsed().as_secs_f64(),
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        config: *config,
    };
    write_manifest(out_dir, &manifest)?;
    Ok(manifest)
}
