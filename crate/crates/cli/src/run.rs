//! `kmfix run`: one experiment, one CSV, one manifest.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use kmfix_core::experiments::{run_experiment, Experiment, SweepConfig};
use kmfix_core::report::{sha256_hex, OutputFile, RunManifest, Table, SCHEMA_VERSION};
use kmfix_core::Error;
use serde_json::Value;

use crate::{CliError, CliResult, EXIT_INVARIANT};

/// Writes a table as CSV to `out`, or to stdout.
pub fn emit(table: &Table, out: Option<&Path>) -> CliResult<()> {
    let bytes = table.to_csv_bytes().map_err(|e| CliError::internal(e.to_string()))?;
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::internal(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::internal(e.to_string())),
    }
}

/// Reads a config document. A previous run's manifest is accepted too; its
/// echoed config is used, and it must be for the same experiment.
fn read_config(path: &Path, experiment: Experiment) -> CliResult<String> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    match (doc.get("schema_version"), doc.get("config"), doc.get("experiment")) {
        (Some(_), Some(config), Some(exp)) => {
            if exp.as_str() != Some(experiment.name()) {
                return Err(CliError::config(format!(
                    "manifest is for experiment {exp}, not {experiment}"
                )));
            }
            Ok(config.to_string())
        }
        _ => Ok(text),
    }
}

pub fn cmd_run(
    experiment: &str,
    config_path: Option<&Path>,
    out_dir: &Path,
    workers: usize,
    sets: &[(String, String)],
) -> CliResult<()> {
    let experiment: Experiment = experiment.parse().map_err(|e: Error| CliError::config(e.to_string()))?;
    let document = config_path.map(|p| read_config(p, experiment)).transpose()?;
    let config = SweepConfig::resolve(experiment, document.as_deref(), sets).map_err(|e| CliError::config(e.to_string()))?;
    config
        .validate_for(experiment)
        .map_err(|e| CliError::config(e.to_string()))?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::internal(format!("{}: {e}", out_dir.display())))?;

    let started = chrono::Utc::now();
    let clock = Instant::now();
    let output = run_experiment(experiment, &config, workers).map_err(|e| CliError::internal(e.to_string()))?;
    let wall = clock.elapsed().as_secs_f64();
    let finished = chrono::Utc::now();

    let table = output.to_table();
    let bytes = table.to_csv_bytes().map_err(|e| CliError::internal(e.to_string()))?;
    let csv_name = format!("{experiment}.csv");
    fs::write(out_dir.join(&csv_name), &bytes).map_err(|e| CliError::internal(e.to_string()))?;

    let failures = output.failures(&config).map_err(|e| CliError::internal(e.to_string()))?;
    let manifest = RunManifest {
        command: std::env::args().collect(),
        experiment: experiment.name().to_string(),
        config: config.to_json(),
        base_seed: config.base_seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: SCHEMA_VERSION,
        workers: if workers == 0 {
            kmfix_core::experiments::default_workers()
        } else {
            workers
        },
        started: started.to_rfc3339(),
        finished: finished.to_rfc3339(),
        wall_time_secs: wall,
        outputs: vec![OutputFile {
            path: csv_name.clone(),
            rows: table.len(),
            schema_hash: table.schema_hash(),
            sha256: sha256_hex(&bytes),
        }],
        failures: failures.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::internal(e.to_string()))?;
    fs::write(out_dir.join(format!("{experiment}.manifest.json")), json + "\n")
        .map_err(|e| CliError::internal(e.to_string()))?;

    eprintln!(
        "{experiment}: {} rows -> {} ({wall:.1}s)",
        table.len(),
        out_dir.join(&csv_name).display()
    );
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_INVARIANT,
            message: format!("{} invariant failure(s):\n  {}", failures.len(), failures.join("\n  ")),
        })
    }
}
