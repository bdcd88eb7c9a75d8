//! Scenario runner for the `mckit` command-line tool.
//!
//! A scenario is a JSON document naming a `kind`, optional `seed`,
//! `realizations` and `time` grid, and a kind-specific `params` object.
//! Running a scenario produces a numeric CSV table.

pub mod catalog;
pub mod config;
pub mod csv;
pub mod error;
pub mod runner;

use std::path::Path;

pub use config::{Kind, Params, Scenario};
pub use csv::CsvTable;
pub use error::CliError;
pub use runner::{run_scenario, Output};

/// Loads a scenario from a JSON file, or from the catalog when no such file exists.
pub fn load(source: &str, seed: Option<u64>, overrides: &[String]) -> Result<Scenario, CliError> {
    let mut all: Vec<String> = overrides.to_vec();
    if let Some(s) = seed {
        all.push(format!("seed={s}"));
    }
    let path = Path::new(source);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(source, e))?;
        let mut scenario = Scenario::parse(&text, &all).map_err(|e| match e {
            CliError::Validation { location, message } => {
                CliError::Validation { location: format!("{source}: {location}"), message }
            }
            other => other,
        })?;
        // Trace files are looked up next to the config file.
        if let Params::Fit(fit) = &mut scenario.params {
            if let (Some(trace), Some(dir)) = (&fit.trace, path.parent()) {
                if trace.is_relative() {
                    fit.trace = Some(dir.join(trace));
                }
            }
        }
        return Ok(scenario);
    }
    match catalog::find(source) {
        Some(s) => Scenario::parse(&s.to_json_pretty(), &all),
        None => Err(CliError::Validation {
            location: source.to_string(),
            message: "no such config file or built-in scenario".into(),
        }),
    }
}

/// Loads, runs and writes the CSV atomically to `out`.
pub fn run(source: &str, out: &Path, seed: Option<u64>, overrides: &[String]) -> Result<Output, CliError> {
    let scenario = load(source, seed, overrides)?;
    let output = run_scenario(&scenario)?;
    output.table.write_atomic(out)?;
    Ok(output)
}
