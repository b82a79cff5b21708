//! Artifact writers: CSV for time series, pretty JSON for reports.

use std::fs;
use std::path::Path;

use pressgame_core::harness::RateReport;
use pressgame_core::Trajectory;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::CliError;

/// File name of the resolved-configuration echo in every output directory.
pub const CONFIG_ECHO: &str = "config.toml";

pub fn prepare_dir(out: &Path, config: &ScenarioConfig) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    fs::write(out.join(CONFIG_ECHO), config.to_toml())?;
    Ok(())
}

/// One row per recorded time: `t, b_1..b_r, s_1..s_d`.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let r = traj.controls.first().map_or(0, Vec::len);
    let d = traj.states.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=r).map(|k| format!("b_{k}")));
    header.extend((1..=d).map(|j| format!("s_{j}")));
    w.write_record(&header)?;
    for ((t, x), b) in traj.times.iter().zip(&traj.states).zip(&traj.controls) {
        let row: Vec<String> = std::iter::once(t).chain(b).chain(x).map(f64::to_string).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Per-size points `N, error, stderr` of a rate experiment.
pub fn write_rate_csv(path: &Path, report: &RateReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["N", "error", "stderr"])?;
    for ((n, e), s) in report.n_values.iter().zip(&report.errors).zip(&report.stderrs) {
        w.write_record([n.to_string(), e.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Sup-norm change of the value table per sweep.
pub fn write_iteration_log(path: &Path, log: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "sup_change"])?;
    for (i, c) in log.iter().enumerate() {
        w.write_record([(i + 1).to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
