//! Output files: one CSV per (engine, observable), a TOML run manifest, and a
//! JSON comparison report.
//!
//! CSV values carry 12 significant digits; together with the deterministic
//! ensemble reduction this makes re-runs byte-identical for a fixed config and
//! seed, independent of the worker count. The manifest echoes the fully
//! resolved configuration under `[config]`, so a run can be reproduced from
//! the manifest alone.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use seplind_core::observables::TimeSeries;

use crate::config::RunConfig;
use crate::report::RunReport;
use crate::runner::RunOutput;

pub const MANIFEST_NAME: &str = "manifest.toml";
pub const REPORT_NAME: &str = "report.json";

/// 12 significant digits, sign of zero normalized away.
fn format_value(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// `time,mean,stddev` rows for one curve.
pub fn csv_for_series(series: &TimeSeries) -> String {
    let mut out = String::from("time,mean,stddev\n");
    for i in 0..series.len() {
        out.push_str(&format_value(series.times[i]));
        out.push(',');
        out.push_str(&format_value(series.mean[i]));
        out.push(',');
        out.push_str(&format_value(series.stddev[i]));
        out.push('\n');
    }
    out
}

/// Write every curve file, the manifest, and the comparison report.
/// Returns the paths written.
pub fn write_run(out_dir: &Path, config: &RunConfig, output: &RunOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let mut written = Vec::new();

    for set in &output.curve_sets {
        for (label, series) in &set.series {
            let path = out_dir.join(format!("{}_{}.csv", set.name, label));
            fs::write(&path, csv_for_series(series))
                .with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
    }

    let manifest_path = out_dir.join(MANIFEST_NAME);
    fs::write(&manifest_path, manifest_toml(config, output))
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    written.push(manifest_path);

    let report = RunReport {
        dynamical_entanglement_detected: output.entanglement_detected,
        separable_generator: output.separable_generator,
        comparisons: output.comparisons.clone(),
    };
    let report_path = out_dir.join(REPORT_NAME);
    let json = serde_json::to_string_pretty(&report).context("serializing report")?;
    fs::write(&report_path, json).with_context(|| format!("writing {}", report_path.display()))?;
    written.push(report_path);

    Ok(written)
}

/// The manifest records everything needed to reproduce the run on the same
/// artifact version: the resolved config (under `[config]`), the master seed,
/// and the basis convention, plus informational per-engine wall times and
/// abort counts.
pub fn manifest_toml(config: &RunConfig, output: &RunOutput) -> String {
    let mut root = toml::Table::new();
    root.insert("artifact".into(), "seplind".into());
    root.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    root.insert("master_seed".into(), (config.evolution.seed as i64).into());
    root.insert("workers".into(), (output.workers as i64).into());
    root.insert("basis_ordering".into(), seplind_core::BASIS_ORDERING.into());
    root.insert(
        "separable_generator".into(),
        output.separable_generator.into(),
    );
    root.insert(
        "grid_points".into(),
        ((config.evolution.grid_steps() + 1) as i64).into(),
    );
    root.insert(
        "defaults_applied".into(),
        toml::Value::Array(
            config
                .defaults_applied
                .iter()
                .map(|s| toml::Value::String(s.clone()))
                .collect(),
        ),
    );

    let mut engines = toml::Table::new();
    for set in &output.curve_sets {
        let mut t = toml::Table::new();
        t.insert("trajectories".into(), (set.trajectories as i64).into());
        t.insert("aborted".into(), (set.aborted as i64).into());
        t.insert("abort_fraction".into(), set.abort_fraction().into());
        t.insert("wall_seconds".into(), set.wall_seconds.into());
        t.insert(
            "curves".into(),
            toml::Value::Array(
                set.series
                    .iter()
                    .map(|(label, _)| toml::Value::String(format!("{}_{}.csv", set.name, label)))
                    .collect(),
            ),
        );
        engines.insert(set.name.clone(), toml::Value::Table(t));
    }
    root.insert("engines".into(), toml::Value::Table(engines));
    root.insert("config".into(), toml::Value::Table(config.to_toml()));

    toml::to_string_pretty(&toml::Value::Table(root)).expect("manifest serialization")
}

/// Extract the `[config]` echo from a manifest, ready to be parsed as a run
/// configuration.
pub fn config_from_manifest(manifest: &str) -> Result<String> {
    let table: toml::Table = toml::from_str(manifest).context("parsing manifest")?;
    let config = table
        .get("config")
        .and_then(|v| v.as_table())
        .context("manifest has no [config] table")?;
    toml::to_string(&toml::Value::Table(config.clone())).context("serializing config echo")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format_is_stable() {
        let series = TimeSeries::new(
            vec![0.0, 0.2],
            vec![1.0, -0.0],
            vec![0.0, 0.125],
            "t".into(),
        )
        .unwrap();
        let csv = csv_for_series(&series);
        let expect = "time,mean,stddev\n\
                      0.00000000000e0,1.00000000000e0,0.00000000000e0\n\
                      2.00000000000e-1,0.00000000000e0,1.25000000000e-1\n";
        assert_eq!(csv, expect);
    }
}
