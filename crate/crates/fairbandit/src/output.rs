//! Flat-file persistence for experiment results.
//!
//! Layout under the configured output directory:
//!
//! - `summary.csv`: one row per run (per sweep rate), fixed columns
//! - `replications.csv`: one row per replication, metric columns per arm count
//! - `trace.csv`: per-round decisions, only when tracing is enabled
//!   (sweeps write `trace_<p>_<q>.csv` per rate)
//! - `manifest.toml`: config echo, seed, version, timestamp
//!
//! The timestamp in the manifest is the only non-deterministic byte in any
//! output file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::harness::RunResult;
use crate::metrics::EpisodeTrace;
use crate::rate::Rate;

pub const SUMMARY_HEADER: &str = "min_rate,policy,mean_total_reward,std_total_reward,\
mean_pseudo_regret,std_pseudo_regret,mean_jain,mean_gini,mean_violations";

pub const TRACE_HEADER: &str = "rep,t,arm,reason,reward,cum_reward";

pub(crate) fn write_outputs(config: &ExperimentConfig, results: &[RunResult]) -> Result<()> {
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir)?;
    write_summary(&dir.join("summary.csv"), results)?;
    write_replications(&dir.join("replications.csv"), config.arm_count(), results)?;
    for result in results {
        if let Some(traces) = &result.traces {
            let name = if results.len() == 1 {
                "trace.csv".to_string()
            } else {
                trace_file_name(result.min_rate)
            };
            write_traces(&dir.join(name), traces)?;
        }
    }
    write_manifest(&dir.join("manifest.toml"), config)?;
    Ok(())
}

/// File name for one sweep rate's trace output, e.g. `trace_1_4.csv`.
pub fn trace_file_name(rate: Rate) -> String {
    format!("trace_{}_{}.csv", rate.numer(), rate.denom())
}

fn write_summary(path: &Path, results: &[RunResult]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in results {
        let a = &r.aggregate;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.min_rate,
            r.policy.as_str(),
            a.mean_total_reward,
            a.std_total_reward,
            opt(a.mean_pseudo_regret),
            opt(a.std_pseudo_regret),
            a.mean_jain,
            a.mean_gini,
            a.mean_violations,
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_replications(path: &Path, arm_count: usize, results: &[RunResult]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let shares: Vec<String> = (0..arm_count).map(|i| format!("share_{i}")).collect();
    writeln!(
        w,
        "min_rate,rep,pseudo_regret,total_reward,{},jain,gini,violations,disparity_onset",
        shares.join(",")
    )?;
    for result in results {
        for row in &result.rows {
            let shares: Vec<String> = row.shares.iter().map(|s| s.to_string()).collect();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                result.min_rate,
                row.rep,
                opt(row.pseudo_regret),
                row.total_reward,
                shares.join(","),
                row.jain,
                row.gini,
                row.violations,
                opt(row.disparity_onset),
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_traces(path: &Path, traces: &[EpisodeTrace]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{TRACE_HEADER}")?;
    for (rep, trace) in traces.iter().enumerate() {
        let mut cum_reward = 0.0;
        for record in trace.records() {
            cum_reward += record.reward;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                rep, record.round, record.arm, record.reason, record.reward, cum_reward,
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_manifest(path: &Path, config: &ExperimentConfig) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "spec_version = \"{}\"", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "base_seed = {}", config.base_seed)?;
    writeln!(w, "timestamp = \"{}\"", chrono::Utc::now().to_rfc3339())?;
    writeln!(w)?;
    let mut wrapper = toml::Table::new();
    wrapper.insert(
        "config".to_string(),
        toml::Value::Table(config.echo.clone()),
    );
    let echo =
        toml::to_string(&wrapper).unwrap_or_else(|e| format!("# config echo failed: {e}\n"));
    w.write_all(echo.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn opt<T: std::fmt::Display>(value: Option<T>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}
