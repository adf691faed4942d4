//! CSV and text output for runs and sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::{RunSummary, SweepCell};
use crate::thermal::ThermalState;

pub const SUMMARY_HEADER: &str = "scenario,function,period_us,peak_overall_c,peak_static_baseline_c,\
peak_reduction_c,time_avg_mean_temp_c,max_spatial_spread_c,penalty_pct,migration_count,\
total_migration_energy_j,status";

impl From<RunSummary> for SweepCell {
    fn from(s: RunSummary) -> Self {
        SweepCell { scenario: s.scenario.clone(), function: s.function, period: s.period, result: Ok(s) }
    }
}

fn csv_field(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

/// One row per cell. Temperatures and the penalty use six decimals;
/// failed cells leave the numeric columns empty and carry the error in
/// `status`.
pub fn summary_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for cell in cells {
        let _ = write!(out, "{},{},{:.6},", csv_field(&cell.scenario), cell.function, cell.period * 1e6);
        match &cell.result {
            Ok(s) => {
                let _ = writeln!(
                    out,
                    "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{:.6e},ok",
                    s.peak_overall,
                    s.peak_static_baseline,
                    s.peak_reduction,
                    s.time_avg_mean_temp,
                    s.max_spatial_spread,
                    s.throughput_penalty * 100.0,
                    s.migration_count,
                    s.total_migration_energy,
                );
            }
            Err(e) => {
                let _ = writeln!(out, ",,,,,,,,error: {}", csv_field(&e.to_string()));
            }
        }
    }
    out
}

/// Best function (largest peak reduction) for each scenario.
pub fn text_summary(cells: &[SweepCell]) -> String {
    let mut best: BTreeMap<&str, &RunSummary> = BTreeMap::new();
    let mut failures = 0;
    for cell in cells {
        match &cell.result {
            Ok(s) => {
                let slot = best.entry(cell.scenario.as_str()).or_insert(s);
                if s.peak_reduction > slot.peak_reduction {
                    *slot = s;
                }
            }
            Err(_) => failures += 1,
        }
    }
    let mut out = String::new();
    for (scenario, s) in &best {
        let _ = writeln!(
            out,
            "{scenario}: best {} at {:.1} us, peak {:.3} C -> {:.3} C (reduction {:.3} C, penalty {:.3} %)",
            s.function,
            s.period * 1e6,
            s.peak_static_baseline,
            s.peak_overall,
            s.peak_reduction,
            s.throughput_penalty * 100.0,
        );
    }
    if failures > 0 {
        let _ = writeln!(out, "{failures} cell(s) failed; see the status column");
    }
    out
}

/// `time_s,t_block_0,...,t_block_{n-1},t_sink`.
pub fn trace_csv(trace: &[ThermalState]) -> String {
    let mut out = String::from("time_s");
    if let Some(first) = trace.first() {
        for i in 0..first.temps.len() - 1 {
            let _ = write!(out, ",t_block_{i}");
        }
        out.push_str(",t_sink");
    }
    out.push('\n');
    for state in trace {
        let _ = write!(out, "{:.9}", state.time);
        for t in &state.temps {
            let _ = write!(out, ",{t:.6}");
        }
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `summary.csv` and `summary.txt` under `dir` and returns their
/// paths.
pub fn report(cells: &[SweepCell], dir: &Path) -> Result<(PathBuf, PathBuf)> {
    if cells.is_empty() {
        return Err(Error::config("nothing to report"));
    }
    let csv = dir.join("summary.csv");
    let txt = dir.join("summary.txt");
    write_file(&csv, &summary_csv(cells))?;
    write_file(&txt, &text_summary(cells))?;
    Ok((csv, txt))
}
