use std::io::Write;

use super::config::ExperimentConfig;
use super::driver::RunSummary;
use super::metrics::{MetricsRecord, CSV_COLUMNS};
use super::sweep::{SweepRow, SWEEP_COLUMNS};
use crate::error::Result;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_header<W: Write>(out: &mut W, cfg: &ExperimentConfig) -> Result<()> {
    for line in cfg.header_lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// Per-iteration records as CSV, preceded by `# key=value` lines with the
/// resolved configuration. Missing values are left empty.
pub fn write_csv<W: Write>(out: W, cfg: &ExperimentConfig, records: &[MetricsRecord]) -> Result<()> {
    let mut out = out;
    write_header(&mut out, cfg)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record([
            r.mode.to_string(),
            r.seed.to_string(),
            r.iteration.to_string(),
            r.time_s.to_string(),
            opt(r.normalized_error),
            opt(r.r_squared),
            r.iter_duration_s.to_string(),
            r.bytes_d2d_coded.to_string(),
            r.bytes_d2d_uncoded_counterfactual.to_string(),
            r.num_offloaders.to_string(),
            r.fallback.to_string(),
            opt(r.predicted_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, cfg: &ExperimentConfig, rows: &[SweepRow]) -> Result<()> {
    let mut out = out;
    write_header(&mut out, cfg)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.rho.to_string(),
            r.baseline_time.to_string(),
            r.d2dcfl_time.to_string(),
            r.baseline_reached.to_string(),
            r.d2dcfl_reached.to_string(),
            r.time_ratio.to_string(),
            r.comm_efficiency.to_string(),
            r.comm_savings.to_string(),
            r.mean_offloaders.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable one-line summaries.
pub fn summary_lines(summaries: &[RunSummary]) -> Vec<String> {
    summaries
        .iter()
        .map(|s| {
            format!(
                "{:<8} seed={} iters={} time={:.4}s t_err={} t_r2={} comm_eff={:.4} offloaders={:.2} fallbacks={} final_err={}",
                s.mode.name(),
                s.seed,
                s.iterations,
                s.total_time,
                s.time_to_error.map_or("-".into(), |t| format!("{t:.4}")),
                s.time_to_r2.map_or("-".into(), |t| format!("{t:.4}")),
                s.comm_efficiency,
                s.mean_offloaders,
                s.fallback_iterations,
                s.final_error.map_or("-".into(), |e| format!("{e:.3e}")),
            )
        })
        .collect()
}
