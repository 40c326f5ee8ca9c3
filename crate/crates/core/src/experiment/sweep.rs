use std::sync::Arc;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Mode};
use super::driver::{resolve_dataset, RunMode, Simulation, StopRule};
use crate::data::Dataset;
use crate::error::{invalid, Result};

/// Which first-passage time a sweep reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepTarget {
    Error,
    R2,
}

impl SweepTarget {
    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        if cfg.is_realistic_data() {
            SweepTarget::R2
        } else {
            SweepTarget::Error
        }
    }
}

/// Replication-averaged outcome at one heterogeneity level.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub rho: f64,
    /// Mean time to target; runs that miss it count at their horizon.
    pub baseline_time: f64,
    pub d2dcfl_time: f64,
    pub baseline_reached: usize,
    pub d2dcfl_reached: usize,
    pub time_ratio: f64,
    /// Coded over uncoded D2D bytes, pooled over replications.
    pub comm_efficiency: f64,
    pub comm_savings: f64,
    pub mean_offloaders: f64,
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "rho",
    "baseline_time",
    "d2dcfl_time",
    "baseline_reached",
    "d2dcfl_reached",
    "time_ratio",
    "comm_efficiency",
    "comm_savings",
    "mean_offloaders",
];

struct Run {
    time: f64,
    reached: bool,
    coded: u64,
    plain: u64,
    offloaders: f64,
}

fn one_run(cfg: &ExperimentConfig, mode: RunMode, data: Option<Arc<Dataset>>, target: SweepTarget) -> Result<Run> {
    let stop = match target {
        SweepTarget::Error => StopRule::ErrorTarget,
        SweepTarget::R2 => StopRule::R2Target,
    };
    let out = Simulation::new(cfg, mode, data)?.run_until(stop)?;
    let s = &out.summary;
    let hit = match target {
        SweepTarget::Error => s.time_to_error,
        SweepTarget::R2 => s.time_to_r2,
    };
    Ok(Run {
        time: hit.unwrap_or(s.total_time),
        reached: hit.is_some(),
        coded: out.records.iter().map(|r| r.bytes_d2d_coded).sum(),
        plain: out.records.iter().map(|r| r.bytes_d2d_uncoded_counterfactual).sum(),
        offloaders: s.mean_offloaders,
    })
}

/// Run both modes for every `(rho, replication)` pair. Replication `r`
/// uses seed `cfg.seed + r`. Jobs run in parallel; results are merged in
/// a fixed order so output does not depend on scheduling.
pub fn sweep(cfg: &ExperimentConfig, rhos: &[f64], replications: usize) -> Result<Vec<SweepRow>> {
    if replications == 0 {
        return invalid("replications must be positive");
    }
    let data = resolve_dataset(cfg)?;
    let target = SweepTarget::for_config(cfg);
    let mut jobs = Vec::new();
    for &rho in rhos {
        for rep in 0..replications {
            for mode in [RunMode::Baseline, RunMode::D2dCfl] {
                let mut c = cfg.clone();
                c.rho = rho;
                c.seed = cfg.seed.wrapping_add(rep as u64);
                c.mode = Mode::Both;
                jobs.push((c, mode));
            }
        }
    }
    let runs = jobs
        .par_iter()
        .map(|(c, mode)| one_run(c, *mode, data.clone(), target))
        .collect::<Result<Vec<_>>>()?;

    let n = replications as f64;
    Ok(rhos
        .iter()
        .zip(runs.chunks(2 * replications))
        .map(|(&rho, chunk)| {
            let base: Vec<&Run> = chunk.iter().step_by(2).collect();
            let cfl: Vec<&Run> = chunk.iter().skip(1).step_by(2).collect();
            let baseline_time = base.iter().map(|r| r.time).sum::<f64>() / n;
            let d2dcfl_time = cfl.iter().map(|r| r.time).sum::<f64>() / n;
            let coded: u64 = cfl.iter().map(|r| r.coded).sum();
            let plain: u64 = cfl.iter().map(|r| r.plain).sum();
            let comm_efficiency = if plain == 0 { 1.0 } else { coded as f64 / plain as f64 };
            SweepRow {
                rho,
                baseline_time,
                d2dcfl_time,
                baseline_reached: base.iter().filter(|r| r.reached).count(),
                d2dcfl_reached: cfl.iter().filter(|r| r.reached).count(),
                time_ratio: d2dcfl_time / baseline_time,
                comm_efficiency,
                comm_savings: 1.0 - comm_efficiency,
                mean_offloaders: cfl.iter().map(|r| r.offloaders).sum::<f64>() / n,
            }
        })
        .collect())
}
