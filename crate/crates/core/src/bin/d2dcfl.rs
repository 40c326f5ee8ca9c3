use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use d2dcfl::experiment::{
    analytic_prediction, run_experiment, summary_lines, sweep, write_csv, write_sweep_csv, DatasetKind, ExperimentConfig, Mode, OmegaPolicy,
};

#[derive(Parser)]
#[command(version, about = "D2D-aided coded federated learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one seed and write per-iteration metrics.
    Run(Common),
    /// Replicate both modes over heterogeneity levels.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        replications: usize,
        /// Comma-separated heterogeneity factors.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")]
        rhos: Vec<f64>,
    },
    /// Closed-form convergence prediction; no simulation.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Seconds covered by the predicted curve.
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    #[arg(long, value_parser = parse_dataset)]
    dataset: Option<DatasetKind>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    omega_policy: Option<OmegaPolicy>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "baseline" => Ok(Mode::Baseline),
        "d2dcfl" => Ok(Mode::D2dcfl),
        "both" => Ok(Mode::Both),
        _ => Err(format!("unknown mode {s:?}; expected baseline, d2dcfl or both")),
    }
}

fn parse_dataset(s: &str) -> Result<DatasetKind, String> {
    match s {
        "synthetic" => Ok(DatasetKind::Synthetic),
        "kin40k" => Ok(DatasetKind::Kin40k),
        "standin" => Ok(DatasetKind::Standin),
        _ => Err(format!("unknown dataset {s:?}; expected synthetic, kin40k or standin")),
    }
}

impl Common {
    fn config(&self) -> d2dcfl::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(d) = self.dataset {
            cfg.dataset = d;
        }
        if let Some(p) = self.omega_policy {
            cfg.omega_policy = p;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn sink(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = real_main(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn real_main(cli: Cli) -> d2dcfl::Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.config()?;
            let runs = run_experiment(&cfg)?;
            let records: Vec<_> = runs.iter().flat_map(|r| r.records.iter().cloned()).collect();
            write_csv(common.sink()?, &cfg, &records)?;
            for line in summary_lines(&runs.iter().map(|r| r.summary.clone()).collect::<Vec<_>>()) {
                eprintln!("{line}");
            }
        }
        Command::Sweep { common, replications, rhos } => {
            let cfg = common.config()?;
            let rows = sweep(&cfg, &rhos, replications)?;
            write_sweep_csv(common.sink()?, &cfg, &rows)?;
        }
        Command::Predict { common, horizon, points } => {
            let cfg = common.config()?;
            let p = analytic_prediction(&cfg)?;
            let (tb, tc) = p.times_to(cfg.target_error);
            eprintln!(
                "omega_w={:.4} deadline={:.5}s offloaders={} time_to_target baseline={:?} d2dcfl={:?}",
                p.omega_w, p.deadline, p.num_offloaders, tb, tc
            );
            let mut w = csv::Writer::from_writer(common.sink()?);
            w.write_record(["time_s", "baseline_error", "d2dcfl_error"])?;
            for i in 0..=points {
                let t = horizon * i as f64 / points.max(1) as f64;
                let c = p.d2dcfl_error_at(t).map(|e| e.to_string()).unwrap_or_default();
                w.write_record([t.to_string(), p.baseline_error_at(t).to_string(), c])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
