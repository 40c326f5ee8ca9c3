//! Online kernel regression on kin40k (or its stand-in) through random
//! Fourier features. Prints next-batch R^2 every few iterations.
//!
//!     cargo run --release --example kernel_regression -- path/to/kin40k.csv

use d2dcfl::experiment::{run_experiment, DatasetKind, ExperimentConfig};

fn main() -> d2dcfl::Result<()> {
    env_logger::init();
    let path = std::env::args().nth(1).map(Into::into);
    let cfg = ExperimentConfig {
        dataset: DatasetKind::Kin40k,
        dataset_path: path,
        users: 5,
        points_per_user: 20,
        ..Default::default()
    };
    let runs = run_experiment(&cfg)?;
    for k in (0..runs[0].records.len()).step_by(20) {
        let r2 = |i: usize| runs[i].records.get(k).and_then(|r| r.r_squared).map_or("-".into(), |v| format!("{v:.3}"));
        println!("iter {:>4}  baseline R2 {}  d2dcfl R2 {}", k + 1, r2(0), r2(1));
    }
    for run in &runs {
        let s = &run.summary;
        println!("{}: time to R2={} is {:?} s after {} iterations", s.mode.name(), cfg.target_r2, s.time_to_r2, s.iterations);
    }
    Ok(())
}
