//! Tracking a slowly rotating ground truth. Errors are compared at the
//! same simulated times, holding each run's last value between updates.
//!
//!     cargo run --release --example dynamic_tracking -- 5

use d2dcfl::experiment::{run_experiment, ExperimentConfig, MetricsRecord};

/// Error of `records` in force at time `t`.
fn error_at(records: &[MetricsRecord], t: f64) -> Option<f64> {
    let i = records.partition_point(|r| r.time_s <= t);
    i.checked_sub(1).and_then(|i| records[i].normalized_error)
}

fn main() -> d2dcfl::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let warmup = 5.0;
    let mut sums: Vec<(f64, f64, f64)> = Vec::new();
    for seed in 1..=seeds {
        let cfg = ExperimentConfig { seed, omega_r: 4.7e-2, iterations: 1000, ..Default::default() };
        let runs = run_experiment(&cfg)?;
        let (base, cfl) = (&runs[0].records, &runs[1].records);
        let end = cfl.last().unwrap().time_s.min(base.last().unwrap().time_s);
        let samples: Vec<(f64, f64)> = base
            .iter()
            .filter(|r| r.time_s >= warmup && r.time_s <= end)
            .filter_map(|r| Some((r.normalized_error?, error_at(cfl, r.time_s)?)))
            .collect();
        if sums.is_empty() {
            sums = base.iter().filter(|r| r.time_s >= warmup && r.time_s <= end).map(|r| (r.time_s, 0.0, 0.0)).collect();
        }
        for (s, (b, c)) in sums.iter_mut().zip(&samples) {
            s.1 += b;
            s.2 += c;
        }
        let wins = samples.iter().filter(|(b, c)| c <= b).count();
        let mean = |f: fn(&(f64, f64)) -> f64| samples.iter().map(f).sum::<f64>() / samples.len() as f64;
        println!(
            "seed {seed}: d2dcfl <= baseline at {wins}/{} matched times; mean error baseline {:.2e} d2dcfl {:.2e}",
            samples.len(),
            mean(|s| s.0),
            mean(|s| s.1)
        );
    }
    let wins = sums.iter().filter(|s| s.2 <= s.1).count();
    println!("seed-averaged curves: d2dcfl <= baseline at {wins}/{} matched times", sums.len());
    Ok(())
}
