//! Time to the R^2 target and D2D traffic savings across heterogeneity
//! levels, on kin40k (or its stand-in).
//!
//!     cargo run --release --example heterogeneity_sweep -- 5 20

use d2dcfl::experiment::{sweep, DatasetKind, ExperimentConfig};

fn main() -> d2dcfl::Result<()> {
    let mut args = std::env::args().skip(1);
    let users: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let replications: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let cfg = ExperimentConfig { dataset: DatasetKind::Standin, users, points_per_user: 20, ..Default::default() };
    let rhos: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();

    println!("  rho  baseline_s  d2dcfl_s  ratio  reached  comm_eff  savings  offloaders");
    for r in sweep(&cfg, &rhos, replications)? {
        println!(
            "{:>5.1}  {:>10.3}  {:>8.3}  {:>5.3}  {:>3}/{:<3}  {:>8.4}  {:>7.4}  {:>10.2}",
            r.rho, r.baseline_time, r.d2dcfl_time, r.time_ratio, r.d2dcfl_reached, r.baseline_reached, r.comm_efficiency, r.comm_savings, r.mean_offloaders
        );
    }
    Ok(())
}
