//! Users move inside a square area; the D2D graph follows their positions
//! and the allocation is recomputed every iteration.
//!
//!     cargo run --release --example mobility -- 10 5

use d2dcfl::experiment::{run_experiment, ExperimentConfig, MobilitySettings, Topology};

fn main() -> d2dcfl::Result<()> {
    let mut args = std::env::args().skip(1);
    let v_max: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);

    for seed in 1..=seeds {
        let cfg = ExperimentConfig {
            seed,
            topology: Topology::Proximity,
            instant_d2d: true,
            target_error: 2.5e-3,
            mobility: MobilitySettings { enabled: true, v_max, ..Default::default() },
            ..Default::default()
        };
        let runs = run_experiment(&cfg)?;
        let (base, cfl) = (&runs[0].summary, &runs[1].summary);
        println!(
            "seed {seed}: baseline {:?}  d2dcfl {:?}  fallbacks {}  mean offloaders {:.2}",
            base.time_to_error, cfl.time_to_error, cfl.fallback_iterations, cfl.mean_offloaders
        );
    }
    Ok(())
}
