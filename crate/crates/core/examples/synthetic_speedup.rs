//! Time for D2D-CFL and the uncoded baseline to reach the error target on
//! the default synthetic fleet, over several seeds.
//!
//!     cargo run --release --example synthetic_speedup -- 20 optimal

use d2dcfl::experiment::{run_experiment, ExperimentConfig, OmegaPolicy};

fn main() -> d2dcfl::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let policy: OmegaPolicy = args.next().map_or(Ok(OmegaPolicy::Optimal), |s| s.parse())?;

    let mut ratios = Vec::new();
    for seed in 1..=seeds {
        let cfg = ExperimentConfig { seed, omega_policy: policy, ..Default::default() };
        let runs = run_experiment(&cfg)?;
        let (base, cfl) = (&runs[0].summary, &runs[1].summary);
        match (base.time_to_error, cfl.time_to_error) {
            (Some(tb), Some(tc)) => {
                println!("seed {seed:>3}: baseline {tb:.3}s  d2dcfl {tc:.3}s  ratio {:.3}  offloaders {:.1}", tc / tb, cfl.mean_offloaders);
                ratios.push(tc / tb);
            }
            _ => println!("seed {seed:>3}: target not reached (baseline {:?}, d2dcfl {:?})", base.final_error, cfl.final_error),
        }
    }
    if !ratios.is_empty() {
        println!("mean ratio {:.3} over {} seeds", ratios.iter().sum::<f64>() / ratios.len() as f64, ratios.len());
    }
    Ok(())
}
