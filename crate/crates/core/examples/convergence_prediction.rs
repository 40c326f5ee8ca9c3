//! Closed-form error decay next to a simulated run.

use d2dcfl::experiment::{analytic_prediction, run_experiment, ExperimentConfig};

fn main() -> d2dcfl::Result<()> {
    let cfg = ExperimentConfig { sigma: 0.0, iterations: 12, ..Default::default() };
    let p = analytic_prediction(&cfg)?;
    let (tb, tc) = p.times_to(cfg.target_error);
    println!("predicted time to {}: baseline {tb:?} s, d2dcfl {tc:?} s", cfg.target_error);

    let runs = run_experiment(&cfg)?;
    println!("iter  baseline(sim)  baseline(pred)  d2dcfl(sim)  d2dcfl(pred)");
    for (b, c) in runs[0].records.iter().zip(&runs[1].records) {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |e| format!("{e:.3e}"));
        println!(
            "{:>4}  {:>13}  {:>14}  {:>11}  {:>12}",
            b.iteration,
            fmt(b.normalized_error),
            fmt(b.predicted_error),
            fmt(c.normalized_error),
            fmt(c.predicted_error)
        );
    }
    Ok(())
}
