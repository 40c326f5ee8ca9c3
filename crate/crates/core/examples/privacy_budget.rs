//! Per-link leakage bound as an offloader compresses more or fewer points.

use d2dcfl::coding::{optimal_compression_rate, privacy_budget};
use d2dcfl::data::synthetic_draws;
use d2dcfl::rng::seeded;

fn main() -> d2dcfl::Result<()> {
    let (x, _) = synthetic_draws(10, 10, &mut seeded(3));
    for lhat in 1..=10 {
        let gamma = optimal_compression_rate(lhat)?;
        let b = privacy_budget(&x, gamma, lhat)?;
        println!("lhat={lhat:>2} omega={:.1} gamma={gamma:.3} epsilon>={:.4} bits", b.omega, b.epsilon_lower);
    }
    Ok(())
}
