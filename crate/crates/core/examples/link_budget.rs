//! 60 GHz D2D link budget and the resulting MAC rate versus distance.

use d2dcfl::network::{antenna_gain_dbi, d2d_rate, dcmc_capacity_qam64, free_space_path_loss_db, LinkParams};

fn main() -> d2dcfl::Result<()> {
    let link = LinkParams::default();
    println!("antenna gain {:.2} dBi", antenna_gain_dbi(link.theta_rad));
    println!("  dist_m  fspl_db  snr_db  bits/sym  Mbit/s  MAC/s(d=10)");
    for dist in [0.5, 1.0, 2.0, 3.0, 4.0] {
        let r = d2d_rate(&link, dist, 10)?;
        println!(
            "{dist:>8.1}  {:>7.2}  {:>6.2}  {:>8.3}  {:>6.1}  {:.3e}",
            free_space_path_loss_db(link.frequency_hz, dist),
            r.snr_db,
            r.capacity_bits,
            r.bits_per_s / 1e6,
            r.macs_per_s
        );
    }
    for snr in [-10.0, 0.0, 10.0, 20.0] {
        println!("64-QAM capacity at {snr:>5.1} dB: {:.3} bit/symbol", dcmc_capacity_qam64(snr));
    }
    Ok(())
}
