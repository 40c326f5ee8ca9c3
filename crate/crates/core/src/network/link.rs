use serde::{Deserialize, Serialize};

use super::dcmc::dcmc_capacity_qam64;
use super::dcmc_capacity_exact;
use crate::error::{invalid, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Radio parameters of a D2D link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkParams {
    pub p_tx_dbm: f64,
    pub frequency_hz: f64,
    pub bandwidth_hz: f64,
    /// Half-power beamwidth in radians.
    pub theta_rad: f64,
    pub n0_dbm_per_hz: f64,
    pub noise_figure_db: f64,
    pub impl_loss_db: f64,
    /// Proximity radius in meters.
    pub r_d_m: f64,
    /// Bits per transmitted float.
    pub b_f: u32,
    pub modulation_order: usize,
    pub code_rate: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            p_tx_dbm: 10.0,
            frequency_hz: 60e9,
            bandwidth_hz: 200e6,
            theta_rad: std::f64::consts::PI / 9.0,
            n0_dbm_per_hz: -163.0,
            noise_figure_db: 10.0,
            impl_loss_db: 5.0,
            r_d_m: 4.0,
            b_f: 32,
            modulation_order: 64,
            code_rate: 5.0 / 8.0,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz > 0.0 && self.bandwidth_hz > 0.0 && self.r_d_m > 0.0 && self.code_rate > 0.0) {
            return invalid("link frequency, bandwidth, radius and code rate must be positive");
        }
        if !(self.theta_rad > 0.0 && self.theta_rad < std::f64::consts::PI) {
            return invalid("beamwidth must lie in (0, pi)");
        }
        if self.b_f != 32 && self.b_f != 64 {
            return invalid(format!("b_f must be 32 or 64, got {}", self.b_f));
        }
        let k = (self.modulation_order as f64).sqrt().round() as usize;
        if k < 2 || k * k != self.modulation_order {
            return invalid(format!("modulation order {} is not a square QAM", self.modulation_order));
        }
        Ok(())
    }
}

/// Spherical-cup approximation `2 / (1 - cos(theta/2))` in dBi.
pub fn antenna_gain_dbi(theta_rad: f64) -> f64 {
    10.0 * (2.0 / (1.0 - (theta_rad / 2.0).cos())).log10()
}

pub fn free_space_path_loss_db(frequency_hz: f64, distance_m: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * frequency_hz * distance_m / SPEED_OF_LIGHT).log10()
}

/// Received power in dBm with aligned beams at both ends.
pub fn receive_power(link: &LinkParams, distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return invalid(format!("link distance must be positive, got {distance_m}"));
    }
    let g = antenna_gain_dbi(link.theta_rad);
    Ok(link.p_tx_dbm + 2.0 * g - free_space_path_loss_db(link.frequency_hz, distance_m))
}

pub fn snr_db(link: &LinkParams, distance_m: f64) -> Result<f64> {
    let noise = link.n0_dbm_per_hz + 10.0 * link.bandwidth_hz.log10() + link.noise_figure_db + link.impl_loss_db;
    Ok(receive_power(link, distance_m)? - noise)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkRate {
    pub snr_db: f64,
    /// Constellation capacity in bits per symbol.
    pub capacity_bits: f64,
    pub bits_per_s: f64,
    /// Rate in MAC/s for `d`-dimensional float vectors.
    pub macs_per_s: f64,
}

/// Link rate at `distance_m` for `d`-dimensional payloads.
pub fn d2d_rate(link: &LinkParams, distance_m: f64, d: usize) -> Result<LinkRate> {
    if distance_m > link.r_d_m {
        return invalid(format!("no link: {distance_m} m exceeds the proximity radius {} m", link.r_d_m));
    }
    if d == 0 {
        return invalid("payload dimension must be positive");
    }
    let snr = snr_db(link, distance_m)?;
    let max_bits = (link.modulation_order as f64).log2();
    let capacity = if link.modulation_order == 64 { dcmc_capacity_qam64(snr) } else { dcmc_capacity_exact(link.modulation_order, snr) };
    let bits_per_s = link.bandwidth_hz * capacity.min(max_bits) * link.code_rate;
    Ok(LinkRate { snr_db: snr, capacity_bits: capacity, bits_per_s, macs_per_s: bits_per_s / (d as f64 * link.b_f as f64) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_space_loss_doubles_distance() {
        let a = free_space_path_loss_db(60e9, 4.0);
        let b = free_space_path_loss_db(60e9, 8.0);
        assert!((b - a - 20.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range() {
        let l = LinkParams::default();
        assert!(d2d_rate(&l, 4.5, 8).is_err());
        assert!(receive_power(&l, 0.0).is_err());
        assert!(LinkParams { b_f: 16, ..l }.validate().is_err());
    }
}
