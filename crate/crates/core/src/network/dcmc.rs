//! Discrete-input continuous-output capacity of square QAM over AWGN.
//!
//! Square `M`-QAM splits into two independent `sqrt(M)`-PAM channels at the
//! same SNR, so the capacity is twice the PAM capacity. The Gaussian
//! expectation is evaluated with Gauss-Hermite quadrature.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

pub const QAM64_BITS: f64 = 6.0;

const QUAD_NODES: usize = 64;
const TABLE_MIN_DB: i32 = -20;
const TABLE_MAX_DB: i32 = 40;

/// Nodes and weights for `int exp(-x^2) f(x) dx` (Golub-Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Unit-energy PAM levels with `k` points.
pub fn pam_levels(k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|i| 2.0 * i as f64 - (k as f64 - 1.0)).collect();
    let energy = raw.iter().map(|x| x * x).sum::<f64>() / k as f64;
    raw.iter().map(|x| x / energy.sqrt()).collect()
}

fn quadrature() -> &'static (Vec<f64>, Vec<f64>) {
    static Q: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    Q.get_or_init(|| gauss_hermite(QUAD_NODES))
}

fn pam_capacity(k: usize, snr_linear: f64) -> f64 {
    let levels = pam_levels(k);
    let sigma2 = 1.0 / snr_linear;
    let (nodes, weights) = quadrature();
    let mut loss = 0.0;
    for &xi in &levels {
        for (&u, &w) in nodes.iter().zip(weights) {
            let z = (2.0 * sigma2).sqrt() * u;
            let exps: Vec<f64> = levels.iter().map(|&xj| -((xi - xj + z).powi(2) - z * z) / (2.0 * sigma2)).collect();
            let max = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + exps.iter().map(|e| (e - max).exp()).sum::<f64>().ln();
            loss += w * lse;
        }
    }
    let loss_bits = loss / std::f64::consts::PI.sqrt() / levels.len() as f64 / std::f64::consts::LN_2;
    ((k as f64).log2() - loss_bits).max(0.0)
}

/// Capacity in bits per symbol of square `m`-QAM at `snr_db`, by quadrature.
pub fn dcmc_capacity_exact(m: usize, snr_db: f64) -> f64 {
    let k = (m as f64).sqrt().round() as usize;
    assert_eq!(k * k, m, "square constellation required");
    let c = 2.0 * pam_capacity(k, 10f64.powf(snr_db / 10.0));
    c.min((m as f64).log2())
}

fn table() -> &'static Vec<f64> {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| (TABLE_MIN_DB..=TABLE_MAX_DB).map(|db| dcmc_capacity_exact(64, db as f64)).collect())
}

/// 64-QAM capacity from a 1-dB lookup table with linear interpolation;
/// falls back to quadrature outside the table.
pub fn dcmc_capacity_qam64(snr_db: f64) -> f64 {
    if !(TABLE_MIN_DB as f64..=TABLE_MAX_DB as f64).contains(&snr_db) {
        return dcmc_capacity_exact(64, snr_db);
    }
    let t = table();
    let pos = snr_db - TABLE_MIN_DB as f64;
    let i = (pos.floor() as usize).min(t.len() - 2);
    let frac = pos - i as f64;
    t[i] + frac * (t[i + 1] - t[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_integrates_polynomials() {
        let (x, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((m0 - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((m2 - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn capacity_limits_and_monotonicity() {
        assert!(dcmc_capacity_exact(64, -30.0) < 0.01);
        assert_eq!(dcmc_capacity_exact(64, 45.0), 6.0);
        let mut prev = 0.0;
        for db in -20..=40 {
            let c = dcmc_capacity_qam64(db as f64);
            assert!((0.0..=6.0).contains(&c));
            assert!(c >= prev - 1e-12);
            prev = c;
        }
    }

    #[test]
    fn table_matches_quadrature_between_grid_points() {
        for k in 0..120 {
            let db = -19.75 + 0.5 * k as f64;
            let diff = (dcmc_capacity_qam64(db) - dcmc_capacity_exact(64, db)).abs();
            assert!(diff <= 0.01, "{db} dB: {diff}");
        }
    }

    #[test]
    fn low_snr_tracks_gaussian_capacity() {
        let snr: f64 = 10f64.powf(-1.0);
        assert!((dcmc_capacity_exact(64, -10.0) - (1.0 + snr).log2()).abs() < 2e-3);
    }
}
