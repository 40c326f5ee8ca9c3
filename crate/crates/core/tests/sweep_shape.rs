//! Qualitative shape of the heterogeneity sweeps on the stand-in dataset.

use d2dcfl::experiment::{sweep, DatasetKind, ExperimentConfig};

fn rhos() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

#[test]
fn time_to_r2_grows_with_rho() {
    let cfg = ExperimentConfig { dataset: DatasetKind::Standin, users: 5, points_per_user: 20, ..Default::default() };
    let rows = sweep(&cfg, &rhos(), 100).unwrap();
    for r in &rows {
        assert_eq!(r.d2dcfl_reached, 100, "rho {}", r.rho);
        assert!(r.d2dcfl_time <= r.baseline_time + 1e-9, "rho {}", r.rho);
    }
    for w in rows.windows(2) {
        assert!(w[1].d2dcfl_time >= w[0].d2dcfl_time - 1e-9, "rho {} -> {}: {} -> {}", w[0].rho, w[1].rho, w[0].d2dcfl_time, w[1].d2dcfl_time);
    }
}

#[test]
fn traffic_savings_decline_after_offloaders_saturate() {
    let cfg = ExperimentConfig { dataset: DatasetKind::Standin, users: 50, points_per_user: 20, iterations: 3, ..Default::default() };
    let rows = sweep(&cfg, &rhos(), 100).unwrap();
    let at = |rho: f64| rows.iter().find(|r| (r.rho - rho).abs() < 1e-9).unwrap();
    assert_eq!(at(0.4).mean_offloaders, 25.0);
    let tail: Vec<_> = rows.iter().filter(|r| r.rho >= 0.4 - 1e-9).collect();
    for w in tail.windows(2) {
        assert!(w[1].comm_savings <= w[0].comm_savings + 1e-12, "rho {} -> {}", w[0].rho, w[1].rho);
        assert!(w[1].comm_efficiency >= w[0].comm_efficiency - 1e-12);
    }
}
