use nalgebra::DVector;
use serde::Serialize;

use crate::learning::DataBatch;

/// One row of the per-iteration output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub mode: &'static str,
    pub seed: u64,
    pub iteration: u64,
    /// Cumulative simulated time at the end of the iteration.
    pub time_s: f64,
    pub normalized_error: Option<f64>,
    pub r_squared: Option<f64>,
    pub iter_duration_s: f64,
    pub bytes_d2d_coded: u64,
    pub bytes_d2d_uncoded_counterfactual: u64,
    pub num_offloaders: usize,
    /// The plan was infeasible and the iteration ran as baseline.
    pub fallback: bool,
    pub predicted_error: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 12] = [
    "mode",
    "seed",
    "iteration",
    "time_s",
    "normalized_error",
    "r_squared",
    "iter_duration_s",
    "bytes_d2d_coded",
    "bytes_d2d_uncoded_counterfactual",
    "num_offloaders",
    "fallback",
    "predicted_error",
];

/// `||beta - beta*|| / ||beta*||`.
pub fn normalized_error(beta: &DVector<f64>, beta_star: &DVector<f64>) -> f64 {
    (beta - beta_star).norm() / beta_star.norm()
}

/// `1 - ||y - X beta||^2 / ||y - mean(y)||^2` on a held-out batch.
pub fn r_squared(beta: &DVector<f64>, batch: &DataBatch) -> f64 {
    let resid = (&batch.y - &batch.x * beta).norm_squared();
    let mean = batch.y.mean();
    let total = batch.y.map(|v| (v - mean).powi(2)).sum();
    1.0 - resid / total
}

/// Coded bytes over uncompressed-counterfactual bytes; 1 when nothing
/// was offloaded.
pub fn comm_efficiency(records: &[MetricsRecord]) -> f64 {
    let coded: u64 = records.iter().map(|r| r.bytes_d2d_coded).sum();
    let plain: u64 = records.iter().map(|r| r.bytes_d2d_uncoded_counterfactual).sum();
    if plain == 0 {
        1.0
    } else {
        coded as f64 / plain as f64
    }
}

/// First time the error drops to `delta` or below.
pub fn time_to_error(records: &[MetricsRecord], delta: f64) -> Option<f64> {
    records.iter().find(|r| r.normalized_error.is_some_and(|e| e <= delta)).map(|r| r.time_s)
}

/// First time the trailing `window`-iteration mean of R^2 reaches `target`.
pub fn time_to_r2(records: &[MetricsRecord], target: f64, window: usize) -> Option<f64> {
    let vals: Vec<f64> = records.iter().map(|r| r.r_squared.unwrap_or(f64::NAN)).collect();
    (window..=vals.len()).find(|&end| vals[end - window..end].iter().sum::<f64>() / window as f64 >= target).map(|end| records[end - 1].time_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn error_cases() {
        let b = DVector::from_vec(vec![1.0, -2.0]);
        assert_eq!(normalized_error(&b, &b), 0.0);
        assert_eq!(normalized_error(&DVector::zeros(2), &b), 1.0);
        assert_eq!(normalized_error(&(&b * 2.0), &b), 1.0);
    }

    #[test]
    fn r_squared_cases() {
        let batch = DataBatch::new(DMatrix::from_row_slice(2, 1, &[1.0, 1.0]), DVector::from_vec(vec![1.0, 3.0]), 0).unwrap();
        assert_eq!(r_squared(&DVector::from_vec(vec![2.0]), &batch), 0.0);
        let batch = DataBatch::new(DMatrix::from_row_slice(2, 1, &[1.0, 2.0]), DVector::from_vec(vec![1.0, 2.0]), 0).unwrap();
        assert_eq!(r_squared(&DVector::from_vec(vec![1.0]), &batch), 1.0);
        let batch = DataBatch::new(DMatrix::from_row_slice(2, 1, &[1.0, 2.0]), DVector::from_vec(vec![-1.0, 1.0]), 0).unwrap();
        assert_eq!(r_squared(&DVector::from_vec(vec![0.0]), &batch), 0.0);
    }

    fn rec(t: f64, e: f64, coded: u64, plain: u64) -> MetricsRecord {
        MetricsRecord {
            mode: "d2dcfl",
            seed: 0,
            iteration: 0,
            time_s: t,
            normalized_error: Some(e),
            r_squared: Some(1.0 - e),
            iter_duration_s: 0.0,
            bytes_d2d_coded: coded,
            bytes_d2d_uncoded_counterfactual: plain,
            num_offloaders: 0,
            fallback: false,
            predicted_error: None,
        }
    }

    #[test]
    fn efficiency_and_targets() {
        assert_eq!(comm_efficiency(&[rec(1.0, 0.5, 0, 0)]), 1.0);
        assert_eq!(comm_efficiency(&[rec(1.0, 0.5, 44, 440)]), 0.1);
        let rs = [rec(1.0, 0.5, 0, 0), rec(2.0, 0.05, 0, 0), rec(3.0, 0.01, 0, 0)];
        assert_eq!(time_to_error(&rs, 0.1), Some(2.0));
        assert_eq!(time_to_error(&rs, 0.001), None);
        assert_eq!(time_to_r2(&rs, 0.9, 2), Some(3.0));
    }
}
