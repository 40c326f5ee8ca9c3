//! Synthetic and kernel-regression data sources.

mod kernel;
mod kin40k;

pub use kernel::{ard_kernel, rffm_map, sample_rffm, KernelSpec, RffMap};
pub use kin40k::{load_kin40k, parse_kin40k, standin_dataset, Dataset, KIN40K_FEATURES, KIN40K_ROWS, WARMUP_ROWS};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::learning::{DataBatch, UserId};

/// Regression target `beta*_j(t) = sin(phi_j + omega_R t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub phases: DVector<f64>,
    /// Angular rate in rad/s; zero gives a static target.
    pub omega_r: f64,
}

impl GroundTruth {
    /// Phases drawn uniformly from `[0, 2 pi)`.
    pub fn random<R: Rng + ?Sized>(d: usize, omega_r: f64, rng: &mut R) -> Self {
        let phases = DVector::from_fn(d, |_, _| rng.random::<f64>() * std::f64::consts::TAU);
        Self { phases, omega_r }
    }

    pub fn is_dynamic(&self) -> bool {
        self.omega_r != 0.0
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn beta_star(&self) -> DVector<f64> {
        dynamic_model(self, 0.0)
    }
}

pub fn dynamic_model(truth: &GroundTruth, t: f64) -> DVector<f64> {
    truth.phases.map(|p| (p + truth.omega_r * t).sin())
}

/// Standard normal features and noisy linear targets `y = X beta*(t) + z`.
pub fn gen_synthetic_batch<R: Rng + ?Sized>(m: usize, truth: &GroundTruth, sigma: f64, t: f64, owner: UserId, rng: &mut R) -> Result<DataBatch> {
    if !(sigma >= 0.0) {
        return invalid(format!("noise level must be non-negative, got {sigma}"));
    }
    let (x, z) = synthetic_draws(m, truth.dim(), rng);
    synthetic_targets(x, &z, truth, sigma, t, owner)
}

/// Raw features and unit noise for one batch.
pub fn synthetic_draws<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> (DMatrix<f64>, DVector<f64>) {
    let x = DMatrix::from_fn(m, d, |_, _| StandardNormal.sample(rng));
    let z = DVector::from_fn(m, |_, _| StandardNormal.sample(rng));
    (x, z)
}

/// Attach targets at time `t` to pre-drawn features and unit noise.
pub fn synthetic_targets(x: DMatrix<f64>, z: &DVector<f64>, truth: &GroundTruth, sigma: f64, t: f64, owner: UserId) -> Result<DataBatch> {
    let y = &x * dynamic_model(truth, t) + z * sigma;
    DataBatch::new(x, y, owner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_relative_eq;

    #[test]
    fn dynamic_truth_is_periodic() {
        let g = GroundTruth::random(5, 4.7e-2, &mut seeded(1));
        let period = std::f64::consts::TAU / g.omega_r;
        assert_relative_eq!(period, 133.68, epsilon = 0.01);
        assert!((dynamic_model(&g, period) - g.beta_star()).amax() < 1e-12);
        let s = GroundTruth { omega_r: 0.0, ..g };
        assert_eq!(dynamic_model(&s, 50.0), s.beta_star());
    }

    #[test]
    fn noiseless_batch_is_exact() {
        let g = GroundTruth::random(4, 0.0, &mut seeded(2));
        let b = gen_synthetic_batch(30, &g, 0.0, 0.0, 0, &mut seeded(3)).unwrap();
        assert!((&b.y - &b.x * g.beta_star()).amax() == 0.0);
        assert_eq!(b, gen_synthetic_batch(30, &g, 0.0, 0.0, 0, &mut seeded(3)).unwrap());
    }

    #[test]
    fn noise_variance() {
        let g = GroundTruth { phases: DVector::zeros(1), omega_r: 0.0 };
        let b = gen_synthetic_batch(100_000, &g, 0.01, 0.0, 0, &mut seeded(4)).unwrap();
        let v = b.y.map(|v| v * v).mean();
        assert_relative_eq!(v, 1e-4, max_relative = 0.02);
    }
}
