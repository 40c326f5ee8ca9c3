use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Squared-exponential ARD kernel and its random-feature dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub length_scales: Vec<f64>,
    pub scale: f64,
    pub rffm_dim: usize,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.length_scales.is_empty() || self.length_scales.iter().any(|h| !(*h > 0.0)) {
            return invalid("length scales must be positive");
        }
        if !(self.scale > 0.0) || self.rffm_dim == 0 {
            return invalid("kernel scale and feature dimension must be positive");
        }
        Ok(())
    }
}

/// `c exp(-1/2 sum_k (x1_k - x2_k)^2 / h_k^2)`.
pub fn ard_kernel(x1: &[f64], x2: &[f64], spec: &KernelSpec) -> Result<f64> {
    if x1.len() != spec.length_scales.len() || x2.len() != spec.length_scales.len() {
        return Err(Error::Shape("kernel inputs must match the length-scale count".into()));
    }
    let q: f64 = x1.iter().zip(x2).zip(&spec.length_scales).map(|((a, b), h)| ((a - b) / h).powi(2)).sum();
    Ok(spec.scale * (-0.5 * q).exp())
}

/// Frozen random Fourier map: `sqrt(2c/D) cos(x w_i + phi_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RffMap {
    /// One frequency per row, `D x d`.
    pub weights: DMatrix<f64>,
    pub phases: DVector<f64>,
    pub scale: f64,
}

impl RffMap {
    pub fn dim(&self) -> usize {
        self.weights.nrows()
    }

    fn amplitude(&self) -> f64 {
        (2.0 * self.scale / self.dim() as f64).sqrt()
    }

    /// Map every row of `x`.
    pub fn map_rows(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.weights.ncols() {
            return Err(Error::Shape(format!("{} input columns for a {}-dim map", x.ncols(), self.weights.ncols())));
        }
        let amp = self.amplitude();
        let mut z = x * self.weights.transpose();
        for mut row in z.row_iter_mut() {
            for (v, p) in row.iter_mut().zip(self.phases.iter()) {
                *v = amp * (*v + p).cos();
            }
        }
        Ok(z)
    }
}

/// Frequencies `w_i ~ N(0, diag(h)^-2)` and phases `U[0, 2 pi)`.
pub fn sample_rffm<R: Rng + ?Sized>(spec: &KernelSpec, rng: &mut R) -> Result<RffMap> {
    spec.validate()?;
    let d = spec.length_scales.len();
    let weights = DMatrix::from_fn(spec.rffm_dim, d, |_, k| {
        let z: f64 = StandardNormal.sample(rng);
        z / spec.length_scales[k]
    });
    let phases = DVector::from_fn(spec.rffm_dim, |_, _| rng.random::<f64>() * std::f64::consts::TAU);
    Ok(RffMap { weights, phases, scale: spec.scale })
}

pub fn rffm_map(x: &[f64], map: &RffMap) -> Result<DVector<f64>> {
    let row = DMatrix::from_row_slice(1, x.len(), x);
    Ok(map.map_rows(&row)?.row(0).transpose())
}
