//! Gaussian compression of data blocks, compression-rate rules and
//! mutual-information privacy accounting.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::learning::{DataBatch, UserId};

/// A compressed block `X~ = G X`, `y~ = G y`.
#[derive(Clone, Debug, PartialEq)]
pub struct CodedBatch {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub gamma: f64,
    pub source_points: usize,
    pub owner: UserId,
}

impl CodedBatch {
    /// Number of coded rows `c`.
    pub fn rows(&self) -> usize {
        self.x.nrows()
    }
}

/// Number of coded rows for rate `gamma` over `lhat` points: `max(1, ceil(gamma * lhat))`.
pub fn coded_rows(gamma: f64, lhat: usize) -> usize {
    ((gamma * lhat as f64 - 1e-9).ceil() as usize).max(1)
}

/// `c x lhat` matrix of i.i.d. `N(0, 1/sqrt(c))` entries.
pub fn sample_compression_matrix<R: Rng + ?Sized>(lhat: usize, c: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if lhat == 0 || c == 0 {
        return invalid(format!("compression matrix needs lhat, c >= 1 (lhat={lhat}, c={c})"));
    }
    let sd = (c as f64).powf(-0.25);
    let normal = Normal::new(0.0, sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(DMatrix::from_fn(c, lhat, |_, _| normal.sample(rng)))
}

pub fn compress(batch: &DataBatch, g: &DMatrix<f64>) -> Result<CodedBatch> {
    if g.ncols() != batch.len() {
        return Err(Error::Shape(format!("G has {} columns but batch has {} rows", g.ncols(), batch.len())));
    }
    let lhat = batch.len();
    Ok(CodedBatch {
        x: g * &batch.x,
        y: g * &batch.y,
        gamma: g.nrows() as f64 / lhat.max(1) as f64,
        source_points: lhat,
        owner: batch.owner,
    })
}

/// `1 / lhat`: a single coded row per offloaded block.
pub fn optimal_compression_rate(lhat: usize) -> Result<f64> {
    if lhat == 0 {
        return invalid("optimal compression rate needs lhat >= 1");
    }
    Ok(1.0 / lhat as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateBounds {
    pub lower: f64,
    pub upper: f64,
}

impl RateBounds {
    /// True when no rate makes offloading faster than local compute.
    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }

    pub fn contains(&self, gamma: f64) -> bool {
        gamma >= self.lower && gamma <= self.upper
    }
}

/// Lower bound `1/lhat` and upper bound `(0.5 (1+1/d)(lhat + a/r_D))^-1`.
/// `r_d` may be infinite.
pub fn compression_rate_bounds(lhat: usize, a: f64, r_d: f64, d: usize) -> Result<RateBounds> {
    if lhat == 0 || d == 0 || !(a > 0.0) || !(r_d > 0.0) {
        return invalid("compression bounds need positive lhat, a, r_D, d");
    }
    let lower = 1.0 / lhat as f64;
    let upper = 1.0 / (0.5 * (1.0 + 1.0 / d as f64) * (lhat as f64 + a / r_d));
    Ok(RateBounds { lower, upper })
}

/// Minimum over columns of `sum_i x_ij^2 - max_i x_ij^2`.
pub fn psi(x: &DMatrix<f64>) -> Result<f64> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::EmptyBatch("psi of an empty matrix".into()));
    }
    let mut best = f64::INFINITY;
    for col in x.column_iter() {
        let mut sum = 0.0;
        let mut max = 0.0f64;
        for &v in col.iter() {
            let s = v * v;
            sum += s;
            max = max.max(s);
        }
        best = best.min((sum - max).max(0.0));
    }
    Ok(best)
}

/// Lower bound on the per-link leakage in bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyBudget {
    /// Infinite when `psi == 0`.
    pub epsilon_lower: f64,
    pub psi: f64,
    pub omega: f64,
    /// Rate times the owner's batch length, `gamma * l`.
    pub gamma_l: f64,
}

impl PrivacyBudget {
    pub fn is_unbounded(&self) -> bool {
        self.epsilon_lower.is_infinite()
    }

    /// Recompute the bound from the stored fields.
    pub fn recompute(&self) -> f64 {
        epsilon_bound(self.gamma_l, self.psi)
    }
}

fn epsilon_bound(gamma_l: f64, psi: f64) -> f64 {
    if psi == 0.0 {
        return f64::INFINITY;
    }
    0.5 * (gamma_l / psi).ln_1p() / std::f64::consts::LN_2
}

/// Leakage bound for an owner holding batch `x` (its `l` rows) that
/// offloads `lhat` of them compressed at rate `gamma`:
/// `1/2 log2(1 + gamma l / psi(x))`. With `gamma = 1/lhat` this is
/// `1/2 log2(1 + 1/(omega psi))`, `omega = lhat / l`.
pub fn privacy_budget(x: &DMatrix<f64>, gamma: f64, lhat: usize) -> Result<PrivacyBudget> {
    let p = psi(x)?;
    let l = x.nrows();
    if lhat == 0 || lhat > l {
        return invalid(format!("offloaded count {lhat} outside 1..={l}"));
    }
    if !(gamma >= 0.0) {
        return invalid(format!("compression rate must be non-negative, got {gamma}"));
    }
    let gamma_l = gamma * l as f64;
    Ok(PrivacyBudget { epsilon_lower: epsilon_bound(gamma_l, p), psi: p, omega: lhat as f64 / l as f64, gamma_l })
}

/// Leakage bound of gradients computed from coded data. Post-processing
/// cannot increase leakage, so the link bound carries over.
pub fn gradient_transmission_budget(budget: PrivacyBudget) -> PrivacyBudget {
    budget
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_relative_eq;

    fn sample_var(m: &DMatrix<f64>) -> f64 {
        let n = m.len() as f64;
        let mean = m.sum() / n;
        m.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn matrix_variance_follows_inverse_sqrt_c() {
        let g = sample_compression_matrix(100_000, 1, &mut seeded(1)).unwrap();
        let v = sample_var(&g);
        assert!((0.99..=1.01).contains(&v), "{v}");
        let g = sample_compression_matrix(50_000, 4, &mut seeded(2)).unwrap();
        assert_relative_eq!(sample_var(&g), 0.5, epsilon = 0.01);
        assert_eq!(
            sample_compression_matrix(5, 1, &mut seeded(3)).unwrap(),
            sample_compression_matrix(5, 1, &mut seeded(3)).unwrap()
        );
    }

    #[test]
    fn compress_sums_rows_with_ones() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 5.0]);
        let b = DataBatch::new(x, DVector::from_vec(vec![1.0, -1.0]), 4).unwrap();
        let c = compress(&b, &DMatrix::from_element(1, 2, 1.0)).unwrap();
        assert_eq!(c.x, DMatrix::from_row_slice(1, 2, &[4.0, 7.0]));
        assert_eq!(c.y[0], 0.0);
        assert_eq!(c.owner, 4);
        let id = compress(&b, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(id.x, b.x);
        assert!(compress(&b, &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn rate_rules() {
        assert_eq!(optimal_compression_rate(1).unwrap(), 1.0);
        assert_eq!(optimal_compression_rate(10).unwrap(), 0.1);
        assert!(optimal_compression_rate(0).is_err());
        let b = compression_rate_bounds(10, 400.0, 1e6, 8).unwrap();
        assert_relative_eq!(b.upper, 0.177770, epsilon = 1e-5);
        assert_eq!(b.lower, 0.1);
        let b = compression_rate_bounds(1, 400.0, f64::INFINITY, 1).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        let b = compression_rate_bounds(10, 400.0, f64::INFINITY, 1_000_000_000).unwrap();
        assert_relative_eq!(b.upper, 0.2, epsilon = 1e-8);
        assert_eq!(coded_rows(0.1, 10), 1);
        assert_eq!(coded_rows(0.5, 3), 2);
    }

    #[test]
    fn psi_hand_values() {
        assert_eq!(psi(&DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 2.0])).unwrap(), 5.0);
        assert_eq!(psi(&DMatrix::from_row_slice(1, 2, &[3.0, 4.0])).unwrap(), 0.0);
        assert_eq!(psi(&DMatrix::from_row_slice(3, 2, &[1.0, 3.0, 1.0, 0.0, 1.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn budget_values() {
        // One column [1, 1]: psi = 1.
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let b = privacy_budget(&x, 0.5, 1).unwrap();
        assert_relative_eq!(b.epsilon_lower, 0.5, epsilon = 1e-15);
        assert_relative_eq!(b.omega, 0.5);
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 2.0]);
        let b = privacy_budget(&x, 1.0 / 3.0, 3).unwrap();
        assert_relative_eq!(b.epsilon_lower, 0.5 * 1.2f64.log2(), epsilon = 1e-15);
        assert_relative_eq!(b.epsilon_lower, 0.1315, epsilon = 1e-4);
        assert_eq!(privacy_budget(&x, 0.0, 3).unwrap().epsilon_lower, 0.0);
        let single = DMatrix::from_row_slice(1, 1, &[2.0]);
        let u = privacy_budget(&single, 1.0, 1).unwrap();
        assert!(u.is_unbounded());
        assert!(gradient_transmission_budget(u).is_unbounded());
        assert_eq!(gradient_transmission_budget(b), b);
    }
}
