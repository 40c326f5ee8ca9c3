//! Least-squares gradients, Lipschitz estimates, learning rates and the
//! server-side aggregate update.

use nalgebra::{DMatrix, DVector};

use crate::coding::CodedBatch;
use crate::error::{invalid, Error, Result};

pub type UserId = usize;

/// A block of labelled observations held by one user.
#[derive(Clone, Debug, PartialEq)]
pub struct DataBatch {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub owner: UserId,
}

impl DataBatch {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, owner: UserId) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Shape(format!("{} rows of X but {} targets", x.nrows(), y.len())));
        }
        Ok(Self { x, y, owner })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Split into the first `k` rows and the rest.
    pub fn split_at(&self, k: usize) -> (DataBatch, DataBatch) {
        let k = k.min(self.len());
        let rest = self.len() - k;
        let head = DataBatch {
            x: self.x.rows(0, k).into_owned(),
            y: self.y.rows(0, k).into_owned(),
            owner: self.owner,
        };
        let tail = DataBatch {
            x: self.x.rows(k, rest).into_owned(),
            y: self.y.rows(k, rest).into_owned(),
            owner: self.owner,
        };
        (head, tail)
    }

    /// Stack batches vertically (owner taken from the first).
    pub fn concat(parts: &[DataBatch]) -> Result<DataBatch> {
        let first = parts.first().ok_or_else(|| Error::EmptyBatch("nothing to concatenate".into()))?;
        let d = first.dim();
        let n: usize = parts.iter().map(DataBatch::len).sum();
        let mut x = DMatrix::zeros(n, d);
        let mut y = DVector::zeros(n);
        let mut r = 0;
        for p in parts {
            if p.dim() != d {
                return Err(Error::Shape(format!("feature dims {} and {}", d, p.dim())));
            }
            x.rows_mut(r, p.len()).copy_from(&p.x);
            y.rows_mut(r, p.len()).copy_from(&p.y);
            r += p.len();
        }
        Ok(DataBatch { x, y, owner: first.owner })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub beta: DVector<f64>,
    pub iteration: u64,
    pub sim_time: f64,
}

impl ModelState {
    pub fn zeros(d: usize) -> Self {
        Self { beta: DVector::zeros(d), iteration: 0, sim_time: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientSource {
    Uncoded,
    Coded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGradient {
    pub grad: DVector<f64>,
    pub weight: f64,
    pub source: GradientSource,
}

/// Step-size regime; sets the divider applied to coded rates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Synthetic,
    Realistic,
}

impl Regime {
    pub fn coded_divider(self) -> f64 {
        match self {
            Regime::Synthetic => 2.0,
            Regime::Realistic => 3.0,
        }
    }
}

/// How Lipschitz constants are estimated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LipschitzRule {
    /// Marchenko-Pastur edge for whitened features.
    MpEdge,
    /// Edge rescaled by a measured feature second-moment matrix `S`:
    /// its largest eigenvalue and its trace.
    Empirical { lambda_max: f64, trace: f64 },
}

impl LipschitzRule {
    pub fn uncoded(&self, d: usize, m: usize) -> Result<f64> {
        match *self {
            LipschitzRule::MpEdge => estimate_lipschitz_uncoded(d, m),
            LipschitzRule::Empirical { lambda_max, trace } => {
                if m == 0 {
                    return invalid("uncoded Lipschitz estimate needs m >= 1");
                }
                Ok(((m as f64 * lambda_max).sqrt() + trace.sqrt()).powi(2))
            }
        }
    }

    pub fn coded(&self, d: usize, lhat: usize) -> f64 {
        match *self {
            LipschitzRule::MpEdge => estimate_lipschitz_coded(d, lhat),
            LipschitzRule::Empirical { trace, .. } => lhat as f64 * trace,
        }
    }

    /// Fit the empirical rule from a feature matrix (rows are samples).
    pub fn empirical_from(x: &DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::EmptyBatch("no rows to estimate feature moments".into()));
        }
        let s = x.tr_mul(x) / x.nrows() as f64;
        let trace = s.trace();
        let lambda_max = s.symmetric_eigenvalues().max();
        Ok(LipschitzRule::Empirical { lambda_max, trace })
    }
}

/// Step sizes for one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct LearningRates {
    /// Rate on uncoded partial gradients; `None` when nothing stays local.
    pub uncoded: Option<f64>,
    /// One rate per coded block, in the order the block sizes were given.
    pub coded: Vec<f64>,
}

/// `X^T (X beta - y)`.
pub fn partial_gradient(batch: &DataBatch, beta: &DVector<f64>) -> Result<DVector<f64>> {
    if batch.dim() != beta.len() {
        return Err(Error::Shape(format!("batch dim {} vs model dim {}", batch.dim(), beta.len())));
    }
    if batch.is_empty() {
        return Ok(DVector::zeros(beta.len()));
    }
    let r = &batch.x * beta - &batch.y;
    Ok(batch.x.tr_mul(&r))
}

/// Gradient over a compressed block, `X~^T (X~ beta - y~)`.
pub fn coded_gradient(coded: &CodedBatch, beta: &DVector<f64>) -> Result<DVector<f64>> {
    if coded.x.ncols() != beta.len() {
        return Err(Error::Shape(format!("coded dim {} vs model dim {}", coded.x.ncols(), beta.len())));
    }
    let r = &coded.x * beta - &coded.y;
    Ok(coded.x.tr_mul(&r))
}

/// `(sqrt(m) + sqrt(d))^2`, the largest eigenvalue edge of `X^T X` for an
/// `m x d` standard Gaussian design.
pub fn estimate_lipschitz_uncoded(d: usize, m: usize) -> Result<f64> {
    if m == 0 || d == 0 {
        return invalid(format!("Lipschitz estimate needs d, m >= 1 (d={d}, m={m})"));
    }
    Ok(((m as f64).sqrt() + (d as f64).sqrt()).powi(2))
}

/// `lhat * d`, the expected squared norm of a single coded row.
pub fn estimate_lipschitz_coded(d: usize, lhat: usize) -> f64 {
    (lhat * d) as f64
}

/// Step sizes `2/L` for the uncoded part and `2/(L_c * divider)` for each
/// coded block, using the regime's divider.
pub fn learning_rates(d: usize, l0: usize, lhats: &[usize], regime: Regime) -> Result<LearningRates> {
    learning_rates_with(&LipschitzRule::MpEdge, d, l0, lhats, regime.coded_divider())
}

pub fn learning_rates_with(
    rule: &LipschitzRule,
    d: usize,
    l0: usize,
    lhats: &[usize],
    divider: f64,
) -> Result<LearningRates> {
    if !(divider > 0.0) {
        return invalid(format!("coded rate divider must be positive, got {divider}"));
    }
    let coded_points: usize = lhats.iter().sum();
    if l0 == 0 && coded_points == 0 {
        return invalid("no uncoded and no coded points");
    }
    let uncoded = if l0 > 0 { Some(2.0 / rule.uncoded(d, l0)?) } else { None };
    let mut coded = Vec::with_capacity(lhats.len());
    for &lh in lhats {
        if lh == 0 {
            return invalid("coded block with zero offloaded points");
        }
        coded.push(2.0 / rule.coded(d, lh) / divider);
    }
    Ok(LearningRates { uncoded, coded })
}

/// `beta <- beta - sum_i w_i g_i`; bumps the iteration counter.
pub fn aggregate_update(model: &ModelState, grads: &[WeightedGradient]) -> Result<ModelState> {
    let mut beta = model.beta.clone();
    for g in grads {
        if g.grad.len() != beta.len() {
            return Err(Error::Shape(format!("gradient dim {} vs model dim {}", g.grad.len(), beta.len())));
        }
        beta.axpy(-g.weight, &g.grad, 1.0);
    }
    Ok(ModelState { beta, iteration: model.iteration + 1, sim_time: model.sim_time })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gradient_of_two_point_example() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = DataBatch::new(x, DVector::from_vec(vec![1.0, 2.0]), 0).unwrap();
        let g = partial_gradient(&b, &DVector::zeros(2)).unwrap();
        assert_eq!(g, DVector::from_vec(vec![-1.0, -2.0]));
        let g = partial_gradient(&b, &DVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(g, DVector::zeros(2));
    }

    #[test]
    fn empty_batch_gives_zero_gradient() {
        let b = DataBatch::new(DMatrix::zeros(0, 3), DVector::zeros(0), 1).unwrap();
        assert_eq!(partial_gradient(&b, &DVector::from_element(3, 1.0)).unwrap(), DVector::zeros(3));
    }

    #[test]
    fn lipschitz_edge_values() {
        assert_relative_eq!(estimate_lipschitz_uncoded(10, 250).unwrap(), 360.0, epsilon = 1e-12);
        assert_eq!(estimate_lipschitz_uncoded(1, 1).unwrap(), 4.0);
        assert_relative_eq!(estimate_lipschitz_uncoded(7, 7).unwrap(), 28.0, epsilon = 1e-12);
        assert_relative_eq!(estimate_lipschitz_uncoded(8, 100).unwrap(), 164.57, epsilon = 0.01);
        assert!(estimate_lipschitz_uncoded(8, 0).is_err());
        assert_eq!(estimate_lipschitz_coded(8, 10), 80.0);
    }

    #[test]
    fn regime_dividers() {
        let s = learning_rates(8, 90, &[10], Regime::Synthetic).unwrap();
        let r = learning_rates(8, 90, &[10], Regime::Realistic).unwrap();
        assert_relative_eq!(s.coded[0], 0.0125, epsilon = 1e-15);
        assert_relative_eq!(r.coded[0], 0.008333333333333333, epsilon = 1e-15);
        assert!(learning_rates(8, 0, &[], Regime::Synthetic).is_err());
        assert_eq!(learning_rates(8, 0, &[3], Regime::Synthetic).unwrap().uncoded, None);
    }

    #[test]
    fn empirical_rule_reduces_to_edge_for_identity_moments() {
        let rule = LipschitzRule::Empirical { lambda_max: 1.0, trace: 10.0 };
        assert_relative_eq!(rule.uncoded(10, 250).unwrap(), estimate_lipschitz_uncoded(10, 250).unwrap());
        assert_eq!(rule.coded(10, 3), 30.0);
    }

    #[test]
    fn aggregate_is_sum_of_weighted_steps() {
        let m = ModelState::zeros(2);
        let g = |v: [f64; 2], w| WeightedGradient { grad: DVector::from_vec(v.to_vec()), weight: w, source: GradientSource::Uncoded };
        let out = aggregate_update(&m, &[g([1.0, 2.0], 0.5), g([-2.0, 0.0], 0.25)]).unwrap();
        assert_eq!(out.beta, DVector::from_vec(vec![0.0, -1.0]));
        assert_eq!(out.iteration, 1);
    }
}
