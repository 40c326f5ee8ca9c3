//! Closed-form error decay and convergence-time inversion.

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictionRegime {
    Uncoded,
    FullyCoded,
    D2dCfl,
}

/// `err(t) = exp(-rate_coefficient * t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergencePrediction {
    pub rate_coefficient: f64,
    pub regime: PredictionRegime,
    pub alpha_m: f64,
    pub l0: usize,
}

impl ConvergencePrediction {
    pub fn uncoded(alpha: f64, m: usize, d: usize) -> Self {
        Self { rate_coefficient: uncoded_rate(alpha, m, d), regime: PredictionRegime::Uncoded, alpha_m: alpha * m as f64, l0: m }
    }

    pub fn coded(alpha_c: f64, m: usize, d: usize) -> Self {
        Self { rate_coefficient: uncoded_rate(alpha_c, m, d), regime: PredictionRegime::FullyCoded, alpha_m: alpha_c * m as f64, l0: 0 }
    }

    /// Per-second rate in the D2D-CFL time base.
    pub fn d2dcfl(alpha_m: f64, m: usize, d: usize, omega_w: f64, a_w: f64, l_w: usize, l0: usize) -> Self {
        Self { rate_coefficient: d2dcfl_rate(alpha_m, m, d, omega_w, a_w, l_w), regime: PredictionRegime::D2dCfl, alpha_m, l0 }
    }

    pub fn is_convergent(&self) -> bool {
        self.rate_coefficient > 0.0
    }

    pub fn error_at(&self, t: f64) -> f64 {
        (-self.rate_coefficient * t).exp()
    }
}

fn uncoded_rate(alpha: f64, m: usize, d: usize) -> f64 {
    alpha * m as f64 * (1.0 - alpha * d as f64 / 2.0)
}

fn d2dcfl_rate(alpha_m: f64, m: usize, d: usize, omega_w: f64, a_w: f64, l_w: usize) -> f64 {
    let big_d = 0.5 * (1.0 + 1.0 / d as f64) - 1.0;
    let per_iteration = alpha_m * (1.0 - alpha_m / m as f64 * d as f64 / 2.0);
    per_iteration / (1.0 + big_d * omega_w) * a_w / (2.0 * l_w as f64)
}

/// `exp(-alpha m (1 - alpha d / 2) t)`, `t` in iterations.
pub fn predict_error_uncoded(alpha: f64, m: usize, d: usize, t: f64) -> f64 {
    ConvergencePrediction::uncoded(alpha, m, d).error_at(t)
}

pub fn predict_error_coded(alpha_c: f64, m: usize, d: usize, t: f64) -> f64 {
    ConvergencePrediction::coded(alpha_c, m, d).error_at(t)
}

/// `sum_i alpha_c_i * (omega_i l_i) + alpha_u * l0`, with coded entries
/// given as `(alpha_c_i, omega_i l_i)` pairs.
pub fn aggregate_learning_rate(coded: &[(f64, f64)], alpha_u: f64, l0: usize) -> f64 {
    coded.iter().map(|(a, pts)| a * pts).sum::<f64>() + alpha_u * l0 as f64
}

/// Error after `t` seconds of D2D-CFL with aggregate rate `alpha_m` over
/// `m` points. With `omega_w = 0` this is the uncoded prediction evaluated
/// in iterations of length `T_gd(l_W)`.
pub fn predict_error_d2dcfl(alpha_m: f64, m: usize, d: usize, omega_w: f64, a_w: f64, l_w: usize, t: f64) -> Result<f64> {
    if d < 2 {
        return invalid("D2D-CFL prediction needs d >= 2");
    }
    Ok((-d2dcfl_rate(alpha_m, m, d, omega_w, a_w, l_w) * t).exp())
}

/// Time to reach error `delta`: `-ln(delta) / rate`.
pub fn convergence_time(delta: f64, prediction: &ConvergencePrediction) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid(format!("target error must lie in (0, 1], got {delta}"));
    }
    if !prediction.is_convergent() {
        return invalid("prediction does not converge");
    }
    Ok(-delta.ln() / prediction.rate_coefficient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn predictor_values() {
        assert_eq!(predict_error_uncoded(0.001, 250, 10, 0.0), 1.0);
        assert_eq!(predict_error_uncoded(0.2, 250, 10, 7.0), 1.0);
        assert_relative_eq!(predict_error_uncoded(0.001, 250, 10, 10.0), (-0.25f64 * 0.995 * 10.0).exp(), epsilon = 1e-15);
        assert_relative_eq!(predict_error_uncoded(0.001, 250, 10, 10.0), 0.0832, epsilon = 1e-4);
        assert_relative_eq!(predict_error_coded(0.0005, 250, 10, 10.0), 0.2874, epsilon = 1e-4);
        assert_eq!(predict_error_coded(0.001, 250, 10, 3.0), predict_error_uncoded(0.001, 250, 10, 3.0));
    }

    #[test]
    fn aggregate_rate_examples() {
        assert_relative_eq!(aggregate_learning_rate(&[(0.01, 10.0)], 0.002, 240), 0.58, epsilon = 1e-15);
        assert_eq!(aggregate_learning_rate(&[], 0.002, 100), 0.2);
        assert_eq!(aggregate_learning_rate(&[(0.1, 2.0), (0.2, 1.0)], 0.5, 0), 0.4);
    }

    #[test]
    fn d2dcfl_predictor() {
        assert_eq!(predict_error_d2dcfl(0.5, 100, 8, 1.0, 400.0, 10, 0.0).unwrap(), 1.0);
        let r0 = ConvergencePrediction::d2dcfl(0.5, 100, 8, 0.0, 400.0, 10, 100).rate_coefficient;
        let r1 = ConvergencePrediction::d2dcfl(0.5, 100, 8, 1.0, 400.0, 10, 100).rate_coefficient;
        assert_relative_eq!(r1 / r0, 1.0 / 0.5625, epsilon = 1e-12);
        // omega_W = 0: uncoded prediction in iterations of T_gd(l_W) = 0.05 s.
        let alpha = 0.004;
        let e = predict_error_d2dcfl(alpha * 250.0, 250, 10, 0.0, 400.0, 10, 1.5).unwrap();
        assert_relative_eq!(e, predict_error_uncoded(alpha, 250, 10, 1.5 / 0.05), epsilon = 1e-14);
        assert!(predict_error_d2dcfl(0.5, 10, 1, 0.0, 1.0, 1, 1.0).is_err());
    }

    #[test]
    fn inversion() {
        let unit = ConvergencePrediction { rate_coefficient: 1.0, regime: PredictionRegime::Uncoded, alpha_m: 1.0, l0: 1 };
        assert_eq!(convergence_time(1.0, &unit).unwrap(), 0.0);
        assert_relative_eq!(convergence_time((-1.0f64).exp(), &unit).unwrap(), 1.0, epsilon = 1e-15);
        let p = ConvergencePrediction { rate_coefficient: 0.2486, ..unit };
        assert_relative_eq!(convergence_time(2.2e-3, &p).unwrap(), 24.6, epsilon = 0.05);
        let stuck = ConvergencePrediction { rate_coefficient: 0.0, ..unit };
        assert!(convergence_time(0.5, &stuck).is_err());
    }
}
