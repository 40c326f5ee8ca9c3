use super::config::ExperimentConfig;
use super::driver::{plan_for_policy, RunMode, Simulation};
use crate::convergence::{aggregate_learning_rate, convergence_time, ConvergencePrediction};
use crate::error::Result;
use crate::learning::learning_rates_with;

/// Closed-form error decay for both modes under a config, without
/// running any iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticPrediction {
    /// Per-iteration decay of the baseline.
    pub baseline: ConvergencePrediction,
    pub baseline_iteration_s: f64,
    /// Per-second decay of D2D-CFL; `None` when the plan is infeasible.
    pub d2dcfl: Option<ConvergencePrediction>,
    pub omega_w: f64,
    pub deadline: f64,
    pub num_offloaders: usize,
}

impl AnalyticPrediction {
    pub fn baseline_error_at(&self, seconds: f64) -> f64 {
        self.baseline.error_at((seconds / self.baseline_iteration_s + 1e-9).floor())
    }

    pub fn d2dcfl_error_at(&self, seconds: f64) -> Option<f64> {
        self.d2dcfl.map(|p| p.error_at(seconds))
    }

    /// Seconds to reach `delta` for (baseline, D2D-CFL).
    pub fn times_to(&self, delta: f64) -> (Option<f64>, Option<f64>) {
        let base = convergence_time(delta, &self.baseline).ok().map(|k| k.ceil() * self.baseline_iteration_s);
        let cfl = self.d2dcfl.and_then(|p| convergence_time(delta, &p).ok());
        (base, cfl)
    }
}

pub fn analytic_prediction(cfg: &ExperimentConfig) -> Result<AnalyticPrediction> {
    let sim = Simulation::new(cfg, RunMode::D2dCfl, None)?;
    let ctx = sim.context();
    let users = sim.users();
    let m = cfg.total_points();
    let d = ctx.cost.d;
    let alpha = match ctx.learning_rate {
        Some(a) => a,
        None => 2.0 / ctx.rule.uncoded(d, m)?,
    };
    let baseline = ConvergencePrediction::uncoded(alpha, m, d);

    let plan = plan_for_policy(ctx, users, sim.graph())?;
    let d2dcfl = if plan.feasible {
        let l0: usize = users.iter().zip(&plan.offload_points).map(|(u, &k)| u.batch_size - k).sum();
        let lhats: Vec<usize> = plan.offload_points.iter().copied().filter(|&k| k > 0).collect();
        let rates = learning_rates_with(&ctx.rule, d, l0, &lhats, ctx.coded_divider)?;
        let alpha_u = rates.uncoded.map(|a| ctx.learning_rate.unwrap_or(a)).unwrap_or(0.0);
        let coded: Vec<(f64, f64)> = rates.coded.iter().zip(&lhats).map(|(&a, &k)| (a, k as f64)).collect();
        let alpha_m = aggregate_learning_rate(&coded, alpha_u, l0);
        let w = &users[plan.weakest];
        Some(ConvergencePrediction::d2dcfl(alpha_m, m, d, plan.omega_w, w.compute_rate, w.batch_size, l0))
    } else {
        None
    };
    Ok(AnalyticPrediction {
        baseline,
        baseline_iteration_s: sim.baseline_duration(),
        d2dcfl,
        omega_w: plan.omega_w,
        deadline: plan.deadline,
        num_offloaders: plan.num_offloaders(),
    })
}
