use std::sync::Arc;

use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;

use super::config::{DatasetKind, ExperimentConfig, LipschitzKind, OmegaPolicy, Topology};
use super::metrics::{comm_efficiency, normalized_error, r_squared, time_to_error, time_to_r2, MetricsRecord};
use crate::allocation::{achievable_deadline, equal_rate_plan, optimize_omega_w, t_gradient, AllocationPlan, CostModel};
use crate::coding::{compress, sample_compression_matrix};
use crate::convergence::{aggregate_learning_rate, ConvergencePrediction};
use crate::data::{dynamic_model, load_kin40k, sample_rffm, standin_dataset, synthetic_draws, synthetic_targets, Dataset, GroundTruth, RffMap};
use crate::error::{Error, Result};
use crate::learning::{
    aggregate_update, coded_gradient, learning_rates_with, partial_gradient, DataBatch, GradientSource, LipschitzRule, ModelState,
    WeightedGradient,
};
use crate::network::{d2d_graph, d2d_rate, fleet, heterogeneity_profile, place_users, step_mobility, Graph, MobilityConfig, Roles, UserState};
use crate::rng::{seeded, substream, Stream};

/// Rows of the warm-up split used to estimate feature moments.
const MOMENT_ROWS: usize = 2_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Baseline,
    D2dCfl,
}

impl RunMode {
    pub fn name(self) -> &'static str {
        match self {
            RunMode::Baseline => "baseline",
            RunMode::D2dCfl => "d2dcfl",
        }
    }
}

/// Where each iteration's batches come from.
pub enum DataSource {
    Synthetic { truth: GroundTruth, sigma: f64, rng: Box<ChaCha8Rng> },
    Stream { data: Arc<Dataset>, map: RffMap, cursor: usize },
}

impl DataSource {
    /// One batch per user, or `None` when the stream is exhausted.
    pub fn next_batches(&mut self, users: &[UserState], t: f64) -> Result<Option<Vec<DataBatch>>> {
        match self {
            DataSource::Synthetic { truth, sigma, rng } => {
                let mut out = Vec::with_capacity(users.len());
                for u in users {
                    let (x, z) = synthetic_draws(u.batch_size, truth.dim(), rng);
                    out.push(synthetic_targets(x, &z, truth, *sigma, t, u.id)?);
                }
                Ok(Some(out))
            }
            DataSource::Stream { data, map, cursor } => {
                let need: usize = users.iter().map(|u| u.batch_size).sum();
                if *cursor + need > data.rows() {
                    return Ok(None);
                }
                let mut out = Vec::with_capacity(users.len());
                for u in users {
                    let x = map.map_rows(&data.x.rows(*cursor, u.batch_size).into_owned())?;
                    let y = data.y.rows(*cursor, u.batch_size).into_owned();
                    out.push(DataBatch::new(x, y, u.id)?);
                    *cursor += u.batch_size;
                }
                Ok(Some(out))
            }
        }
    }

    pub fn truth(&self) -> Option<&GroundTruth> {
        match self {
            DataSource::Synthetic { truth, .. } => Some(truth),
            DataSource::Stream { .. } => None,
        }
    }
}

/// Load or generate the regression dataset the config asks for.
pub fn resolve_dataset(cfg: &ExperimentConfig) -> Result<Option<Arc<Dataset>>> {
    match cfg.dataset {
        DatasetKind::Synthetic => Ok(None),
        DatasetKind::Kin40k => match &cfg.dataset_path {
            Some(p) if p.exists() => Ok(Some(Arc::new(load_kin40k(p)?))),
            other => {
                log::warn!("kin40k file {:?} not found; using the synthetic stand-in", other);
                Ok(Some(Arc::new(standin_dataset(&mut seeded(cfg.standin_seed))?)))
            }
        },
        DatasetKind::Standin => Ok(Some(Arc::new(standin_dataset(&mut seeded(cfg.standin_seed))?))),
    }
}

/// Per-iteration outcome of the D2D-CFL step.
#[derive(Clone, Debug)]
pub struct IterationOutcome {
    pub model: ModelState,
    pub duration: f64,
    pub bytes_coded: u64,
    pub bytes_plain: u64,
    pub num_offloaders: usize,
    pub fallback: bool,
    /// Aggregate learning rate actually applied.
    pub alpha_m: f64,
    pub plan: Option<AllocationPlan>,
}

/// Shared per-run constants.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub cost: CostModel,
    pub rule: LipschitzRule,
    pub coded_divider: f64,
    pub learning_rate: Option<f64>,
    pub policy: OmegaPolicy,
    pub penalty: f64,
}

impl RunContext {
    fn uncoded_rate(&self, points: usize) -> Result<f64> {
        match self.learning_rate {
            Some(a) => Ok(a),
            None => Ok(2.0 / self.rule.uncoded(self.cost.d, points)?),
        }
    }
}

/// Every user computes its own gradient; the iteration lasts as long as
/// the slowest user.
pub fn run_iteration_baseline(ctx: &RunContext, users: &[UserState], model: &ModelState, batches: &[DataBatch]) -> Result<IterationOutcome> {
    let m: usize = batches.iter().map(DataBatch::len).sum();
    let alpha = ctx.uncoded_rate(m)?;
    let grads = batches
        .iter()
        .map(|b| Ok(WeightedGradient { grad: partial_gradient(b, &model.beta)?, weight: alpha, source: GradientSource::Uncoded }))
        .collect::<Result<Vec<_>>>()?;
    let mut next = aggregate_update(model, &grads)?;
    let duration = users.iter().map(|u| t_gradient(u.batch_size, u.compute_rate)).fold(0.0, f64::max);
    next.sim_time += duration;
    Ok(IterationOutcome {
        model: next,
        duration,
        bytes_coded: 0,
        bytes_plain: 0,
        num_offloaders: 0,
        fallback: false,
        alpha_m: alpha * m as f64,
        plan: None,
    })
}

pub fn plan_for_policy(ctx: &RunContext, users: &[UserState], graph: &Graph) -> Result<AllocationPlan> {
    match ctx.policy {
        OmegaPolicy::Optimal => {
            let choice = optimize_omega_w(users, graph, &ctx.cost, ctx.penalty)?;
            achievable_deadline(users, graph, choice.omega_w, &ctx.cost)
        }
        OmegaPolicy::Full => achievable_deadline(users, graph, 1.0, &ctx.cost),
        OmegaPolicy::Fixed(w) => achievable_deadline(users, graph, w, &ctx.cost),
        OmegaPolicy::EqualGamma(g) => equal_rate_plan(users, graph, g, &ctx.cost),
    }
}

/// Plan, compress, route and aggregate. Falls back to the baseline step
/// when the plan is infeasible.
pub fn run_iteration_d2dcfl<R: rand::Rng + ?Sized>(
    ctx: &RunContext,
    users: &[UserState],
    model: &ModelState,
    batches: &[DataBatch],
    graph: &Graph,
    coding_rng: &mut R,
) -> Result<IterationOutcome> {
    let plan = plan_for_policy(ctx, users, graph)?;
    if !plan.feasible {
        let mut out = run_iteration_baseline(ctx, users, model, batches)?;
        out.fallback = true;
        out.plan = Some(plan);
        return Ok(out);
    }
    let d = ctx.cost.d;
    let l0: usize = batches.iter().zip(&plan.offload_points).map(|(b, &k)| b.len() - k).sum();
    let lhats: Vec<usize> = plan.offload_points.iter().copied().filter(|&k| k > 0).collect();
    let rates = learning_rates_with(&ctx.rule, d, l0, &lhats, ctx.coded_divider)?;
    let alpha_u = match (rates.uncoded, ctx.learning_rate) {
        (Some(_), Some(a)) => Some(a),
        (r, _) => r,
    };

    let mut grads = Vec::with_capacity(batches.len() + lhats.len());
    let mut coded_terms = Vec::with_capacity(lhats.len());
    let mut coded_iter = rates.coded.iter();
    for (i, batch) in batches.iter().enumerate() {
        let k = plan.offload_points[i];
        let (head, tail) = batch.split_at(k);
        if let Some(a) = alpha_u {
            grads.push(WeightedGradient { grad: partial_gradient(&tail, &model.beta)?, weight: a, source: GradientSource::Uncoded });
        }
        if k > 0 {
            let alpha_c = *coded_iter.next().expect("one rate per coded block");
            let g = sample_compression_matrix(k, plan.coded_rows[i], coding_rng)?;
            let coded = compress(&head, &g)?;
            grads.push(WeightedGradient { grad: coded_gradient(&coded, &model.beta)?, weight: alpha_c, source: GradientSource::Coded });
            coded_terms.push((alpha_c, k as f64));
        }
    }
    let mut next = aggregate_update(model, &grads)?;
    next.sim_time += plan.deadline;

    let per_point = ((d + 1) as u64 * ctx.cost.b_f as u64) / 8;
    let (mut bytes_coded, mut bytes_plain) = (0, 0);
    for a in &plan.assignments {
        let hops = a.hops() as u64;
        bytes_coded += a.coded_rows as u64 * per_point * hops;
        bytes_plain += plan.offload_points[a.offloader] as u64 * per_point * hops;
    }
    Ok(IterationOutcome {
        model: next,
        duration: plan.deadline,
        bytes_coded,
        bytes_plain,
        num_offloaders: plan.num_offloaders(),
        fallback: false,
        alpha_m: aggregate_learning_rate(&coded_terms, alpha_u.unwrap_or(0.0), l0),
        plan: Some(plan),
    })
}

/// Aggregate statistics of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub mode: RunMode,
    pub seed: u64,
    pub iterations: usize,
    pub total_time: f64,
    pub time_to_error: Option<f64>,
    pub time_to_r2: Option<f64>,
    pub comm_efficiency: f64,
    pub fallback_iterations: usize,
    pub mean_offloaders: f64,
    pub mean_duration: f64,
    /// Iterations whose D2D-CFL duration exceeded baseline plus delivery.
    pub dominance_violations: usize,
    pub final_error: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<MetricsRecord>,
    pub summary: RunSummary,
}

/// When a run may stop before its configured horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    Horizon,
    /// Stop once the error target is met.
    ErrorTarget,
    /// Stop once the windowed R^2 target is met.
    R2Target,
}

/// A single-mode simulation.
pub struct Simulation {
    pub mode: RunMode,
    cfg: ExperimentConfig,
    ctx: RunContext,
    users: Vec<UserState>,
    graph: Graph,
    source: DataSource,
    coding_rng: ChaCha8Rng,
    mobility: Option<(MobilityConfig, ChaCha8Rng)>,
    model: ModelState,
    current: Option<Vec<DataBatch>>,
    baseline_duration: f64,
    horizon: usize,
    dominance_violations: usize,
}

impl Simulation {
    pub fn new(cfg: &ExperimentConfig, mode: RunMode, dataset: Option<Arc<Dataset>>) -> Result<Self> {
        cfg.validate()?;
        let seed = cfg.seed;
        let d = cfg.model_dim();
        let rates = heterogeneity_profile(cfg.users, cfg.a_min, cfg.rho)?;
        let mut users = fleet(&rates, cfg.points_per_user);
        for (u, p) in users.iter_mut().zip(place_users(cfg.users, cfg.mobility.area, &mut substream(seed, Stream::Placement))) {
            u.position = p;
        }
        let r_d = if cfg.instant_d2d { f64::INFINITY } else { d2d_rate(&cfg.link, cfg.link.r_d_m, d)?.macs_per_s };
        let mut cost = CostModel::new(d, r_d, cfg.link.b_f)?;
        if cfg.per_link_rate && !cfg.instant_d2d {
            cost.per_link = Some(cfg.link);
        }

        let source = if cfg.is_realistic_data() {
            let data = match dataset {
                Some(d) => d,
                None => resolve_dataset(cfg)?.ok_or_else(|| Error::Dataset("no dataset".into()))?,
            };
            let map = sample_rffm(&cfg.kernel, &mut substream(seed, Stream::Rffm))?;
            DataSource::Stream { cursor: data.warmup, data, map }
        } else {
            let truth = GroundTruth::random(d, cfg.omega_r, &mut substream(seed, Stream::Truth));
            DataSource::Synthetic { truth, sigma: cfg.sigma, rng: Box::new(substream(seed, Stream::Data)) }
        };
        let rule = match cfg.lipschitz_kind() {
            LipschitzKind::MpEdge => LipschitzRule::MpEdge,
            LipschitzKind::Empirical => match &source {
                DataSource::Stream { data, map, .. } => {
                    let rows = MOMENT_ROWS.min(data.warmup);
                    LipschitzRule::empirical_from(&map.map_rows(&data.x.rows(0, rows).into_owned())?)?
                }
                DataSource::Synthetic { .. } => LipschitzRule::Empirical { lambda_max: 1.0, trace: d as f64 },
            },
        };
        let ctx = RunContext {
            cost,
            rule,
            coded_divider: cfg.coded_divider(),
            learning_rate: cfg.learning_rate,
            policy: cfg.omega_policy,
            penalty: cfg.penalty,
        };

        let baseline_duration = users.iter().map(|u| t_gradient(u.batch_size, u.compute_rate)).fold(0.0, f64::max);
        let mobility = if cfg.mobility.enabled {
            let m = MobilityConfig {
                area: cfg.mobility.area,
                v_max: cfg.mobility.v_max,
                frame_duration: cfg.mobility.frame_duration,
                iteration_duration: baseline_duration,
            };
            m.validate()?;
            Some((m, substream(seed, Stream::Mobility)))
        } else {
            None
        };
        let horizon = if cfg.mobility.enabled {
            (cfg.mobility.frames as f64 * cfg.mobility.frame_duration / baseline_duration).round() as usize
        } else {
            cfg.iterations
        };
        let graph = match cfg.topology {
            Topology::Complete => Graph::complete(users.len()),
            Topology::Proximity => d2d_graph(&users.iter().map(|u| u.position).collect::<Vec<_>>(), cfg.link.r_d_m),
        };

        let mut sim = Self {
            mode,
            cfg: cfg.clone(),
            ctx,
            users,
            graph,
            source,
            coding_rng: substream(seed, Stream::Coding),
            mobility,
            model: ModelState::zeros(d),
            current: None,
            baseline_duration,
            horizon,
            dominance_violations: 0,
        };
        sim.current = sim.source.next_batches(&sim.users, 0.0)?;
        Ok(sim)
    }

    pub fn users(&self) -> &[UserState] {
        &self.users
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn model(&self) -> &ModelState {
        &self.model
    }

    pub fn context(&self) -> &RunContext {
        &self.ctx
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn baseline_duration(&self) -> f64 {
        self.baseline_duration
    }

    /// Batches the next iteration will train on.
    pub fn current_batches(&self) -> Option<&[DataBatch]> {
        self.current.as_deref()
    }

    pub fn truth(&self) -> Option<&GroundTruth> {
        self.source.truth()
    }

    fn frame_start(&self, k: u64, mcfg: &MobilityConfig) -> bool {
        let frame = |i: u64| (i as f64 * mcfg.iteration_duration / mcfg.frame_duration + 1e-9).floor();
        k == 0 || frame(k) != frame(k - 1)
    }

    fn advance_mobility(&mut self) {
        let k = self.model.iteration;
        let Some((mcfg, _)) = &self.mobility else { return };
        let mcfg = *mcfg;
        let boundary = self.frame_start(k, &mcfg);
        let (_, rng) = self.mobility.as_mut().expect("mobility enabled");
        step_mobility(&mut self.users, &mcfg, rng, boundary);
        if self.cfg.topology == Topology::Proximity {
            let pos: Vec<_> = self.users.iter().map(|u| u.position).collect();
            self.graph = d2d_graph(&pos, self.cfg.link.r_d_m);
        }
    }

    /// Run one iteration; `None` once the data stream is exhausted.
    pub fn step(&mut self) -> Result<Option<(MetricsRecord, IterationOutcome)>> {
        self.advance_mobility();
        let Some(batches) = self.current.take() else { return Ok(None) };
        let out = match self.mode {
            RunMode::Baseline => run_iteration_baseline(&self.ctx, &self.users, &self.model, &batches)?,
            RunMode::D2dCfl => run_iteration_d2dcfl(&self.ctx, &self.users, &self.model, &batches, &self.graph, &mut self.coding_rng)?,
        };
        if let Some(plan) = &out.plan {
            if plan.feasible && out.duration > self.baseline_duration + plan.delivery_delay + 1e-12 {
                self.dominance_violations += 1;
            }
            self.set_roles(plan);
        }
        self.model = out.model.clone();
        self.current = self.source.next_batches(&self.users, self.model.sim_time)?;

        let r2 = match &self.current {
            Some(next) => Some(r_squared(&self.model.beta, &DataBatch::concat(next)?)),
            None => None,
        };
        let err = self.source.truth().map(|t| normalized_error(&self.model.beta, &dynamic_model(t, self.model.sim_time)));
        let record = MetricsRecord {
            mode: self.mode.name(),
            seed: self.cfg.seed,
            iteration: self.model.iteration,
            time_s: self.model.sim_time,
            normalized_error: err,
            r_squared: r2,
            iter_duration_s: out.duration,
            bytes_d2d_coded: out.bytes_coded,
            bytes_d2d_uncoded_counterfactual: out.bytes_plain,
            num_offloaders: out.num_offloaders,
            fallback: out.fallback,
            predicted_error: self.prediction(&out),
        };
        Ok(Some((record, out)))
    }

    fn set_roles(&mut self, plan: &AllocationPlan) {
        for u in self.users.iter_mut() {
            u.roles = Roles::default();
        }
        if !plan.feasible {
            return;
        }
        for a in &plan.assignments {
            self.users[a.offloader].roles.offloader = true;
            self.users[a.helper].roles.helper = true;
            for &r in &a.path[1..a.path.len() - 1] {
                self.users[r].roles.relay = true;
            }
        }
    }

    fn prediction(&self, out: &IterationOutcome) -> Option<f64> {
        let truth = self.source.truth()?;
        if truth.is_dynamic() {
            return None;
        }
        let m = self.cfg.total_points();
        let d = self.ctx.cost.d;
        match (&out.plan, self.mode) {
            (Some(plan), RunMode::D2dCfl) if !out.fallback => {
                let w = &self.users[plan.weakest];
                let p = ConvergencePrediction::d2dcfl(out.alpha_m, m, d, plan.omega_w, w.compute_rate, w.batch_size, m);
                p.is_convergent().then(|| p.error_at(self.model.sim_time))
            }
            _ => {
                let p = ConvergencePrediction::uncoded(out.alpha_m / m as f64, m, d);
                p.is_convergent().then(|| p.error_at(self.model.iteration as f64))
            }
        }
    }

    pub fn run(self) -> Result<RunOutput> {
        self.run_until(StopRule::Horizon)
    }

    pub fn run_until(mut self, stop: StopRule) -> Result<RunOutput> {
        let mut records = Vec::with_capacity(self.horizon);
        let mut r2_window = Vec::new();
        for _ in 0..self.horizon {
            let Some((rec, _)) = self.step()? else { break };
            let done = match stop {
                StopRule::Horizon => false,
                StopRule::ErrorTarget => rec.normalized_error.is_some_and(|e| e <= self.cfg.target_error),
                StopRule::R2Target => {
                    r2_window.push(rec.r_squared.unwrap_or(f64::NAN));
                    let w = self.cfg.r2_window;
                    r2_window.len() >= w && r2_window[r2_window.len() - w..].iter().sum::<f64>() / w as f64 >= self.cfg.target_r2
                }
            };
            records.push(rec);
            if done {
                break;
            }
        }
        let summary = self.summarize(&records);
        Ok(RunOutput { records, summary })
    }

    fn summarize(&self, records: &[MetricsRecord]) -> RunSummary {
        let n = records.len().max(1) as f64;
        RunSummary {
            mode: self.mode,
            seed: self.cfg.seed,
            iterations: records.len(),
            total_time: records.last().map_or(0.0, |r| r.time_s),
            time_to_error: time_to_error(records, self.cfg.target_error),
            time_to_r2: time_to_r2(records, self.cfg.target_r2, self.cfg.r2_window),
            comm_efficiency: comm_efficiency(records),
            fallback_iterations: records.iter().filter(|r| r.fallback).count(),
            mean_offloaders: records.iter().map(|r| r.num_offloaders as f64).sum::<f64>() / n,
            mean_duration: records.iter().map(|r| r.iter_duration_s).sum::<f64>() / n,
            dominance_violations: self.dominance_violations,
            final_error: records.last().and_then(|r| r.normalized_error),
        }
    }
}

/// Run the modes the config selects, sharing one dataset.
pub fn run_experiment_with(cfg: &ExperimentConfig, dataset: Option<Arc<Dataset>>, stop: StopRule) -> Result<Vec<RunOutput>> {
    let modes: &[RunMode] = match cfg.mode {
        super::config::Mode::Baseline => &[RunMode::Baseline],
        super::config::Mode::D2dcfl => &[RunMode::D2dCfl],
        super::config::Mode::Both => &[RunMode::Baseline, RunMode::D2dCfl],
    };
    let dataset = match dataset {
        Some(d) => Some(d),
        None => resolve_dataset(cfg)?,
    };
    modes.iter().map(|&m| Simulation::new(cfg, m, dataset.clone())?.run_until(stop)).collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunOutput>> {
    run_experiment_with(cfg, None, StopRule::Horizon)
}

/// Current ground-truth vector of a synthetic run.
pub fn beta_star_at(sim: &Simulation) -> Option<DVector<f64>> {
    sim.truth().map(|t| dynamic_model(t, sim.model().sim_time))
}
