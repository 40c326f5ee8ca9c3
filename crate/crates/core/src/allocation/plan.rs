use super::{gradient_capacity, offload_share, processing_time, t_compress, t_gradient, CostModel};
use crate::error::{invalid, Result};
use crate::learning::UserId;
use crate::network::{Graph, UserState};

/// One offloader's coded block routed to a helper.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub offloader: UserId,
    pub helper: UserId,
    /// Nodes from offloader to helper, both inclusive.
    pub path: Vec<UserId>,
    pub coded_rows: usize,
    /// Total relay time along the path.
    pub delay: f64,
}

impl Assignment {
    pub fn hops(&self) -> usize {
        self.path.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Infeasibility {
    /// A user would need to offload more than all its points.
    ShareExceedsOne(UserId),
    /// No reachable helper had room for this offloader's block.
    NoHelper(UserId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AllocationPlan {
    /// Deadline `T*` in seconds.
    pub deadline: f64,
    /// Compute part of the deadline, `(1 + D omega_W) T_gd(W)`.
    pub compute_deadline: f64,
    pub weakest: UserId,
    pub omega_w: f64,
    pub shares: Vec<f64>,
    /// Points each user compresses and offloads.
    pub offload_points: Vec<usize>,
    /// Coded rows each offloader sends.
    pub coded_rows: Vec<usize>,
    pub gammas: Vec<f64>,
    pub capacities: Vec<f64>,
    pub assignments: Vec<Assignment>,
    pub delivery_delay: f64,
    pub feasible: bool,
    pub infeasibility: Vec<Infeasibility>,
}

impl AllocationPlan {
    pub fn offloaders(&self) -> impl Iterator<Item = UserId> + '_ {
        self.offload_points.iter().enumerate().filter(|(_, &p)| p > 0).map(|(i, _)| i)
    }

    pub fn num_offloaders(&self) -> usize {
        self.offloaders().count()
    }

    /// Coded rows received by each user.
    pub fn accepted_rows(&self) -> Vec<usize> {
        let mut acc = vec![0; self.shares.len()];
        for a in &self.assignments {
            acc[a.helper] += a.coded_rows;
        }
        acc
    }

    /// Finish time of every user under the plan: local work, compression
    /// and routing for offloaders; local work plus received blocks for
    /// helpers.
    pub fn finish_times(&self, users: &[UserState], model: &CostModel) -> Vec<f64> {
        let accepted = self.accepted_rows();
        users
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let lhat = self.offload_points[i];
                let local = t_gradient(u.batch_size - lhat, u.compute_rate)
                    + t_compress(lhat, self.gammas[i], model.d, u.compute_rate)
                    + t_gradient(accepted[i], u.compute_rate);
                let route = self.assignments.iter().find(|a| a.offloader == i).map_or(0.0, |a| a.delay);
                local + route
            })
            .collect()
    }

    pub fn realized_makespan(&self, users: &[UserState], model: &CostModel) -> f64 {
        self.finish_times(users, model).into_iter().fold(0.0, f64::max)
    }
}

/// User with the largest local gradient time; lowest id on ties.
pub fn weakest_user(users: &[UserState]) -> Option<UserId> {
    let mut best: Option<(UserId, f64)> = None;
    for (i, u) in users.iter().enumerate() {
        let t = t_gradient(u.batch_size, u.compute_rate);
        if best.is_none_or(|(_, bt)| t > bt) {
            best = Some((i, t));
        }
    }
    best.map(|(i, _)| i)
}

pub(crate) struct ShareProfile {
    pub weakest: UserId,
    pub compute_deadline: f64,
    pub shares: Vec<f64>,
    pub capacities: Vec<f64>,
    pub over_one: Vec<UserId>,
}

/// Shares and capacities at the one-hop deadline `T_c + T_cm(1)`.
pub(crate) fn share_profile(users: &[UserState], omega_w: f64, model: &CostModel) -> Result<ShareProfile> {
    let weakest = weakest_user(users).ok_or_else(|| crate::error::Error::InvalidParameter("empty fleet".into()))?;
    if !(0.0..=1.0).contains(&omega_w) {
        return invalid(format!("omega_W must lie in [0, 1], got {omega_w}"));
    }
    let w = &users[weakest];
    let compute_deadline = (1.0 + model.big_d() * omega_w) * t_gradient(w.batch_size, w.compute_rate);
    let t1 = compute_deadline + model.t_cm1();
    let mut shares = Vec::with_capacity(users.len());
    let mut over_one = Vec::new();
    for (i, u) in users.iter().enumerate() {
        if i == weakest {
            shares.push(omega_w);
            continue;
        }
        let s = offload_share(t1, u.batch_size, u.compute_rate, model);
        if !s.meets_deadline {
            over_one.push(i);
        }
        shares.push(s.omega);
    }
    let capacities = users
        .iter()
        .zip(&shares)
        .map(|(u, &om)| gradient_capacity(t1, u.batch_size, u.compute_rate, om, model))
        .collect();
    Ok(ShareProfile { weakest, compute_deadline, shares, capacities, over_one })
}

/// Points offloaded for a share: `ceil(omega l)`, at least one when the
/// share is positive.
pub(crate) fn points_for_share(omega: f64, l: usize) -> usize {
    if omega <= 0.0 || l == 0 {
        0
    } else {
        ((omega * l as f64 - 1e-9).ceil() as usize).clamp(1, l)
    }
}

/// Plan for a given weakest-user share `omega_w`.
pub fn achievable_deadline(users: &[UserState], graph: &Graph, omega_w: f64, model: &CostModel) -> Result<AllocationPlan> {
    if graph.len() != users.len() {
        return invalid(format!("graph has {} nodes for {} users", graph.len(), users.len()));
    }
    let p = share_profile(users, omega_w, model)?;
    let offload_points: Vec<usize> = users.iter().zip(&p.shares).map(|(u, &om)| points_for_share(om, u.batch_size)).collect();
    let coded_rows: Vec<usize> = offload_points.iter().map(|&k| usize::from(k > 0)).collect();
    let gammas: Vec<f64> = offload_points.iter().map(|&k| if k > 0 { 1.0 / k as f64 } else { 0.0 }).collect();
    let mut plan = AllocationPlan {
        deadline: p.compute_deadline,
        compute_deadline: p.compute_deadline,
        weakest: p.weakest,
        omega_w,
        shares: p.shares,
        offload_points,
        coded_rows,
        gammas,
        capacities: p.capacities,
        assignments: Vec::new(),
        delivery_delay: 0.0,
        feasible: true,
        infeasibility: p.over_one.into_iter().map(Infeasibility::ShareExceedsOne).collect(),
    };
    let (assignments, delay, unassigned) = assign_helpers(users, &plan, graph, model);
    plan.infeasibility.extend(unassigned.into_iter().map(Infeasibility::NoHelper));
    plan.assignments = assignments;
    plan.delivery_delay = delay;
    plan.deadline = plan.compute_deadline + delay;
    let demand = plan.num_offloaders() as f64;
    let supply: f64 = plan.capacities.iter().sum();
    plan.feasible = plan.infeasibility.is_empty() && supply >= demand;
    Ok(plan)
}

/// Greedy routing of coded blocks. Offloaders are served in order of
/// decreasing processing time; each goes to the reachable user with the
/// largest residual capacity (fewer hops, then lower id, on ties).
/// Returns the assignments, the delivery delay `T_d` (never below one
/// worst-case hop when anything is sent) and the offloaders left without
/// a helper.
pub fn assign_helpers(users: &[UserState], plan: &AllocationPlan, graph: &Graph, model: &CostModel) -> (Vec<Assignment>, f64, Vec<UserId>) {
    let mut order: Vec<UserId> = plan.offloaders().collect();
    let nu: Vec<f64> = users
        .iter()
        .zip(&plan.shares)
        .map(|(u, &om)| processing_time(u.batch_size, u.compute_rate, om, model))
        .collect();
    order.sort_by(|&a, &b| nu[b].total_cmp(&nu[a]).then(a.cmp(&b)));

    let mut residual = plan.capacities.clone();
    let mut assignments = Vec::new();
    let mut unassigned = Vec::new();
    let mut t_d: f64 = 0.0;
    for o in order {
        let c = plan.coded_rows[o];
        let pred = graph.bfs(o);
        let hops = |mut v: usize| {
            let mut h = 0;
            while v != o {
                v = pred[v].expect("reachable");
                h += 1;
            }
            h
        };
        let mut best: Option<(UserId, f64, usize)> = None;
        for h in 0..users.len() {
            if h == o || pred[h].is_none() || residual[h] < c as f64 {
                continue;
            }
            let cand = (h, residual[h], hops(h));
            best = match best {
                None => Some(cand),
                Some(b) if cand.1 > b.1 || (cand.1 == b.1 && cand.2 < b.2) => Some(cand),
                keep => keep,
            };
        }
        let Some((h, _, _)) = best else {
            unassigned.push(o);
            continue;
        };
        let path = graph.path(o, h).expect("reachable helper has a path");
        let delay: f64 = path
            .windows(2)
            .map(|e| model.hop_time(c, graph.edge_distance(e[0], e[1]).unwrap_or(0.0)))
            .sum();
        residual[h] -= c as f64;
        t_d = t_d.max(delay.max(model.t_cm1()));
        assignments.push(Assignment { offloader: o, helper: h, path, coded_rows: c, delay });
    }
    (assignments, t_d, unassigned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fleet;
    use approx::assert_relative_eq;

    #[test]
    fn two_user_plan() {
        let users = fleet(&[400.0, 2000.0], 10);
        let m = CostModel::new(8, f64::INFINITY, 32).unwrap();
        let p = achievable_deadline(&users, &Graph::complete(2), 1.0, &m).unwrap();
        assert_relative_eq!(p.deadline, 0.028125, epsilon = 1e-15);
        assert_relative_eq!(p.capacities[1], 18.125, epsilon = 1e-9);
        assert!(p.feasible);
        assert_eq!(p.offload_points, vec![10, 0]);
        assert_eq!(p.assignments[0].helper, 1);
    }

    #[test]
    fn homogeneous_fleet_is_baseline() {
        let users = fleet(&[500.0; 4], 10);
        let m = CostModel::new(10, 1e6, 32).unwrap();
        let p = achievable_deadline(&users, &Graph::complete(4), 0.0, &m).unwrap();
        assert_eq!(p.num_offloaders(), 0);
        assert_relative_eq!(p.deadline, t_gradient(10, 500.0));
        assert!(p.feasible);
    }

    #[test]
    fn chain_routes_two_hops() {
        // A (weak) - B (weak, same rate) - C (strong).
        let users = fleet(&[400.0, 400.0, 4000.0], 10);
        let mut g = Graph::empty(3);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 1.0);
        let m = CostModel::new(8, 1e6, 32).unwrap();
        let mut p = achievable_deadline(&users, &g, 1.0, &m).unwrap();
        let a0 = p.assignments.iter().find(|a| a.offloader == 0).unwrap();
        assert_eq!(a0.path, vec![0, 1, 2]);
        assert_relative_eq!(a0.delay, 2.0 * m.t_cm1());
        assert_relative_eq!(p.delivery_delay, 2.0 * m.t_cm1());
        // Isolated offloader has nowhere to go.
        p.capacities = vec![0.0; 3];
        let (_, _, left) = assign_helpers(&users, &p, &Graph::empty(3), &m);
        assert_eq!(left, vec![0, 1]);
    }
}
