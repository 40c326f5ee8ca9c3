use super::plan::{assign_helpers, weakest_user, AllocationPlan, Infeasibility};
use super::{t_compress, t_gradient, CostModel};
use crate::coding::coded_rows;
use crate::error::{invalid, Error, Result};
use crate::network::{Graph, UserState};

fn user_time(l: usize, lhat: usize, a: f64, gamma: f64, model: &CostModel) -> f64 {
    let hop = if lhat > 0 { model.hop_time(coded_rows(gamma, lhat), 0.0) } else { 0.0 };
    t_gradient(l - lhat, a) + t_compress(lhat, gamma, model.d, a) + hop
}

/// Plan where every offloader uses the same compression rate `gamma`.
///
/// The weakest user offloads the count that minimizes its own time, which
/// sets the target; every other user offloads the fewest points that
/// meet it.
pub fn equal_rate_plan(users: &[UserState], graph: &Graph, gamma: f64, model: &CostModel) -> Result<AllocationPlan> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return invalid(format!("compression rate must lie in (0, 1], got {gamma}"));
    }
    if graph.len() != users.len() {
        return invalid(format!("graph has {} nodes for {} users", graph.len(), users.len()));
    }
    let w = weakest_user(users).ok_or_else(|| Error::InvalidParameter("empty fleet".into()))?;
    let uw = &users[w];
    let lhat_w = (0..=uw.batch_size)
        .min_by(|&x, &y| {
            user_time(uw.batch_size, x, uw.compute_rate, gamma, model)
                .total_cmp(&user_time(uw.batch_size, y, uw.compute_rate, gamma, model))
                .then(x.cmp(&y))
        })
        .unwrap_or(0);
    let target = user_time(uw.batch_size, lhat_w, uw.compute_rate, gamma, model);

    let mut infeasibility = Vec::new();
    let mut offload_points = vec![0; users.len()];
    for (i, u) in users.iter().enumerate() {
        if i == w {
            offload_points[i] = lhat_w;
            continue;
        }
        match (0..=u.batch_size).find(|&k| user_time(u.batch_size, k, u.compute_rate, gamma, model) <= target * (1.0 + 1e-12)) {
            Some(k) => offload_points[i] = k,
            None => infeasibility.push(Infeasibility::ShareExceedsOne(i)),
        }
    }
    let shares: Vec<f64> = users
        .iter()
        .zip(&offload_points)
        .map(|(u, &k)| if u.batch_size == 0 { 0.0 } else { k as f64 / u.batch_size as f64 })
        .collect();
    let rows: Vec<usize> = offload_points.iter().map(|&k| if k > 0 { coded_rows(gamma, k) } else { 0 }).collect();
    let gammas: Vec<f64> = offload_points.iter().map(|&k| if k > 0 { gamma } else { 0.0 }).collect();
    let capacities: Vec<f64> = users
        .iter()
        .zip(&offload_points)
        .map(|(u, &k)| if k > 0 { 0.0 } else { (u.compute_rate / 2.0 * (target - t_gradient(u.batch_size, u.compute_rate))).max(0.0) })
        .collect();
    let compute_deadline = users
        .iter()
        .zip(&offload_points)
        .map(|(u, &k)| t_gradient(u.batch_size - k, u.compute_rate) + t_compress(k, gamma, model.d, u.compute_rate))
        .fold(0.0, f64::max);
    let mut plan = AllocationPlan {
        deadline: target,
        compute_deadline,
        weakest: w,
        omega_w: shares[w],
        shares,
        offload_points,
        coded_rows: rows,
        gammas,
        capacities,
        assignments: Vec::new(),
        delivery_delay: 0.0,
        feasible: true,
        infeasibility,
    };
    let (assignments, delay, unassigned) = assign_helpers(users, &plan, graph, model);
    plan.infeasibility.extend(unassigned.into_iter().map(Infeasibility::NoHelper));
    plan.assignments = assignments;
    plan.delivery_delay = delay;
    plan.deadline = plan.realized_makespan(users, model);
    let demand: f64 = plan.coded_rows.iter().sum::<usize>() as f64;
    plan.feasible = plan.infeasibility.is_empty() && plan.capacities.iter().sum::<f64>() >= demand;
    Ok(plan)
}
