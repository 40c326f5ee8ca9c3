//! Build the load-balancing plan for a heterogeneous fleet and show who
//! offloads to whom.
//!
//!     cargo run --example allocation_plan -- 0.2

use d2dcfl::allocation::{achievable_deadline, optimize_omega_w, CostModel, DEFAULT_PENALTY};
use d2dcfl::network::{d2d_rate, fleet, heterogeneity_profile, Graph, LinkParams};

fn main() -> d2dcfl::Result<()> {
    let rho: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let users = fleet(&heterogeneity_profile(10, 400.0, rho)?, 10);
    let d = 10;
    let r_d = d2d_rate(&LinkParams::default(), 4.0, d)?.macs_per_s;
    let model = CostModel::new(d, r_d, 32)?;
    let graph = Graph::complete(users.len());

    let choice = optimize_omega_w(&users, &graph, &model, DEFAULT_PENALTY)?;
    let plan = achievable_deadline(&users, &graph, choice.omega_w, &model)?;
    let baseline = 2.0 * 10.0 / 400.0;
    println!(
        "omega_W={:.4} ({:?}), deadline {:.5}s vs baseline {baseline:.5}s, feasible={}",
        choice.omega_w, choice.method, plan.deadline, plan.feasible
    );
    for (i, u) in users.iter().enumerate() {
        println!(
            "user {i}: a={:>6.1} share={:.3} offload={} capacity={:.2}",
            u.compute_rate, plan.shares[i], plan.offload_points[i], plan.capacities[i]
        );
    }
    for a in &plan.assignments {
        println!("{} -> {} via {:?}: {} coded row(s), {:.2e}s", a.offloader, a.helper, a.path, a.coded_rows, a.delay);
    }
    Ok(())
}
