use super::plan::share_profile;
use super::CostModel;
use crate::error::Result;
use crate::network::{Graph, UserState};

pub const DEFAULT_PENALTY: f64 = 1e6;

const GRID_STEP: f64 = 1e-3;
const GOLDEN_TOL: f64 = 1e-7;

/// Value of the share objective at one `omega_W`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    pub omega_w: f64,
    /// `sum_i (omega_i - 1) l_i / (1 + D omega_W)`.
    pub base: f64,
    /// Offloaders minus capacity, summed over connected components.
    pub deficit: f64,
    /// `base + B * deficit`.
    pub value: f64,
}

impl Objective {
    fn feasible(&self) -> bool {
        self.deficit <= 0.0
    }

    /// Deficit first, then value; equal values prefer the smaller share.
    fn better_than(&self, other: &Objective) -> bool {
        if self.deficit != other.deficit {
            return self.deficit < other.deficit;
        }
        let tol = 1e-12 * self.value.abs().max(other.value.abs()).max(1.0);
        if (self.value - other.value).abs() <= tol {
            return self.omega_w < other.omega_w;
        }
        self.value < other.value
    }
}

pub fn objective(users: &[UserState], components: &[usize], omega_w: f64, model: &CostModel, penalty: f64) -> Result<Objective> {
    let p = share_profile(users, omega_w, model)?;
    let scale = 1.0 + model.big_d() * omega_w;
    let base = users.iter().zip(&p.shares).map(|(u, &om)| (om - 1.0) * u.batch_size as f64).sum::<f64>() / scale;
    let mut demand = vec![0.0; users.len()];
    let mut supply = vec![0.0; users.len()];
    for i in 0..users.len() {
        if p.shares[i] > 0.0 && users[i].batch_size > 0 {
            demand[components[i]] += 1.0;
        }
        supply[components[i]] += p.capacities[i];
    }
    let deficit: f64 = demand.iter().zip(&supply).map(|(d, s)| (d - s).max(0.0)).sum();
    Ok(Objective { omega_w, base, deficit, value: base + penalty * deficit })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaMethod {
    GoldenSection,
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaChoice {
    pub omega_w: f64,
    pub objective: Objective,
    pub method: OmegaMethod,
}

/// Golden-section search over `[0, 1]`, returning the best probe seen.
pub fn golden_section_omega(users: &[UserState], graph: &Graph, model: &CostModel, penalty: f64) -> Result<Objective> {
    let comps = graph.components();
    let eval = |w: f64| objective(users, &comps, w, model, penalty);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = eval(0.0)?;
    let right = eval(1.0)?;
    if right.better_than(&best) {
        best = right;
    }
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while hi - lo > GOLDEN_TOL {
        for f in [f1, f2] {
            if f.better_than(&best) {
                best = f;
            }
        }
        if f2.better_than(&f1) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1)?;
        }
    }
    for f in [f1, f2] {
        if f.better_than(&best) {
            best = f;
        }
    }
    Ok(best)
}

/// Exhaustive scan at a `1e-3` step.
pub fn grid_search_omega(users: &[UserState], graph: &Graph, model: &CostModel, penalty: f64) -> Result<Objective> {
    let comps = graph.components();
    let steps = (1.0 / GRID_STEP).round() as usize;
    let mut best = objective(users, &comps, 0.0, model, penalty)?;
    for k in 1..=steps {
        let f = objective(users, &comps, k as f64 * GRID_STEP, model, penalty)?;
        if f.better_than(&best) {
            best = f;
        }
    }
    Ok(best)
}

/// Weakest-user share minimizing the objective. Golden-section search is
/// tried first; the grid scan takes over if the search ends on an
/// infeasible point while a feasible one exists.
pub fn optimize_omega_w(users: &[UserState], graph: &Graph, model: &CostModel, penalty: f64) -> Result<OmegaChoice> {
    let golden = golden_section_omega(users, graph, model, penalty)?;
    if golden.feasible() {
        return Ok(OmegaChoice { omega_w: golden.omega_w, objective: golden, method: OmegaMethod::GoldenSection });
    }
    let grid = grid_search_omega(users, graph, model, penalty)?;
    let pick = if grid.better_than(&golden) { grid } else { golden };
    Ok(OmegaChoice { omega_w: pick.omega_w, objective: pick, method: OmegaMethod::Grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fleet;

    #[test]
    fn identical_users_keep_everything_local() {
        let users = fleet(&[700.0; 4], 10);
        let m = CostModel::new(10, 1e6, 32).unwrap();
        let c = optimize_omega_w(&users, &Graph::complete(4), &m, DEFAULT_PENALTY).unwrap();
        assert_eq!(c.omega_w, 0.0);
    }

    #[test]
    fn two_user_case_matches_grid() {
        let users = fleet(&[400.0, 2000.0], 10);
        let m = CostModel::new(8, f64::INFINITY, 32).unwrap();
        let g = Graph::complete(2);
        let c = optimize_omega_w(&users, &g, &m, DEFAULT_PENALTY).unwrap();
        let grid = grid_search_omega(&users, &g, &m, DEFAULT_PENALTY).unwrap();
        assert!((c.omega_w - grid.omega_w).abs() <= 1e-3, "{} vs {}", c.omega_w, grid.omega_w);
    }
}
