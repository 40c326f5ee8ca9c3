//! Time-cost model, offload shares, gradient capacities, helper
//! assignment and the choice of the weakest user's share.

mod equal;
mod omega;
mod plan;

pub use equal::equal_rate_plan;
pub use omega::{golden_section_omega, grid_search_omega, objective, optimize_omega_w, OmegaChoice, OmegaMethod, Objective, DEFAULT_PENALTY};
pub use plan::{achievable_deadline, assign_helpers, weakest_user, AllocationPlan, Assignment, Infeasibility};

use crate::error::{invalid, Result};
use crate::network::{d2d_rate, LinkParams};

/// Compute and link parameters shared by all users.
#[derive(Clone, Debug, PartialEq)]
pub struct CostModel {
    pub d: usize,
    /// Fleet-wide D2D rate in MAC/s; `f64::INFINITY` for instant links.
    pub r_d: f64,
    pub b_f: u32,
    /// When set, each hop is charged at the rate of its own link length.
    pub per_link: Option<LinkParams>,
}

impl CostModel {
    pub fn new(d: usize, r_d: f64, b_f: u32) -> Result<Self> {
        if d < 2 {
            return invalid(format!("feature dimension must be at least 2, got {d}"));
        }
        if !(r_d > 0.0) {
            return invalid(format!("D2D rate must be positive, got {r_d}"));
        }
        if b_f != 32 && b_f != 64 {
            return invalid(format!("b_f must be 32 or 64, got {b_f}"));
        }
        Ok(Self { d, r_d, b_f, per_link: None })
    }

    /// `0.5 (1 + 1/d) - 1`.
    pub fn big_d(&self) -> f64 {
        0.5 * (1.0 + 1.0 / self.d as f64) - 1.0
    }

    /// Time to ship one coded point over one worst-case hop.
    pub fn t_cm1(&self) -> f64 {
        t_transmit(1, self.d, self.r_d)
    }

    /// Transmission time of `c` points over a hop of length `distance`.
    pub fn hop_time(&self, c: usize, distance: f64) -> f64 {
        match &self.per_link {
            Some(link) if distance > 0.0 => match d2d_rate(link, distance, self.d) {
                Ok(rate) => t_transmit(c, self.d, rate.macs_per_s),
                Err(_) => f64::INFINITY,
            },
            _ => t_transmit(c, self.d, self.r_d),
        }
    }
}

/// `2 l / a`.
pub fn t_gradient(l: usize, a: f64) -> f64 {
    2.0 * l as f64 / a
}

/// `(1 + 1/d) gamma l^2 / a`.
pub fn t_compress(l: usize, gamma: f64, d: usize, a: f64) -> f64 {
    (1.0 + 1.0 / d as f64) * gamma * (l * l) as f64 / a
}

/// `(1 + 1/d) l / r_D`; zero for infinite rate.
pub fn t_transmit(l: usize, d: usize, r_d: f64) -> f64 {
    if l == 0 {
        return 0.0;
    }
    (1.0 + 1.0 / d as f64) * l as f64 / r_d
}

/// Share of points a user must offload to finish by `t_star`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Share {
    pub omega: f64,
    /// False when even full offloading misses `t_star`.
    pub meets_deadline: bool,
}

/// `clamp((T* - 2l/a - T_cm(1)) / (2l/a * D), 0, 1)`.
pub fn offload_share(t_star: f64, l: usize, a: f64, model: &CostModel) -> Share {
    let t_gd = t_gradient(l, a);
    if t_gd == 0.0 {
        return Share { omega: 0.0, meets_deadline: true };
    }
    let raw = (t_star - t_gd - model.t_cm1()) / (t_gd * model.big_d());
    if raw <= 1e-12 {
        Share { omega: 0.0, meets_deadline: true }
    } else if raw > 1.0 + 1e-12 {
        Share { omega: 1.0, meets_deadline: false }
    } else {
        Share { omega: raw.min(1.0), meets_deadline: true }
    }
}

/// Processing time `2(1 + D omega) l / a` plus one hop when offloading.
pub fn processing_time(l: usize, a: f64, omega: f64, model: &CostModel) -> f64 {
    let hop = if omega > 0.0 { model.t_cm1() } else { 0.0 };
    (1.0 + model.big_d() * omega) * t_gradient(l, a) + hop
}

/// Coded points a user can absorb by `t_star`: `(a/2)(T* - nu)_+`.
pub fn gradient_capacity(t_star: f64, l: usize, a: f64, omega: f64, model: &CostModel) -> f64 {
    (a / 2.0 * (t_star - processing_time(l, a, omega, model))).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model8() -> CostModel {
        CostModel::new(8, f64::INFINITY, 32).unwrap()
    }

    #[test]
    fn time_costs() {
        assert_eq!(t_gradient(0, 400.0), 0.0);
        assert_relative_eq!(t_gradient(10, 400.0), 0.05);
        assert_relative_eq!(t_gradient(20, 2000.0), 0.02);
        assert_eq!(t_compress(10, 0.0, 8, 400.0), 0.0);
        assert_relative_eq!(t_compress(10, 0.1, 8, 400.0), 0.028125, epsilon = 1e-15);
        assert_relative_eq!(t_transmit(1, 8, 1e6), 1.125e-6, epsilon = 1e-18);
        assert_eq!(t_transmit(5, 8, f64::INFINITY), 0.0);
        assert_eq!(t_transmit(0, 8, 1.0), 0.0);
    }

    #[test]
    fn compress_time_identity() {
        for &(l, omega, d, a) in &[(10usize, 0.3, 8usize, 400.0), (20, 1.0, 10, 1200.0), (7, 0.5, 3, 90.0)] {
            let lhat = omega * l as f64;
            let lhs = (1.0 + 1.0 / d as f64) * (1.0 / lhat) * lhat * lhat / a;
            let rhs = 0.5 * (1.0 + 1.0 / d as f64) * omega * t_gradient(l, a);
            assert_relative_eq!(lhs, rhs, epsilon = 1e-15);
        }
    }

    #[test]
    fn share_examples() {
        let m = model8();
        assert_eq!(m.big_d(), -0.4375);
        assert_relative_eq!(offload_share(0.03, 10, 400.0, &m).omega, 0.914285714, epsilon = 1e-8);
        let full = offload_share(0.028125, 10, 400.0, &m);
        assert_relative_eq!(full.omega, 1.0);
        assert!(full.meets_deadline);
        assert_eq!(offload_share(0.06, 10, 400.0, &m).omega, 0.0);
        assert!(!offload_share(0.02, 10, 400.0, &m).meets_deadline);
        assert!(CostModel::new(1, 1.0, 32).is_err());
    }

    #[test]
    fn capacity_examples() {
        let m = model8();
        assert_relative_eq!(gradient_capacity(0.03, 10, 2000.0, 0.0, &m), 20.0, epsilon = 1e-12);
        assert_eq!(gradient_capacity(0.01, 10, 2000.0, 0.0, &m), 0.0);
    }
}
