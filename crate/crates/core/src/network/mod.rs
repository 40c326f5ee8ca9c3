//! Deployment, mobility, heterogeneous compute rates, the D2D graph and
//! the 60 GHz link budget.

mod dcmc;
mod graph;
mod link;

pub use dcmc::{dcmc_capacity_exact, dcmc_capacity_qam64, gauss_hermite, pam_levels, QAM64_BITS};
pub use graph::{d2d_graph, Edge, Graph};
pub use link::{antenna_gain_dbi, d2d_rate, free_space_path_loss_db, receive_power, snr_db, LinkParams, LinkRate, SPEED_OF_LIGHT};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::learning::UserId;

pub type Position = [f64; 2];

/// What a user does in the current iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Roles {
    pub offloader: bool,
    pub helper: bool,
    pub relay: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserState {
    pub id: UserId,
    pub position: Position,
    pub velocity: [f64; 2],
    /// MAC/s.
    pub compute_rate: f64,
    /// Points generated per iteration.
    pub batch_size: usize,
    pub roles: Roles,
}

impl UserState {
    pub fn new(id: UserId, compute_rate: f64, batch_size: usize) -> Self {
        Self { id, position: [0.0, 0.0], velocity: [0.0, 0.0], compute_rate, batch_size, roles: Roles::default() }
    }

    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

/// Build a fleet from per-user rates and a common batch size.
pub fn fleet(rates: &[f64], batch_size: usize) -> Vec<UserState> {
    rates.iter().enumerate().map(|(i, &a)| UserState::new(i, a, batch_size)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobilityConfig {
    /// Width and height of the deployment rectangle in meters.
    pub area: [f64; 2],
    pub v_max: f64,
    pub frame_duration: f64,
    pub iteration_duration: f64,
}

impl MobilityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.area[0] > 0.0 && self.area[1] > 0.0) {
            return invalid("mobility area must be positive");
        }
        if !(self.v_max >= 0.0) {
            return invalid("v_max must be non-negative");
        }
        if !(self.iteration_duration > 0.0) || self.frame_duration < self.iteration_duration {
            return invalid("frame duration must be at least one iteration");
        }
        Ok(())
    }
}

/// Arithmetic sequence of compute rates from `a_min` to `a_min / rho`.
pub fn heterogeneity_profile(n: usize, a_min: f64, rho: f64) -> Result<Vec<f64>> {
    if !(rho > 0.0 && rho <= 1.0) {
        return invalid(format!("heterogeneity factor must lie in (0, 1], got {rho}"));
    }
    if !(a_min > 0.0) {
        return invalid("a_min must be positive");
    }
    let a_max = a_min / rho;
    Ok(match n {
        0 => vec![],
        1 => vec![a_min],
        _ => (0..n).map(|i| a_min + (a_max - a_min) * i as f64 / (n - 1) as f64).collect(),
    })
}

/// I.i.d. uniform positions over `[0, w] x [0, h]`.
pub fn place_users<R: Rng + ?Sized>(n: usize, area: [f64; 2], rng: &mut R) -> Vec<Position> {
    (0..n).map(|_| [rng.random::<f64>() * area[0], rng.random::<f64>() * area[1]]).collect()
}

fn reflect(mut x: f64, mut v: f64, len: f64) -> (f64, f64) {
    loop {
        if x < 0.0 {
            x = -x;
            v = -v;
        } else if x > len {
            x = 2.0 * len - x;
            v = -v;
        } else {
            return (x, v);
        }
    }
}

/// Random Waypoint step. At frame boundaries every user draws a new
/// heading and speed; then positions advance by one iteration.
pub fn step_mobility<R: Rng + ?Sized>(states: &mut [UserState], cfg: &MobilityConfig, rng: &mut R, at_frame_boundary: bool) {
    if at_frame_boundary {
        for s in states.iter_mut() {
            let heading = rng.random::<f64>() * std::f64::consts::TAU;
            let speed = rng.random::<f64>() * cfg.v_max;
            s.velocity = [speed * heading.cos(), speed * heading.sin()];
        }
    }
    let dt = cfg.iteration_duration;
    for s in states.iter_mut() {
        for k in 0..2 {
            let (x, v) = reflect(s.position[k] + s.velocity[k] * dt, s.velocity[k], cfg.area[k]);
            s.position[k] = x;
            s.velocity[k] = v;
        }
    }
}
