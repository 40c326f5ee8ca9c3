//! Simulator and numerical library for D2D-aided coded federated learning.
//!
//! Heterogeneous mobile users fit an online least-squares model through a
//! server that aggregates their gradients. Slow users compress part of
//! their data with a Gaussian matrix and ship it over device-to-device
//! links to faster neighbors, so every iteration finishes sooner.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod coding;
pub mod convergence;
pub mod data;
pub mod error;
pub mod experiment;
pub mod learning;
pub mod network;
pub mod rng;

pub use error::{Error, Result};
