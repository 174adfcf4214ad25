//! Desk-scale simulator of a multi-UAV mobile crowdsensing network and a
//! heterogeneous multi-agent PPO trainer built on top of it.
//!
//! The crate is organized around the data flow of one training run:
//!
//! * [`env`] — the physical world: user mobility, UAV kinematics, the
//!   air-to-ground channel, data/energy bookkeeping, and constraint slacks.
//! * [`pomdp`] — the decision process wrapped around the world: per-agent
//!   observations, feasibility-projected action decoding, the closed-form
//!   user CPU frequency, and penalty-shaped rewards.
//! * [`nn`] — a minimal double-precision neural toolkit with analytic
//!   gradients: 1-D convolutions, B-spline KAN layers, MLPs, squashed
//!   Gaussian policy heads, and a finite-difference verification harness.
//! * [`happo`] — the learning algorithm: GAE, the sequential multi-agent
//!   advantage cascade, clipped surrogate losses, and Adam updates.
//! * [`harness`] — experiment orchestration: training, evaluation, sweeps,
//!   checkpoints, and metrics emission.
//! * [`cli`] — the `skysense` command-line entry point.

pub mod cli;
pub mod config;
pub mod env;
pub mod geom;
pub mod happo;
pub mod harness;
pub mod nn;
pub mod pomdp;
pub mod rng;

pub use config::SimConfig;
