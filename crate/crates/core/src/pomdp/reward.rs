//! Penalty-shaped per-agent rewards.
//!
//! Each reward is a goal term (processed megabits) plus non-positive
//! penalties, one per constraint family the agent can violate. The penalty
//! function is zero inside the feasible interval and linear in the violation
//! distance outside, so a penalty is zero exactly when the matching
//! constraint slack is non-negative.

use thiserror::Error;

use crate::config::SimConfig;
use crate::env::{JointAction, WorldState};

/// Bits per megabit; goal and data-penalty terms are scaled to megabits so a
/// typical violation outweighs a typical per-slot goal.
pub const MEGABIT: f64 = 1e6;
/// Meters of boundary overrun per unit of range penalty.
pub const RANGE_NORMALIZER: f64 = 100.0;

#[derive(Debug, Error)]
#[error("penalty interval is empty: a = {a} > b = {b}")]
pub struct InvalidInterval {
    pub a: f64,
    pub b: f64,
}

/// Penalty function `F(x, a, b) = -|x - clip(x, a, b)|`: zero inside
/// `[a, b]`, minus the distance to the interval outside.
pub fn penalty_f(x: f64, a: f64, b: f64) -> Result<f64, InvalidInterval> {
    if a > b {
        return Err(InvalidInterval { a, b });
    }
    Ok(-(x - x.clamp(a, b)).abs())
}

/// `penalty_f` for call sites whose interval is valid by construction.
fn pen(x: f64, a: f64, b: f64) -> f64 {
    penalty_f(x, a, b).expect("interval valid by construction")
}

/// One agent's shaped reward, split into its goal and penalty terms.
///
/// Users carry the energy, sensed-capacity, and link penalties; UAVs carry
/// the energy, link, range, and proximity penalties. Unused terms stay zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct RewardBreakdown {
    /// Processed megabits credited to this agent.
    pub goal: f64,
    /// Energy-budget penalty (weighted), ≤ 0.
    pub p_energy: f64,
    /// Penalty for local + offloaded bits exceeding the sensed bits, ≤ 0.
    pub p_sense: f64,
    /// Penalty for computing more than was transmitted, ≤ 0.
    pub p_link: f64,
    /// Penalty for leaving the service area (raw position), ≤ 0.
    pub p_range: f64,
    /// Penalty for violating the UAV separation distance, ≤ 0.
    pub p_proximity: f64,
}

impl RewardBreakdown {
    pub fn total(&self) -> f64 {
        self.goal + self.penalty_sum()
    }

    pub fn penalty_sum(&self) -> f64 {
        self.p_energy + self.p_sense + self.p_link + self.p_range + self.p_proximity
    }
}

/// Everything `compute_rewards` needs about the evaluated slot.
pub struct RewardInputs<'a> {
    pub action: &'a JointAction,
    pub d_sensed: &'a [f64],
    /// Offloaded bits per (user, uav).
    pub d_offloaded: &'a [Vec<f64>],
    pub d_local: &'a [f64],
    /// UAV-computed bits per (user, uav).
    pub d_computed: &'a [Vec<f64>],
    pub e_user: &'a [f64],
    pub e_uav: &'a [f64],
}

/// Computes the shaped reward of every agent (users first, then UAVs).
pub fn compute_rewards(
    world: &WorldState,
    inputs: &RewardInputs,
    cfg: &SimConfig,
) -> Vec<RewardBreakdown> {
    let nk = cfg.num_users;
    let nu = cfg.num_uavs;
    let act = inputs.action;
    let mut rewards = Vec::with_capacity(nk + nu);

    for k in 0..nk {
        let offload: f64 = (0..nu).map(|u| act.beta(k, u) * inputs.d_offloaded[k][u]).sum();
        let computed_any: f64 = (0..nu).map(|u| inputs.d_computed[k][u]).sum();
        let computed_assoc: f64 =
            (0..nu).map(|u| act.beta(k, u) * inputs.d_computed[k][u]).sum();
        // Data penalties evaluate in bits and scale afterwards, so the
        // zero/non-zero decision compares exactly the quantities the
        // constraint slacks compare.
        rewards.push(RewardBreakdown {
            goal: (inputs.d_local[k] + computed_assoc) / MEGABIT,
            p_energy: cfg.mu_user_energy * pen(inputs.e_user[k], 0.0, cfg.e_user_max),
            p_sense: cfg.mu_user_sense
                * pen(inputs.d_local[k] + offload, 0.0, inputs.d_sensed[k])
                / MEGABIT,
            p_link: cfg.mu_user_link * pen(computed_any, 0.0, offload) / MEGABIT,
            p_range: 0.0,
            p_proximity: 0.0,
        });
    }

    for u in 0..nu {
        let goal: f64 = (0..nk)
            .map(|k| act.beta(k, u) * (inputs.d_local[k] + inputs.d_computed[k][u]))
            .sum::<f64>()
            / MEGABIT;
        let p_link: f64 = (0..nk)
            .map(|k| pen(inputs.d_computed[k][u], 0.0, inputs.d_offloaded[k][u]))
            .sum::<f64>()
            * cfg.mu_uav_link
            / MEGABIT;
        let raw = world.uavs[u].raw_pos;
        let p_range = cfg.mu_uav_range
            * (pen(raw.x, 0.0, cfg.area_x_max) + pen(raw.y, 0.0, cfg.area_y_max))
            / RANGE_NORMALIZER;
        let p_proximity: f64 = (0..nu)
            .filter(|&v| v != u)
            .map(|v| pen(world.uavs[u].pos.distance(world.uavs[v].pos), cfg.d_min, f64::INFINITY))
            .sum::<f64>()
            * cfg.mu_uav_proximity;
        rewards.push(RewardBreakdown {
            goal,
            p_energy: cfg.mu_uav_energy * pen(inputs.e_uav[u], 0.0, cfg.e_uav_max),
            p_sense: 0.0,
            p_link,
            p_range,
            p_proximity,
        });
    }

    rewards
}
