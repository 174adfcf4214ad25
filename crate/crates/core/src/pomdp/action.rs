//! Decoding raw policy outputs in [-1, 1]^d into feasible decisions.
//!
//! The decode is a deterministic feasibility projection: any raw vector maps
//! to decisions that satisfy the association, bandwidth, compute-capacity,
//! acceleration, and time-partition constraints by construction.

use crate::config::SimConfig;
use crate::env::{UavDecision, UserDecision};
use crate::geom::Vec3;

/// Margin keeping the time-partition variables inside the open unit interval.
pub const XI_MARGIN: f64 = 1e-3;

/// Raw action length for a user agent: ξ₁, ξ₂, and one association score per
/// UAV.
pub fn user_action_dim(cfg: &SimConfig) -> usize {
    2 + cfg.num_uavs
}

/// Raw action length for a UAV agent: acceleration plus bandwidth and
/// frequency scores per user.
pub fn uav_action_dim(cfg: &SimConfig) -> usize {
    3 + 2 * cfg.num_users
}

/// Raw action length of agent `i` under the users-then-UAVs indexing.
pub fn action_dim_for_agent(cfg: &SimConfig, agent: usize) -> usize {
    if agent < cfg.num_users {
        user_action_dim(cfg)
    } else {
        uav_action_dim(cfg)
    }
}

/// Decodes one user's raw vector into time partitions and an association.
///
/// ξᵢ maps affinely from [-1, 1] into [XI_MARGIN, 1 - XI_MARGIN]. The user
/// schedules onto the highest-scoring UAV when that score is positive (ties
/// break toward the lowest index) and stays unscheduled otherwise, so at most
/// one association ever holds.
pub fn decode_user_action(raw: &[f64], cfg: &SimConfig) -> UserDecision {
    assert_eq!(raw.len(), user_action_dim(cfg), "user raw action length");
    let xi = |r: f64| (0.5 * (r + 1.0)).clamp(XI_MARGIN, 1.0 - XI_MARGIN);
    let scores = &raw[2..];
    let mut best = 0usize;
    for (u, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = u;
        }
    }
    let assoc = if scores[best] > 0.0 { Some(best) } else { None };
    UserDecision { xi1: xi(raw[0]), xi2: xi(raw[1]), assoc, f_local: 0.0 }
}

/// Splits `total` across the flagged indices proportionally to
/// `exp(score)`. The last flagged index receives the exact remainder so the
/// grants sum to `total` without floating-point overshoot.
fn allocate(total: f64, scores: &[f64], flagged: &[bool]) -> Vec<f64> {
    let n = scores.len();
    let mut out = vec![0.0; n];
    let members: Vec<usize> = (0..n).filter(|&k| flagged[k]).collect();
    if members.is_empty() {
        return out;
    }
    let weights: Vec<f64> = members.iter().map(|&k| scores[k].exp()).collect();
    let sum: f64 = weights.iter().sum();
    let mut granted = 0.0;
    for (i, &k) in members.iter().enumerate() {
        if i + 1 == members.len() {
            out[k] = (total - granted).max(0.0);
        } else {
            out[k] = total * weights[i] / sum;
            granted += out[k];
        }
    }
    out
}

/// Decodes one UAV's raw vector given the association column computed from
/// the user decodes (users decode first within a slot).
///
/// The acceleration is norm-projected onto the limit; bandwidth and compute
/// grants are softmax shares over associated users that exhaust the budget
/// exactly, and unassociated users receive nothing.
pub fn decode_uav_action(raw: &[f64], associated: &[bool], cfg: &SimConfig) -> UavDecision {
    assert_eq!(raw.len(), uav_action_dim(cfg), "uav raw action length");
    assert_eq!(associated.len(), cfg.num_users);
    let nk = cfg.num_users;
    let a = Vec3::new(raw[0], raw[1], raw[2]);
    let accel = a.scale(cfg.a_max / a.norm().max(1.0));
    let bandwidth = allocate(cfg.bandwidth, &raw[3..3 + nk], associated);
    let freq: Vec<f64> = allocate(cfg.f_uav_max, &raw[3 + nk..3 + 2 * nk], associated)
        .into_iter()
        .map(|f| f.min(cfg.f_uav_max))
        .collect();
    UavDecision { accel, bandwidth, freq }
}
