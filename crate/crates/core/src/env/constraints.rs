//! Signed constraint slacks for one fully-evaluated slot, the per-slot
//! objective, and the feasibility-capped processed-data metric.
//!
//! Every slack is oriented so that `slack >= 0` means the constraint holds.
//! Reward penalties and the acceptance tests both read these.

use crate::config::SimConfig;

use super::state::{JointAction, WorldState};

/// Everything the constraint evaluation needs about one slot, indexed
/// `[user]` or `[user][uav]`.
pub struct SlotQuantities<'a> {
    pub action: &'a JointAction,
    /// Bits sensed per user.
    pub d_sensed: &'a [f64],
    /// Bits offloaded per (user, uav); zero off the association.
    pub d_offloaded: &'a [Vec<f64>],
    /// Bits computed locally per user.
    pub d_local: &'a [f64],
    /// Bits computed at the UAV per (user, uav); zero off the association.
    pub d_computed: &'a [Vec<f64>],
    /// Total energy per user, J.
    pub e_user: &'a [f64],
    /// Total energy per UAV, J.
    pub e_uav: &'a [f64],
}

/// Signed slacks for every constraint family of the optimization problem.
#[derive(Clone, Debug)]
pub struct ConstraintReport {
    /// Per user: energy budget minus consumption.
    pub user_energy: Vec<f64>,
    /// Per UAV: energy budget minus consumption.
    pub uav_energy: Vec<f64>,
    /// Per user: 1 minus the number of associations.
    pub association: Vec<f64>,
    /// Per UAV: total bandwidth minus the sum of grants.
    pub bandwidth: Vec<f64>,
    /// Per user: distance of the local frequency to the box [0, f_user_max].
    pub user_freq: Vec<f64>,
    /// Per (uav, user): distance of the granted frequency to [0, f_uav_max].
    pub uav_freq: Vec<Vec<f64>>,
    /// Per UAV: compute capacity minus the associated grant sum.
    pub uav_capacity: Vec<f64>,
    /// Per user: sensed bits minus (local + offloaded) bits.
    pub user_data: Vec<f64>,
    /// Per (uav, user): offloaded bits minus UAV-computed bits.
    pub uav_data: Vec<Vec<f64>>,
    /// Per UAV: speed limit minus current speed.
    pub uav_speed: Vec<f64>,
    /// Per UAV: acceleration limit minus commanded magnitude.
    pub uav_accel: Vec<f64>,
    /// Per UAV pair (u, u'): separation minus the safety distance
    /// (`+inf` on the diagonal).
    pub separation: Vec<Vec<f64>>,
    /// Per UAV: smallest horizontal raw-position margin to the area walls.
    pub boundary_horizontal: Vec<f64>,
    /// Per UAV: smallest altitude margin of the projected position.
    pub altitude: Vec<f64>,
    /// Per user: smallest margin of ξ₁, ξ₂ to the open unit interval.
    pub xi_open: Vec<f64>,
}

/// Violation tallies reported by the metrics rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ViolationCounts {
    /// Users plus UAVs over their energy budget.
    pub energy: usize,
    /// UAVs whose raw position left the service area.
    pub boundary: usize,
    /// Unordered UAV pairs closer than the safety distance.
    pub collision: usize,
}

impl ConstraintReport {
    pub fn violations(&self) -> ViolationCounts {
        let energy = self.user_energy.iter().chain(&self.uav_energy).filter(|s| **s < 0.0).count();
        let boundary = self.boundary_horizontal.iter().filter(|s| **s < 0.0).count();
        let mut collision = 0;
        for u in 0..self.separation.len() {
            for v in (u + 1)..self.separation.len() {
                if self.separation[u][v] < 0.0 {
                    collision += 1;
                }
            }
        }
        ViolationCounts { energy, boundary, collision }
    }
}

fn box_slack(x: f64, lo: f64, hi: f64) -> f64 {
    (x - lo).min(hi - x)
}

pub fn evaluate_constraints(
    world: &WorldState,
    q: &SlotQuantities,
    cfg: &SimConfig,
) -> ConstraintReport {
    let nk = world.users.len();
    let nu = world.uavs.len();
    let act = q.action;

    let user_energy = (0..nk).map(|k| cfg.e_user_max - q.e_user[k]).collect();
    let uav_energy = (0..nu).map(|u| cfg.e_uav_max - q.e_uav[u]).collect();
    let association = (0..nk)
        .map(|k| 1.0 - (0..nu).map(|u| act.beta(k, u)).sum::<f64>())
        .collect();
    let bandwidth = (0..nu)
        .map(|u| cfg.bandwidth - act.uavs[u].bandwidth.iter().sum::<f64>())
        .collect();
    let user_freq =
        (0..nk).map(|k| box_slack(act.users[k].f_local, 0.0, cfg.f_user_max)).collect();
    let uav_freq = (0..nu)
        .map(|u| {
            (0..nk).map(|k| box_slack(act.uavs[u].freq[k], 0.0, cfg.f_uav_max)).collect()
        })
        .collect();
    let uav_capacity = (0..nu)
        .map(|u| {
            let granted: f64 = (0..nk).map(|k| act.beta(k, u) * act.uavs[u].freq[k]).sum();
            cfg.f_uav_max - granted
        })
        .collect();
    let user_data = (0..nk)
        .map(|k| {
            let offload: f64 = (0..nu).map(|u| act.beta(k, u) * q.d_offloaded[k][u]).sum();
            q.d_sensed[k] - (q.d_local[k] + offload)
        })
        .collect();
    let uav_data = (0..nu)
        .map(|u| (0..nk).map(|k| q.d_offloaded[k][u] - q.d_computed[k][u]).collect())
        .collect();
    let uav_speed = (0..nu).map(|u| cfg.v_max - world.uavs[u].vel.norm()).collect();
    let uav_accel = (0..nu).map(|u| cfg.a_max - act.uavs[u].accel.norm()).collect();
    let separation = (0..nu)
        .map(|u| {
            (0..nu)
                .map(|v| {
                    if u == v {
                        f64::INFINITY
                    } else {
                        world.uavs[u].pos.distance(world.uavs[v].pos) - cfg.d_min
                    }
                })
                .collect()
        })
        .collect();
    let boundary_horizontal = (0..nu)
        .map(|u| {
            let r = world.uavs[u].raw_pos;
            box_slack(r.x, 0.0, cfg.area_x_max).min(box_slack(r.y, 0.0, cfg.area_y_max))
        })
        .collect();
    let altitude = (0..nu).map(|u| box_slack(world.uavs[u].pos.z, cfg.z_min, cfg.z_max)).collect();
    let xi_open = (0..nk)
        .map(|k| {
            let d = &act.users[k];
            box_slack(d.xi1, 0.0, 1.0).min(box_slack(d.xi2, 0.0, 1.0))
        })
        .collect();

    ConstraintReport {
        user_energy,
        uav_energy,
        association,
        bandwidth,
        user_freq,
        uav_freq,
        uav_capacity,
        user_data,
        uav_data,
        uav_speed,
        uav_accel,
        separation,
        boundary_horizontal,
        altitude,
        xi_open,
    }
}

/// Per-slot objective: association-weighted processed bits,
/// Σ_u Σ_k β_ku (D_loc + D_comp).
pub fn processed_data_objective(
    action: &JointAction,
    d_local: &[f64],
    d_computed: &[Vec<f64>],
) -> f64 {
    let mut total = 0.0;
    for u in 0..action.uavs.len() {
        for (k, dl) in d_local.iter().enumerate() {
            total += action.beta(k, u) * (dl + d_computed[k][u]);
        }
    }
    total
}

/// Feasibility-capped processed bits for reporting.
///
/// The reward sees raw volumes so violations stay visible to the learner; the
/// reported episode metric caps each user's pipeline at what was physically
/// available: transmission at the sensed bits, local compute at the sensed
/// remainder, and UAV compute at the bits that actually arrived. Local
/// compute counts whether or not the user was scheduled, and the per-user
/// result can never exceed the sensed bits.
pub fn capped_processed_bits(
    action: &JointAction,
    d_sensed: &[f64],
    d_offloaded: &[Vec<f64>],
    d_local: &[f64],
    d_computed: &[Vec<f64>],
) -> f64 {
    let nu = action.uavs.len();
    let mut total = 0.0;
    for k in 0..d_sensed.len() {
        let sent: f64 = (0..nu).map(|u| action.beta(k, u) * d_offloaded[k][u]).sum();
        let sent_feasible = sent.min(d_sensed[k]);
        let local_feasible = d_local[k].min(d_sensed[k] - sent_feasible);
        let computed: f64 = (0..nu).map(|u| action.beta(k, u) * d_computed[k][u]).sum();
        let uav_feasible = computed.min(sent_feasible);
        total += local_feasible + uav_feasible;
    }
    total
}
