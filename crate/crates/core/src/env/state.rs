//! World state: users, UAVs, and the decoded joint action for one slot.

use crate::geom::Vec3;

/// One sensing user. Positions live on the ground plane (z = 0).
#[derive(Clone, Debug, Default)]
pub struct UserState {
    /// Position, meters.
    pub pos: Vec3,
    /// Current speed, m/s (floored at 0).
    pub speed: f64,
    /// Current heading, radians.
    pub heading: f64,
    /// Bits sensed in the last evaluated slot.
    pub d_sensed: f64,
    /// Bits offloaded to the associated UAV in the last evaluated slot.
    pub d_offloaded: f64,
    /// Bits computed locally in the last evaluated slot.
    pub d_local: f64,
    /// Sensing energy, J.
    pub e_sense: f64,
    /// Transmission energy (zero when unscheduled), J.
    pub e_tx: f64,
    /// Local compute energy, J.
    pub e_local: f64,
}

impl UserState {
    pub fn total_energy(&self) -> f64 {
        self.e_sense + self.e_tx + self.e_local
    }
}

/// One UAV.
#[derive(Clone, Debug, Default)]
pub struct UavState {
    /// Position after projection into the service volume, meters.
    pub pos: Vec3,
    /// Position before projection; the boundary penalty reads this.
    pub raw_pos: Vec3,
    /// Velocity after the speed-limit projection, m/s.
    pub vel: Vec3,
    /// Bits computed for each user in the last evaluated slot.
    pub d_computed: Vec<f64>,
    /// Compute energy in the last evaluated slot, J.
    pub e_compute: f64,
    /// Flight power during the last evaluated slot, W.
    pub flight_power: f64,
    /// Total energy in the last evaluated slot, J.
    pub e_total: f64,
}

/// Full world state between slots.
#[derive(Clone, Debug)]
pub struct WorldState {
    pub users: Vec<UserState>,
    pub uavs: Vec<UavState>,
    /// Slot index within the episode.
    pub slot: usize,
}

/// Decoded, feasibility-projected decisions of one user for one slot.
#[derive(Clone, Debug)]
pub struct UserDecision {
    /// Fraction of the slot spent sensing, in (0, 1).
    pub xi1: f64,
    /// Fraction of the remaining time spent transmitting, in (0, 1).
    pub xi2: f64,
    /// Associated UAV, if scheduled. Encodes the one-hot association row,
    /// so at most one association holds by construction.
    pub assoc: Option<usize>,
    /// Local CPU frequency, Hz. Filled by the closed-form rule, not learned.
    pub f_local: f64,
}

impl UserDecision {
    /// 1 if this user is associated with UAV `u`, else 0.
    pub fn beta(&self, u: usize) -> f64 {
        if self.assoc == Some(u) {
            1.0
        } else {
            0.0
        }
    }
}

/// Decoded decisions of one UAV for one slot.
#[derive(Clone, Debug)]
pub struct UavDecision {
    /// Commanded acceleration, m/s², with norm at most `a_max`.
    pub accel: Vec3,
    /// Bandwidth granted to each user, Hz (zero for unassociated users).
    pub bandwidth: Vec<f64>,
    /// CPU frequency granted to each user, Hz (zero for unassociated users).
    pub freq: Vec<f64>,
}

/// The decoded joint action of all agents for one slot.
#[derive(Clone, Debug)]
pub struct JointAction {
    pub users: Vec<UserDecision>,
    pub uavs: Vec<UavDecision>,
}

impl JointAction {
    /// 1 if user `k` is associated with UAV `u`, else 0.
    pub fn beta(&self, k: usize, u: usize) -> f64 {
        self.users[k].beta(u)
    }
}
