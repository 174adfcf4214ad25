//! Per-slot data volumes, user energy, and UAV power/energy accounting.

use crate::config::SimConfig;
use crate::geom::Vec3;

/// Data moved through one user's sensing/offloading/compute pipeline in one
/// slot, in bits. Volumes are reported raw; capacity violations are penalized
/// by the reward, never clipped here.
#[derive(Clone, Copy, Debug, Default)]
pub struct DataVolumes {
    /// Bits sensed: ξ₁ · ô · δ.
    pub sensed: f64,
    /// Bits offloaded over the link: (1-ξ₁) · ξ₂ · R · δ.
    pub offloaded: f64,
    /// Bits computed locally: f_k (1-ξ₁) δ / C_k.
    pub local: f64,
    /// Bits computed at the UAV: f_ku (1-ξ₁)(1-ξ₂) δ / C_u.
    pub uav_computed: f64,
}

pub fn data_volumes(
    xi1: f64,
    xi2: f64,
    rate: f64,
    f_local: f64,
    f_uav: f64,
    cfg: &SimConfig,
) -> DataVolumes {
    let d = cfg.delta;
    DataVolumes {
        sensed: xi1 * cfg.sensing_rate * d,
        offloaded: (1.0 - xi1) * xi2 * rate * d,
        local: f_local * (1.0 - xi1) * d / cfg.cycles_per_bit_user,
        uav_computed: f_uav * (1.0 - xi1) * (1.0 - xi2) * d / cfg.cycles_per_bit_uav,
    }
}

/// One user's energy ledger for one slot, in joules.
#[derive(Clone, Copy, Debug, Default)]
pub struct UserEnergy {
    pub sense: f64,
    /// Transmission energy; counted only when the user is scheduled.
    pub tx: f64,
    pub local: f64,
}

impl UserEnergy {
    pub fn total(&self) -> f64 {
        self.sense + self.tx + self.local
    }
}

pub fn user_energy(
    xi1: f64,
    xi2: f64,
    scheduled: bool,
    d_sensed: f64,
    f_local: f64,
    cfg: &SimConfig,
) -> UserEnergy {
    let tx = if scheduled { cfg.p_tx * (1.0 - xi1) * xi2 * cfg.delta } else { 0.0 };
    UserEnergy {
        sense: cfg.sensing_energy_per_bit * d_sensed,
        tx,
        local: cfg.kappa * f_local.powi(3) * (1.0 - xi1) * cfg.delta,
    }
}

/// Transmission energy of a scheduled user for one slot (the β-weighted term
/// of the energy ledger), used by the closed-form frequency rule before the
/// full ledger exists.
pub fn tx_energy(xi1: f64, xi2: f64, cfg: &SimConfig) -> f64 {
    cfg.p_tx * (1.0 - xi1) * xi2 * cfg.delta
}

/// Rotary-wing flight power, W.
///
/// Blade profile, induced, and parasite terms drive on the horizontal speed;
/// the vertical term is `weight · v_z`. The published induced term
/// `P_i v0 / v_h²` diverges at hover, so the default guarded form
/// `P_i v0 / max(v_h, v0)` is used instead: it equals the hover induced power
/// `P_i` for all v_h ≤ v0 and is continuous at the guard boundary. Setting
/// `induced_power_literal` selects the divergent form for v_h > 0.
/// Negative totals (steep descents) are floored at zero with a warning.
pub fn uav_flight_power(vel: Vec3, cfg: &SimConfig) -> f64 {
    let vh2 = vel.x * vel.x + vel.y * vel.y;
    let vh = vh2.sqrt();
    let tip = cfg.rotor_speed * cfg.rotor_radius;
    let blade = cfg.p0_blade * (1.0 + 3.0 * vh2 / (tip * tip));
    let induced = if cfg.induced_power_literal && vh2 > 0.0 {
        cfg.p_induced * cfg.v_induced / vh2
    } else {
        cfg.p_induced * cfg.v_induced / vh.max(cfg.v_induced)
    };
    let parasite = 0.5
        * cfg.fuselage_drag
        * cfg.air_density
        * cfg.rotor_solidity
        * cfg.rotor_area
        * vh2
        * vh;
    let vertical = cfg.weight * vel.z;
    let total = blade + induced + parasite + vertical;
    if total < 0.0 {
        // Steep descents occur constantly under random policies; warn once
        // and demote the rest to debug.
        use std::sync::atomic::{AtomicBool, Ordering};
        static WARNED: AtomicBool = AtomicBool::new(false);
        if !WARNED.swap(true, Ordering::Relaxed) {
            log::warn!("flight power clipped to zero (descent term dominates): {total:.3} W");
        } else {
            log::debug!("flight power clipped to zero: {total:.3} W");
        }
        0.0
    } else {
        total
    }
}

/// Total UAV energy for one slot: per-user compute energy plus flight energy.
pub fn uav_energy(
    flight_power: f64,
    freq: &[f64],
    xi: &[(f64, f64)],
    assoc: &[bool],
    cfg: &SimConfig,
) -> f64 {
    let mut compute = 0.0;
    for k in 0..freq.len() {
        if assoc[k] {
            let (xi1, xi2) = xi[k];
            compute += cfg.kappa * freq[k].powi(3) * (1.0 - xi1) * (1.0 - xi2) * cfg.delta;
        }
    }
    compute + flight_power * cfg.delta
}
