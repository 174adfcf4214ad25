//! Closed-form optimal user CPU frequency.
//!
//! The local frequency is removed from the learned action space: given the
//! slot partition, association, and offloaded bits, the data-capacity and
//! energy constraints each admit a largest feasible frequency, and local
//! throughput is monotone in frequency, so the optimum is the smaller of the
//! two caps clipped to the hardware range.

use crate::config::SimConfig;

/// Optimal local CPU frequency for one user in one slot.
///
/// * `d_sensed` — bits sensed this slot.
/// * `offloaded` — association-weighted bits offloaded this slot.
/// * `e_sense` — sensing energy already committed, J.
/// * `e_tx` — association-weighted transmission energy, J.
pub fn optimal_user_frequency(
    d_sensed: f64,
    offloaded: f64,
    e_sense: f64,
    e_tx: f64,
    xi1: f64,
    cfg: &SimConfig,
) -> f64 {
    let active = (1.0 - xi1) * cfg.delta;
    // Largest frequency that keeps local + offloaded bits within the sensed
    // volume.
    let f_data = (d_sensed - offloaded) * cfg.cycles_per_bit_user / active;
    // Largest frequency the remaining energy budget can drive.
    let residual = cfg.e_user_max - e_sense - e_tx;
    let f_energy = if residual > 0.0 { (residual / (cfg.kappa * active)).cbrt() } else { 0.0 };
    f_data.min(f_energy).min(cfg.f_user_max).max(0.0)
}
