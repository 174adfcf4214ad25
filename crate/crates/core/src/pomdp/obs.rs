//! Per-agent observation vectors and the concatenated global state.
//!
//! Positions are normalized by the area extents and the altitude ceiling.
//! Energy budgets and the sensing rate are rescaled (J, hundreds of J, Mb/s)
//! so every feature sits within a few units of zero for the networks.

use crate::config::SimConfig;
use crate::env::WorldState;
use crate::geom::Vec3;

/// Observation length of a user agent.
pub fn user_obs_len(cfg: &SimConfig) -> usize {
    5 + 3 * cfg.num_uavs
}

/// Observation length of a UAV agent.
pub fn uav_obs_len(cfg: &SimConfig) -> usize {
    4 + 3 * (cfg.num_uavs - 1) + 3 * cfg.num_users
}

/// Length of the concatenated global state.
pub fn global_state_len(cfg: &SimConfig) -> usize {
    cfg.num_users * user_obs_len(cfg) + cfg.num_uavs * uav_obs_len(cfg)
}

/// Observation length of agent `i` under the users-then-UAVs indexing.
pub fn obs_len_for_agent(cfg: &SimConfig, agent: usize) -> usize {
    if agent < cfg.num_users {
        user_obs_len(cfg)
    } else {
        uav_obs_len(cfg)
    }
}

fn push_pos(out: &mut Vec<f64>, p: Vec3, cfg: &SimConfig) {
    out.push(p.x / cfg.area_x_max);
    out.push(p.y / cfg.area_y_max);
    out.push(p.z / cfg.z_max);
}

/// Builds all per-agent observations plus the global state (the
/// concatenation of every observation in agent-index order: users first,
/// then UAVs).
pub fn build_observations(world: &WorldState, cfg: &SimConfig) -> (Vec<Vec<f64>>, Vec<f64>) {
    let nk = cfg.num_users;
    let nu = cfg.num_uavs;
    let mut all = Vec::with_capacity(nk + nu);

    for k in 0..nk {
        let mut o = Vec::with_capacity(user_obs_len(cfg));
        push_pos(&mut o, world.users[k].pos, cfg);
        o.push(cfg.e_user_max);
        o.push(cfg.sensing_rate / 1e6);
        for uav in &world.uavs {
            push_pos(&mut o, uav.pos, cfg);
        }
        debug_assert_eq!(o.len(), user_obs_len(cfg));
        all.push(o);
    }

    for u in 0..nu {
        let mut o = Vec::with_capacity(uav_obs_len(cfg));
        push_pos(&mut o, world.uavs[u].pos, cfg);
        for (v, uav) in world.uavs.iter().enumerate() {
            if v != u {
                push_pos(&mut o, uav.pos, cfg);
            }
        }
        o.push(cfg.e_uav_max / 100.0);
        for user in &world.users {
            push_pos(&mut o, user.pos, cfg);
        }
        debug_assert_eq!(o.len(), uav_obs_len(cfg));
        all.push(o);
    }

    let mut global = Vec::with_capacity(global_state_len(cfg));
    for o in &all {
        global.extend_from_slice(o);
    }
    (all, global)
}
