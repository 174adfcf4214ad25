//! The multi-agent decision process wrapped around the physical world.
//!
//! One step: decode user actions (fixing associations), decode UAV actions,
//! draw fading for every link, evaluate rates, volumes, and energies with the
//! closed-form local frequency, score constraints and rewards, then advance
//! mobility and kinematics.
//!
//! Determinism contract: a step is a pure function of (state, actions, stream
//! positions). The fading stream is consumed for every (user, UAV) pair and
//! the mobility stream for every user, in fixed index order, regardless of
//! the actions, so different policies replay identical worlds under common
//! random numbers.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;

use crate::config::SimConfig;
use crate::env::{
    capped_processed_bits, channel_power_gain, data_volumes, evaluate_constraints,
    processed_data_objective, step_uav_kinematics, step_user_mobility, transmission_rate,
    tx_energy, uav_energy, uav_flight_power, user_energy, ConstraintReport, FadingDraw,
    JointAction, SlotQuantities, UavState, UserState, WorldState,
};
use crate::geom::Vec3;
use crate::rng::{stream, StreamKind};

use super::action::{decode_uav_action, decode_user_action};
use super::frequency::optimal_user_frequency;
use super::obs::build_observations;
use super::reward::{compute_rewards, RewardBreakdown, RewardInputs};

/// Everything measured while evaluating one slot.
#[derive(Clone, Debug)]
pub struct SlotEvaluation {
    pub action: JointAction,
    /// Bits sensed per user.
    pub d_sensed: Vec<f64>,
    /// Bits offloaded per (user, uav).
    pub d_offloaded: Vec<Vec<f64>>,
    /// Bits computed locally per user.
    pub d_local: Vec<f64>,
    /// Bits computed at the UAV per (user, uav).
    pub d_computed: Vec<Vec<f64>>,
    /// Total energy per user, J.
    pub e_user: Vec<f64>,
    /// Total energy per UAV, J.
    pub e_uav: Vec<f64>,
    pub report: ConstraintReport,
    /// Association-weighted processed bits (the optimization objective).
    pub objective_bits: f64,
    /// Feasibility-capped processed bits (the reported metric).
    pub processed_bits: f64,
    /// Feasibility-capped bits computed at UAVs only.
    pub uav_processed_bits: f64,
}

/// Result of advancing the environment by one slot.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    /// Rewards for the slot just played (users first, then UAVs).
    pub rewards: Vec<RewardBreakdown>,
    /// Observations of the next state.
    pub observations: Vec<Vec<f64>>,
    /// Global state of the next state.
    pub global_state: Vec<f64>,
    /// True when the episode horizon was reached.
    pub done: bool,
    pub eval: SlotEvaluation,
}

/// The environment: world state plus the episode's random streams.
pub struct McsEnv {
    cfg: SimConfig,
    state: WorldState,
    mobility: ChaCha8Rng,
    fading: ChaCha8Rng,
}

impl McsEnv {
    /// Starts a fresh episode. Users spawn uniformly over the area moving at
    /// the mean speed with uniform headings; UAVs spawn uniformly at the
    /// middle altitude, at rest.
    pub fn reset(cfg: &SimConfig, master_seed: u64, episode: u64) -> McsEnv {
        let mut init = stream(master_seed, StreamKind::WorldInit, episode);
        let users = (0..cfg.num_users)
            .map(|_| {
                let x = init.random_range(0.0..cfg.area_x_max);
                let y = init.random_range(0.0..cfg.area_y_max);
                let heading = init.random_range(0.0..std::f64::consts::TAU);
                UserState {
                    pos: Vec3::new(x, y, 0.0),
                    speed: cfg.v_bar,
                    heading,
                    ..UserState::default()
                }
            })
            .collect();
        let uavs = (0..cfg.num_uavs)
            .map(|_| {
                let x = init.random_range(0.0..cfg.area_x_max);
                let y = init.random_range(0.0..cfg.area_y_max);
                let pos = Vec3::new(x, y, 0.5 * (cfg.z_min + cfg.z_max));
                UavState {
                    pos,
                    raw_pos: pos,
                    vel: Vec3::ZERO,
                    d_computed: vec![0.0; cfg.num_users],
                    ..UavState::default()
                }
            })
            .collect();
        McsEnv {
            cfg: cfg.clone(),
            state: WorldState { users, uavs, slot: 0 },
            mobility: stream(master_seed, StreamKind::Mobility, episode),
            fading: stream(master_seed, StreamKind::Fading, episode),
        }
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn cfg(&self) -> &SimConfig {
        &self.cfg
    }

    /// Observations and global state for the current slot.
    pub fn observations(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        build_observations(&self.state, &self.cfg)
    }

    /// Plays one slot with the given squashed raw actions (one vector in
    /// [-1, 1]^d per agent, users first).
    pub fn step(&mut self, raw_actions: &[Vec<f64>]) -> StepOutcome {
        let cfg = self.cfg.clone();
        let (next, outcome) =
            env_step(&self.state, raw_actions, &cfg, &mut self.mobility, &mut self.fading);
        self.state = next;
        outcome
    }
}

/// Decodes, evaluates, scores, and advances one slot as a pure function of
/// the state, the actions, and the two stream positions.
pub fn env_step(
    state: &WorldState,
    raw_actions: &[Vec<f64>],
    cfg: &SimConfig,
    mobility: &mut ChaCha8Rng,
    fading: &mut ChaCha8Rng,
) -> (WorldState, StepOutcome) {
    let nk = cfg.num_users;
    let nu = cfg.num_uavs;
    assert_eq!(raw_actions.len(), nk + nu, "one raw action per agent");

    // Users decode first: associations gate the UAV resource grants.
    let mut users: Vec<_> =
        (0..nk).map(|k| decode_user_action(&raw_actions[k], cfg)).collect();
    let uavs: Vec<_> = (0..nu)
        .map(|u| {
            let associated: Vec<bool> = (0..nk).map(|k| users[k].assoc == Some(u)).collect();
            decode_uav_action(&raw_actions[nk + u], &associated, cfg)
        })
        .collect();

    // Fading is drawn for every link in fixed order to keep the stream
    // position independent of the schedule.
    let gains: Vec<Vec<f64>> = (0..nk)
        .map(|k| {
            (0..nu)
                .map(|u| {
                    let draw = FadingDraw::sample(fading);
                    channel_power_gain(state.users[k].pos, state.uavs[u].pos, cfg, draw)
                })
                .collect()
        })
        .collect();

    let mut d_sensed = vec![0.0; nk];
    let mut d_offloaded = vec![vec![0.0; nu]; nk];
    let mut d_local = vec![0.0; nk];
    let mut d_computed = vec![vec![0.0; nu]; nk];
    let mut e_user_total = vec![0.0; nk];
    let mut user_energies = Vec::with_capacity(nk);

    for k in 0..nk {
        let dec = users[k].clone();
        let mut offloaded = 0.0;
        for u in 0..nu {
            let rate = transmission_rate(dec.beta(u), uavs[u].bandwidth[k], gains[k][u], cfg);
            let v = data_volumes(dec.xi1, dec.xi2, rate, 0.0, uavs[u].freq[k], cfg);
            d_offloaded[k][u] = v.offloaded;
            d_computed[k][u] = v.uav_computed;
            offloaded += dec.beta(u) * v.offloaded;
            if u == 0 {
                d_sensed[k] = v.sensed;
            }
        }
        let e_sense = cfg.sensing_energy_per_bit * d_sensed[k];
        let e_tx = if dec.assoc.is_some() { tx_energy(dec.xi1, dec.xi2, cfg) } else { 0.0 };
        let f_local = optimal_user_frequency(d_sensed[k], offloaded, e_sense, e_tx, dec.xi1, cfg);
        users[k].f_local = f_local;
        d_local[k] = f_local * (1.0 - dec.xi1) * cfg.delta / cfg.cycles_per_bit_user;
        let energy =
            user_energy(dec.xi1, dec.xi2, dec.assoc.is_some(), d_sensed[k], f_local, cfg);
        e_user_total[k] = energy.total();
        user_energies.push(energy);
    }

    let action = JointAction { users, uavs };

    let mut flight_power = vec![0.0; nu];
    let mut e_uav_total = vec![0.0; nu];
    for u in 0..nu {
        flight_power[u] = uav_flight_power(state.uavs[u].vel, cfg);
        let xi: Vec<(f64, f64)> =
            action.users.iter().map(|d| (d.xi1, d.xi2)).collect();
        let assoc: Vec<bool> = (0..nk).map(|k| action.beta(k, u) == 1.0).collect();
        e_uav_total[u] = uav_energy(flight_power[u], &action.uavs[u].freq, &xi, &assoc, cfg);
    }

    let report = evaluate_constraints(
        state,
        &SlotQuantities {
            action: &action,
            d_sensed: &d_sensed,
            d_offloaded: &d_offloaded,
            d_local: &d_local,
            d_computed: &d_computed,
            e_user: &e_user_total,
            e_uav: &e_uav_total,
        },
        cfg,
    );

    let rewards = compute_rewards(
        state,
        &RewardInputs {
            action: &action,
            d_sensed: &d_sensed,
            d_offloaded: &d_offloaded,
            d_local: &d_local,
            d_computed: &d_computed,
            e_user: &e_user_total,
            e_uav: &e_uav_total,
        },
        cfg,
    );

    let objective_bits = processed_data_objective(&action, &d_local, &d_computed);
    let processed_bits =
        capped_processed_bits(&action, &d_sensed, &d_offloaded, &d_local, &d_computed);
    let uav_processed_bits: f64 = (0..nk)
        .map(|k| {
            let sent: f64 = (0..nu).map(|u| action.beta(k, u) * d_offloaded[k][u]).sum();
            let computed: f64 = (0..nu).map(|u| action.beta(k, u) * d_computed[k][u]).sum();
            computed.min(sent.min(d_sensed[k]))
        })
        .sum();

    // Advance the world; the slot results are recorded on the next state so
    // downstream consumers can read the ledger of the slot just played.
    let mut next_users = Vec::with_capacity(nk);
    for k in 0..nk {
        let mut s = step_user_mobility(&state.users[k], cfg, mobility);
        s.d_sensed = d_sensed[k];
        s.d_offloaded = (0..nu).map(|u| action.beta(k, u) * d_offloaded[k][u]).sum();
        s.d_local = d_local[k];
        s.e_sense = user_energies[k].sense;
        s.e_tx = user_energies[k].tx;
        s.e_local = user_energies[k].local;
        next_users.push(s);
    }
    let mut next_uavs = Vec::with_capacity(nu);
    for u in 0..nu {
        let mut s = step_uav_kinematics(&state.uavs[u], action.uavs[u].accel, cfg);
        s.d_computed = (0..nk).map(|k| action.beta(k, u) * d_computed[k][u]).collect();
        s.e_compute = e_uav_total[u] - flight_power[u] * cfg.delta;
        s.flight_power = flight_power[u];
        s.e_total = e_uav_total[u];
        next_uavs.push(s);
    }
    let next = WorldState { users: next_users, uavs: next_uavs, slot: state.slot + 1 };

    let (observations, global_state) = build_observations(&next, cfg);
    let done = next.slot >= cfg.num_slots;
    let eval = SlotEvaluation {
        action,
        d_sensed,
        d_offloaded,
        d_local,
        d_computed,
        e_user: e_user_total,
        e_uav: e_uav_total,
        report,
        objective_bits,
        processed_bits,
        uav_processed_bits,
    };
    (next, StepOutcome { rewards, observations, global_state, done, eval })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pomdp::action::{uav_action_dim, user_action_dim};

    fn zero_actions(cfg: &SimConfig) -> Vec<Vec<f64>> {
        let mut acts = Vec::new();
        for _ in 0..cfg.num_users {
            acts.push(vec![0.0; user_action_dim(cfg)]);
        }
        for _ in 0..cfg.num_uavs {
            acts.push(vec![0.0; uav_action_dim(cfg)]);
        }
        acts
    }

    fn random_actions(cfg: &SimConfig, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<Vec<f64>> {
        use rand::RngExt;
        let mut acts = Vec::new();
        for k in 0..cfg.num_users + cfg.num_uavs {
            let d = crate::pomdp::action::action_dim_for_agent(cfg, k);
            acts.push((0..d).map(|_| rng.random_range(-1.0..1.0)).collect());
        }
        acts
    }

    #[test]
    fn episode_terminates_after_exactly_n_slots() {
        let cfg = SimConfig::desk_scale();
        let mut env = McsEnv::reset(&cfg, 7, 0);
        let mut steps = 0;
        loop {
            let out = env.step(&zero_actions(&cfg));
            steps += 1;
            if out.done {
                break;
            }
            assert!(steps <= cfg.num_slots);
        }
        assert_eq!(steps, cfg.num_slots);
    }

    #[test]
    fn identical_seeds_and_actions_replay_bitwise() {
        let cfg = SimConfig::desk_scale();
        let mut rng = stream(9, StreamKind::Policy, 0);
        let acts: Vec<_> = (0..cfg.num_slots).map(|_| random_actions(&cfg, &mut rng)).collect();

        let run = |episode: u64| {
            let mut env = McsEnv::reset(&cfg, 42, episode);
            let mut trace = Vec::new();
            for a in &acts {
                let out = env.step(a);
                trace.push((
                    out.eval.objective_bits,
                    out.eval.processed_bits,
                    out.rewards.iter().map(|r| r.total()).sum::<f64>(),
                    out.global_state.clone(),
                ));
            }
            trace
        };
        let t1 = run(3);
        let t2 = run(3);
        for (a, b) in t1.iter().zip(&t2) {
            assert_eq!(a.0.to_bits(), b.0.to_bits());
            assert_eq!(a.1.to_bits(), b.1.to_bits());
            assert_eq!(a.2.to_bits(), b.2.to_bits());
            assert_eq!(a.3, b.3);
        }
        // A different episode index replays a different world.
        let t3 = run(4);
        assert_ne!(t1[0].3, t3[0].3);
    }

    #[test]
    fn objective_matches_resummation_from_returned_volumes() {
        let cfg = SimConfig::desk_scale();
        let mut env = McsEnv::reset(&cfg, 11, 0);
        let mut rng = stream(11, StreamKind::Policy, 1);
        for _ in 0..cfg.num_slots {
            let out = env.step(&random_actions(&cfg, &mut rng));
            let mut oracle = 0.0;
            for k in 0..cfg.num_users {
                for u in 0..cfg.num_uavs {
                    oracle += out.eval.action.beta(k, u)
                        * (out.eval.d_local[k] + out.eval.d_computed[k][u]);
                }
            }
            assert!((out.eval.objective_bits - oracle).abs() <= 1e-9 * oracle.max(1.0));
        }
    }

    #[test]
    fn reward_totals_equal_goal_plus_penalties() {
        let cfg = SimConfig::desk_scale();
        let mut env = McsEnv::reset(&cfg, 13, 0);
        let mut rng = stream(13, StreamKind::Policy, 2);
        for _ in 0..cfg.num_slots {
            let out = env.step(&random_actions(&cfg, &mut rng));
            for r in &out.rewards {
                assert_eq!(r.total(), r.goal + r.penalty_sum());
                assert!(r.p_energy <= 0.0);
                assert!(r.p_sense <= 0.0);
                assert!(r.p_link <= 0.0);
                assert!(r.p_range <= 0.0);
                assert!(r.p_proximity <= 0.0);
            }
        }
    }

    #[test]
    fn all_unscheduled_means_no_uav_bits_but_local_compute() {
        let cfg = SimConfig::desk_scale();
        let mut env = McsEnv::reset(&cfg, 19, 0);
        // Negative association scores leave every user unscheduled.
        let mut acts = zero_actions(&cfg);
        for a in acts.iter_mut().take(cfg.num_users) {
            for s in &mut a[2..] {
                *s = -1.0;
            }
        }
        let mut local_bits = 0.0;
        loop {
            let out = env.step(&acts);
            assert_eq!(out.eval.uav_processed_bits, 0.0);
            assert_eq!(out.eval.objective_bits, 0.0, "objective is association-weighted");
            assert!(out.eval.d_computed.iter().flatten().all(|&b| b == 0.0));
            local_bits += out.eval.d_local.iter().sum::<f64>();
            if out.done {
                break;
            }
        }
        assert!(local_bits > 0.0, "local compute runs regardless of scheduling");
    }

    #[test]
    fn frequency_rule_never_causes_budget_or_capacity_violations() {
        let cfg = SimConfig::desk_scale();
        let mut rng = stream(17, StreamKind::Policy, 3);
        for ep in 0..20 {
            let mut env = McsEnv::reset(&cfg, 17, ep);
            for _ in 0..cfg.num_slots {
                let out = env.step(&random_actions(&cfg, &mut rng));
                for k in 0..cfg.num_users {
                    let dec = &out.eval.action.users[k];
                    let offload: f64 = (0..cfg.num_uavs)
                        .map(|u| out.eval.action.beta(k, u) * out.eval.d_offloaded[k][u])
                        .sum();
                    // Local compute never exceeds the sensed remainder.
                    let room = (out.eval.d_sensed[k] - offload).max(0.0);
                    assert!(out.eval.d_local[k] <= room + 1.0);
                    // Local compute never exceeds the energy residual.
                    assert!(out.eval.e_user[k] <= cfg.e_user_max + 1e-9 || dec.f_local == 0.0);
                }
            }
        }
    }
}
