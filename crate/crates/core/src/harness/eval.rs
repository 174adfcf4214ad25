//! Deterministic greedy evaluation.

use crate::happo::AgentNets;
use crate::pomdp::McsEnv;
use crate::rng::EVAL_COUNTER_BASE;

use super::experiment::ExperimentConfig;

/// Aggregates over one evaluation batch.
#[derive(Clone, Copy, Debug, Default)]
pub struct EvalOutcome {
    /// Mean per-episode reward of one user agent.
    pub mean_user_reward: f64,
    /// Mean per-episode reward of one UAV agent.
    pub mean_uav_reward: f64,
    /// Mean per-episode feasibility-capped processed data, megabits.
    pub processed_mbits: f64,
    /// Mean per-episode UAV-computed (arrived and processed) data, megabits.
    pub uav_processed_mbits: f64,
    pub energy_violations: u64,
    pub boundary_violations: u64,
    pub collision_violations: u64,
}

/// Evaluates the deterministic policy (the squashed mean action) over
/// `episodes` fresh worlds. Worlds derive from the master seed and
/// `eval_key`, so evaluating the same checkpoint twice with the same key
/// reproduces identical numbers.
pub fn run_evaluation(
    agents: &[AgentNets],
    cfg: &ExperimentConfig,
    episodes: usize,
    eval_key: u64,
) -> EvalOutcome {
    let sim = &cfg.sim;
    let mut out = EvalOutcome::default();
    for i in 0..episodes {
        let counter = EVAL_COUNTER_BASE + eval_key * 10_000 + i as u64;
        let mut env = McsEnv::reset(sim, sim.seed, counter);
        let mut user_reward = 0.0;
        let mut uav_reward = 0.0;
        loop {
            let (obs, _global) = env.observations();
            let actions: Vec<Vec<f64>> =
                agents.iter().zip(&obs).map(|(a, o)| a.actor.mean_action(o)).collect();
            let step = env.step(&actions);
            for (idx, r) in step.rewards.iter().enumerate() {
                if idx < sim.num_users {
                    user_reward += r.total();
                } else {
                    uav_reward += r.total();
                }
            }
            out.processed_mbits += step.eval.processed_bits / 1e6;
            out.uav_processed_mbits += step.eval.uav_processed_bits / 1e6;
            let v = step.eval.report.violations();
            out.energy_violations += v.energy as u64;
            out.boundary_violations += v.boundary as u64;
            out.collision_violations += v.collision as u64;
            if step.done {
                break;
            }
        }
        out.mean_user_reward += user_reward / sim.num_users as f64;
        out.mean_uav_reward += uav_reward / sim.num_uavs as f64;
    }
    let n = episodes.max(1) as f64;
    out.mean_user_reward /= n;
    out.mean_uav_reward /= n;
    out.processed_mbits /= n;
    out.uav_processed_mbits /= n;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::agents::build_agents;
    use crate::nn::ActorVariant;

    fn tiny_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.sim.num_users = 2;
        cfg.sim.num_uavs = 1;
        cfg.sim.num_slots = 4;
        cfg
    }

    #[test]
    fn evaluation_is_reproducible() {
        let cfg = tiny_cfg();
        let agents = build_agents(&cfg.sim, ActorVariant::Mlp).unwrap();
        let a = run_evaluation(&agents, &cfg, 2, 7);
        let b = run_evaluation(&agents, &cfg, 2, 7);
        assert_eq!(a.mean_user_reward.to_bits(), b.mean_user_reward.to_bits());
        assert_eq!(a.processed_mbits.to_bits(), b.processed_mbits.to_bits());
        let c = run_evaluation(&agents, &cfg, 2, 8);
        assert_ne!(a.processed_mbits.to_bits(), c.processed_mbits.to_bits());
    }

    #[test]
    fn processed_data_is_positive_even_untrained() {
        // Local compute happens whether or not anyone is scheduled.
        let cfg = tiny_cfg();
        let agents = build_agents(&cfg.sim, ActorVariant::Ckan).unwrap();
        let out = run_evaluation(&agents, &cfg, 2, 0);
        assert!(out.processed_mbits > 0.0);
    }
}
