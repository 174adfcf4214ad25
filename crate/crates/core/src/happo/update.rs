//! The sequential update round: one minibatch, one shuffled agent order.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::nn::{ActorNet, CriticNet};

use super::adam::optimizer_step;
use super::buffer::RolloutBuffer;
use super::cascade::{AdvantageCascade, CascadeError};
use super::gae::advantage_normalize;
use super::loss::{actor_loss, critic_loss, policy_ratios, ActorBatch, ActorLossStats};

#[derive(Debug, Error)]
pub enum UpdateError {
    #[error("update round called with an empty minibatch")]
    EmptyBatch,
    #[error(transparent)]
    Cascade(#[from] CascadeError),
}

/// One agent's actor and critic.
pub struct AgentNets {
    pub actor: ActorNet,
    pub critic: CriticNet,
}

/// Hyperparameters of one update round.
#[derive(Clone, Copy, Debug)]
pub struct UpdateConfig {
    /// Gradient steps per agent per round (p_e).
    pub epochs: usize,
    pub clip_epsilon: f64,
    pub entropy_coef: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
}

/// Per-agent statistics of one round.
#[derive(Clone, Copy, Debug, Default)]
pub struct AgentRoundStats {
    pub actor: ActorLossStats,
    pub critic_loss: f64,
}

#[derive(Clone, Debug, Default)]
pub struct RoundStats {
    /// Indexed by agent (not by update order).
    pub per_agent: Vec<AgentRoundStats>,
    /// Mean per-slot reward over the minibatch, averaged across agents.
    pub mean_reward: f64,
}

/// Runs one sequential update round over `minibatch` (indices into the
/// buffer).
///
/// A fresh uniform agent permutation is drawn; the cascade starts from each
/// agent's batch-normalized advantages; every agent takes `epochs` clipped
/// surrogate steps and then folds its new-to-behavior ratios into the
/// cascade. Critics regress onto the λ-returns afterwards, so no agent's
/// critic moves during the actor phase.
pub fn sequential_update_round(
    buffer: &RolloutBuffer,
    advantages: &[Vec<f64>],
    returns: &[Vec<f64>],
    minibatch: &[usize],
    agents: &mut [AgentNets],
    cfg: &UpdateConfig,
    perm_rng: &mut ChaCha8Rng,
) -> Result<RoundStats, UpdateError> {
    if minibatch.is_empty() || buffer.is_empty() {
        return Err(UpdateError::EmptyBatch);
    }
    let num_agents = agents.len();
    assert_eq!(buffer.agents.len(), num_agents, "buffer/agent count");

    let mut order: Vec<usize> = (0..num_agents).collect();
    order.shuffle(perm_rng);

    // Batch-normalized advantages per agent, gathered over the minibatch.
    let normalized: Vec<Vec<f64>> = (0..num_agents)
        .map(|a| {
            let gathered: Vec<f64> = minibatch.iter().map(|&t| advantages[a][t]).collect();
            advantage_normalize(&gathered)
        })
        .collect();

    let mut stats = RoundStats {
        per_agent: vec![AgentRoundStats::default(); num_agents],
        mean_reward: 0.0,
    };
    for a in 0..num_agents {
        let traj = &buffer.agents[a];
        stats.mean_reward += minibatch.iter().map(|&t| traj.reward[t]).sum::<f64>()
            / (minibatch.len() * num_agents) as f64;
    }

    let mut cascade = AdvantageCascade::new(minibatch.len());
    for (position, &agent) in order.iter().enumerate() {
        let traj = &buffer.agents[agent];
        let mut batch = ActorBatch {
            obs: minibatch.iter().map(|&t| traj.obs[t].clone()).collect(),
            pre_squash: minibatch.iter().map(|&t| traj.pre_squash[t].clone()).collect(),
            log_prob_old: minibatch.iter().map(|&t| traj.log_prob[t]).collect(),
            weights: Vec::new(),
        };
        batch.weights = cascade.weighted(&normalized[agent]);

        for _ in 0..cfg.epochs {
            let s = actor_loss(
                &mut agents[agent].actor,
                &batch,
                cfg.clip_epsilon,
                cfg.entropy_coef,
            );
            optimizer_step(&mut agents[agent].actor.params, cfg.actor_lr);
            stats.per_agent[agent].actor = s;
        }

        let ratios = policy_ratios(&agents[agent].actor, &batch);
        cascade.apply_agent(&ratios, position)?;
    }

    for &agent in &order {
        let states: Vec<Vec<f64>> =
            minibatch.iter().map(|&t| buffer.global_states[t].clone()).collect();
        let targets: Vec<f64> = minibatch.iter().map(|&t| returns[agent][t]).collect();
        for _ in 0..cfg.epochs {
            let loss = critic_loss(&mut agents[agent].critic, &states, &targets);
            optimizer_step(&mut agents[agent].critic.params, cfg.critic_lr);
            stats.per_agent[agent].critic_loss = loss;
        }
    }

    Ok(stats)
}
