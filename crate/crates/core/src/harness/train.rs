//! The end-to-end training loop.
//!
//! Episodes are collected in blocks of `episodes_per_update`; each block is
//! followed by GAE, a shuffled minibatch split, and one sequential update
//! round per minibatch. Evaluation rows are emitted at the configured
//! cadence. Every random stream derives from the master seed and an episode
//! or update counter, so runs are reproducible for any worker count.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;

use crate::happo::{
    compute_gae, sequential_update_round, AgentNets, RolloutBuffer, Transition, UpdateConfig,
};
use crate::pomdp::McsEnv;
use crate::rng::{stream, StreamKind};

use super::agents::build_agents;
use super::checkpoint::save_checkpoint;
use super::eval::run_evaluation;
use super::experiment::ExperimentConfig;
use super::metrics::{MetricsRow, MetricsWriter};
use super::HarnessError;

pub const REWARDS_HEADER: &str = "episode,mean_user_reward,mean_uav_reward,total_reward";

/// Counter space for the uniform-random baseline episodes.
const BASELINE_COUNTER_BASE: u64 = 1 << 41;

/// Training-episode reward summary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeReward {
    pub episode: usize,
    /// Episode reward averaged over user agents.
    pub mean_user: f64,
    /// Episode reward averaged over UAV agents.
    pub mean_uav: f64,
    /// Episode reward summed over all agents.
    pub total: f64,
}

/// Result of one training run.
pub struct TrainOutcome {
    pub metrics: Vec<MetricsRow>,
    pub episode_rewards: Vec<EpisodeReward>,
    pub checkpoint_path: PathBuf,
    pub metrics_path: PathBuf,
    pub rewards_path: PathBuf,
}

struct EpisodeData {
    episode: usize,
    slots: Vec<(Vec<f64>, Vec<Transition>, bool)>,
    reward: EpisodeReward,
}

fn collect_episode(cfg: &ExperimentConfig, agents: &[AgentNets], episode: usize) -> EpisodeData {
    let sim = &cfg.sim;
    let mut env = McsEnv::reset(sim, sim.seed, episode as u64);
    let mut policy_rng = stream(sim.seed, StreamKind::Policy, episode as u64);
    let mut slots = Vec::with_capacity(sim.num_slots);
    let mut user_sum = 0.0;
    let mut uav_sum = 0.0;
    loop {
        let (obs, global) = env.observations();
        let mut actions = Vec::with_capacity(agents.len());
        let mut partial: Vec<(Vec<f64>, Vec<f64>, f64, f64)> = Vec::with_capacity(agents.len());
        for (a, o) in agents.iter().zip(&obs) {
            let eval = a.actor.forward(o);
            let sampled = a.actor.sample(&eval, &mut policy_rng);
            let value = a.critic.value(&global);
            actions.push(sampled.squashed);
            partial.push((o.clone(), sampled.pre_squash, sampled.log_prob, value));
        }
        let step = env.step(&actions);
        let transitions = partial
            .into_iter()
            .zip(&step.rewards)
            .map(|((o, pre_squash, log_prob, value), r)| Transition {
                obs: o,
                pre_squash,
                log_prob,
                reward: r.total(),
                value,
            })
            .collect();
        for (idx, r) in step.rewards.iter().enumerate() {
            if idx < sim.num_users {
                user_sum += r.total();
            } else {
                uav_sum += r.total();
            }
        }
        slots.push((global, transitions, step.done));
        if step.done {
            break;
        }
    }
    EpisodeData {
        episode,
        slots,
        reward: EpisodeReward {
            episode,
            mean_user: user_sum / sim.num_users as f64,
            mean_uav: uav_sum / sim.num_uavs as f64,
            total: user_sum + uav_sum,
        },
    }
}

/// Collects a block of episodes, optionally across worker threads. Each
/// episode owns disjoint streams, so the result is identical for any worker
/// count; episodes are merged back in index order.
fn collect_block(
    cfg: &ExperimentConfig,
    agents: &[AgentNets],
    episodes: std::ops::Range<usize>,
) -> Vec<EpisodeData> {
    let ids: Vec<usize> = episodes.collect();
    if cfg.workers <= 1 || ids.len() <= 1 {
        return ids.iter().map(|&e| collect_episode(cfg, agents, e)).collect();
    }
    let workers = cfg.workers.min(ids.len());
    let mut out: Vec<EpisodeData> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let ids = &ids;
                scope.spawn(move || {
                    ids.iter()
                        .skip(w)
                        .step_by(workers)
                        .map(|&e| collect_episode(cfg, agents, e))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("rollout worker panicked")).collect()
    });
    out.sort_by_key(|d| d.episode);
    out
}

fn update_phase(
    cfg: &ExperimentConfig,
    agents: &mut [AgentNets],
    buffer: &RolloutBuffer,
    update_index: u64,
) -> Result<(), HarnessError> {
    let sim = &cfg.sim;
    let num_agents = agents.len();
    let mut advantages = Vec::with_capacity(num_agents);
    let mut returns = Vec::with_capacity(num_agents);
    for a in 0..num_agents {
        let traj = &buffer.agents[a];
        let (adv, ret) = compute_gae(&traj.reward, &traj.value, &traj.done, sim.gamma, sim.gae_lambda);
        advantages.push(adv);
        returns.push(ret);
    }

    let mut perm_rng = stream(sim.seed, StreamKind::Permutation, update_index);
    let mut indices: Vec<usize> = (0..buffer.len()).collect();
    indices.shuffle(&mut perm_rng);
    let chunk = buffer.len().div_ceil(cfg.minibatches);
    let ucfg = UpdateConfig {
        epochs: cfg.update_epochs,
        clip_epsilon: sim.clip_epsilon,
        entropy_coef: sim.entropy_coef,
        actor_lr: sim.actor_lr,
        critic_lr: sim.critic_lr,
    };
    for minibatch in indices.chunks(chunk) {
        sequential_update_round(
            buffer,
            &advantages,
            &returns,
            minibatch,
            agents,
            &ucfg,
            &mut perm_rng,
        )?;
    }
    Ok(())
}

/// Trains a policy per the configuration, writing `metrics.csv`,
/// `rewards.csv`, `config.toml`, and `checkpoint.bin` into the output
/// directory.
pub fn run_training(cfg: &ExperimentConfig) -> Result<TrainOutcome, HarnessError> {
    cfg.validate()?;
    let outdir = PathBuf::from(&cfg.output_dir);
    std::fs::create_dir_all(&outdir)?;
    std::fs::write(outdir.join("config.toml"), cfg.to_toml())?;

    let mut agents = build_agents(&cfg.sim, cfg.variant)?;
    let metrics_path = outdir.join("metrics.csv");
    let rewards_path = outdir.join("rewards.csv");
    let mut metrics_writer = MetricsWriter::create(&metrics_path)?;
    let mut rewards_file = std::io::BufWriter::new(std::fs::File::create(&rewards_path)?);
    writeln!(rewards_file, "{REWARDS_HEADER}")?;

    let started = Instant::now();
    let mut metrics = Vec::new();
    let mut episode_rewards = Vec::new();

    let evaluate = |agents: &[AgentNets],
                        episode: usize,
                        writer: &mut MetricsWriter,
                        rows: &mut Vec<MetricsRow>|
     -> Result<(), HarnessError> {
        let out = run_evaluation(agents, cfg, cfg.eval_episodes, episode as u64);
        let row = MetricsRow {
            episode,
            mean_user_reward: out.mean_user_reward,
            mean_uav_reward: out.mean_uav_reward,
            processed_mbits: out.processed_mbits,
            energy_violations: out.energy_violations,
            boundary_violations: out.boundary_violations,
            collision_violations: out.collision_violations,
            wallclock_s: started.elapsed().as_secs_f64(),
        };
        writer.append(&row)?;
        rows.push(row);
        Ok(())
    };

    evaluate(&agents, 0, &mut metrics_writer, &mut metrics)?;

    let num_agents = cfg.sim.num_users + cfg.sim.num_uavs;
    let mut buffer = RolloutBuffer::new(num_agents);
    let mut episode = 0usize;
    let mut update_index = 0u64;
    while episode < cfg.max_episodes {
        let block_end = (episode + cfg.episodes_per_update).min(cfg.max_episodes);
        let block = collect_block(cfg, &agents, episode..block_end);
        for data in block {
            for (global, transitions, done) in data.slots {
                buffer.push_slot(global, transitions, done);
            }
            writeln!(
                rewards_file,
                "{},{},{},{}",
                data.reward.episode, data.reward.mean_user, data.reward.mean_uav, data.reward.total
            )?;
            episode_rewards.push(data.reward);
        }
        update_phase(cfg, &mut agents, &buffer, update_index)?;
        update_index += 1;
        buffer.clear();

        for e in (episode + 1)..=block_end {
            if e % cfg.eval_every == 0 {
                evaluate(&agents, e, &mut metrics_writer, &mut metrics)?;
            }
        }
        episode = block_end;
    }
    if cfg.max_episodes > 0 && cfg.max_episodes % cfg.eval_every != 0 {
        evaluate(&agents, cfg.max_episodes, &mut metrics_writer, &mut metrics)?;
    }
    rewards_file.flush()?;

    let checkpoint_path = outdir.join("checkpoint.bin");
    save_checkpoint(&checkpoint_path, &agents, cfg.variant, &cfg.sim)?;

    Ok(TrainOutcome { metrics, episode_rewards, checkpoint_path, metrics_path, rewards_path })
}

/// Mean total episode reward and processed megabits of the uniform-random
/// policy, measured over dedicated baseline episodes.
#[derive(Clone, Copy, Debug)]
pub struct RandomBaseline {
    pub mean_total_reward: f64,
    pub mean_processed_mbits: f64,
}

pub fn measure_random_baseline(cfg: &ExperimentConfig, episodes: usize) -> RandomBaseline {
    use rand::RngExt;
    let sim = &cfg.sim;
    let mut total = 0.0;
    let mut processed = 0.0;
    for i in 0..episodes {
        let counter = BASELINE_COUNTER_BASE + i as u64;
        let mut env = McsEnv::reset(sim, sim.seed, counter);
        let mut rng = stream(sim.seed, StreamKind::Policy, counter);
        loop {
            let dims: Vec<usize> = (0..sim.num_users + sim.num_uavs)
                .map(|a| crate::pomdp::action_dim_for_agent(sim, a))
                .collect();
            let actions: Vec<Vec<f64>> = dims
                .iter()
                .map(|&d| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let step = env.step(&actions);
            total += step.rewards.iter().map(|r| r.total()).sum::<f64>();
            processed += step.eval.processed_bits / 1e6;
            if step.done {
                break;
            }
        }
    }
    let n = episodes.max(1) as f64;
    RandomBaseline { mean_total_reward: total / n, mean_processed_mbits: processed / n }
}

/// Parses a `rewards.csv` written by [`run_training`].
pub fn parse_rewards(path: &std::path::Path) -> Result<Vec<EpisodeReward>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(HarnessError::Sweep(format!("rewards.csv row {i}: bad column count")));
        }
        out.push(EpisodeReward {
            episode: f[0].parse().map_err(|_| HarnessError::Sweep("bad episode".into()))?,
            mean_user: f[1].parse().map_err(|_| HarnessError::Sweep("bad user".into()))?,
            mean_uav: f[2].parse().map_err(|_| HarnessError::Sweep("bad uav".into()))?,
            total: f[3].parse().map_err(|_| HarnessError::Sweep("bad total".into()))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg(dir: &str) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.sim.num_users = 2;
        cfg.sim.num_uavs = 1;
        cfg.sim.num_slots = 4;
        cfg.max_episodes = 8;
        cfg.episodes_per_update = 4;
        cfg.eval_every = 4;
        cfg.eval_episodes = 1;
        cfg.output_dir = std::env::temp_dir()
            .join(format!("skysense_train_{}_{dir}", std::process::id()))
            .display()
            .to_string();
        cfg
    }

    #[test]
    fn zero_episodes_emit_only_the_initial_row() {
        let mut cfg = tiny_cfg("zero");
        cfg.max_episodes = 0;
        let out = run_training(&cfg).unwrap();
        assert_eq!(out.metrics.len(), 1);
        assert_eq!(out.metrics[0].episode, 0);
        assert!(out.episode_rewards.is_empty());
        std::fs::remove_dir_all(&cfg.output_dir).unwrap();
    }

    #[test]
    fn short_run_produces_expected_series() {
        let cfg = tiny_cfg("short");
        let out = run_training(&cfg).unwrap();
        // Rows at 0, 4, 8.
        assert_eq!(out.metrics.len(), 3);
        assert_eq!(out.metrics[2].episode, 8);
        assert_eq!(out.episode_rewards.len(), 8);
        assert!(out.checkpoint_path.exists());
        let parsed = super::super::metrics::parse_metrics(&out.metrics_path).unwrap();
        assert_eq!(parsed.len(), 3);
        let rewards = parse_rewards(&out.rewards_path).unwrap();
        assert_eq!(rewards.len(), 8);
        std::fs::remove_dir_all(&cfg.output_dir).unwrap();
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut cfg_a = tiny_cfg("w1");
        cfg_a.workers = 1;
        let mut cfg_b = tiny_cfg("w3");
        cfg_b.workers = 3;
        let a = run_training(&cfg_a).unwrap();
        let b = run_training(&cfg_b).unwrap();
        for (ra, rb) in a.episode_rewards.iter().zip(&b.episode_rewards) {
            assert_eq!(ra.total.to_bits(), rb.total.to_bits());
        }
        for (ma, mb) in a.metrics.iter().zip(&b.metrics) {
            assert_eq!(ma.processed_mbits.to_bits(), mb.processed_mbits.to_bits());
        }
        std::fs::remove_dir_all(&cfg_a.output_dir).unwrap();
        std::fs::remove_dir_all(&cfg_b.output_dir).unwrap();
    }

    #[test]
    fn baseline_is_deterministic() {
        let cfg = tiny_cfg("baseline");
        let a = measure_random_baseline(&cfg, 3);
        let b = measure_random_baseline(&cfg, 3);
        assert_eq!(a.mean_total_reward.to_bits(), b.mean_total_reward.to_bits());
        assert!(a.mean_processed_mbits > 0.0);
    }
}
