//! Clipped surrogate actor loss, critic regression, and their gradients.

use crate::nn::{
    log_prob_grads, squashed_log_prob, ActorNet, CriticNet, LossModel, ParameterSet,
};

/// Minibatch view of one agent's transitions with the cascade weights
/// aligned sample-by-sample.
#[derive(Clone, Debug, Default)]
pub struct ActorBatch {
    pub obs: Vec<Vec<f64>>,
    pub pre_squash: Vec<Vec<f64>>,
    pub log_prob_old: Vec<f64>,
    /// Cascade-weighted advantages M for each sample.
    pub weights: Vec<f64>,
}

impl ActorBatch {
    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }
}

/// Diagnostics from one actor loss evaluation.
#[derive(Clone, Copy, Debug, Default)]
pub struct ActorLossStats {
    pub loss: f64,
    pub mean_ratio: f64,
    /// Fraction of samples whose ratio left the clip band.
    pub clip_fraction: f64,
    pub entropy: f64,
}

/// Evaluates the clipped surrogate objective
/// `-E[min(ρ·M, clip(ρ, 1±ε)·M) + ψ·S]` over the batch and accumulates its
/// gradients into the actor's parameter set (which is zeroed first).
pub fn actor_loss(actor: &mut ActorNet, batch: &ActorBatch, eps: f64, psi: f64) -> ActorLossStats {
    assert!(!batch.is_empty(), "actor batch must be non-empty");
    let n = batch.len() as f64;
    actor.params.zero_grads();

    let mut stats = ActorLossStats::default();
    for t in 0..batch.len() {
        let eval = actor.forward(&batch.obs[t]);
        let (lp, entropy) = actor.log_prob_entropy(&eval, &batch.pre_squash[t]);
        let ratio = (lp - batch.log_prob_old[t]).exp();
        let m = batch.weights[t];
        let unclipped = ratio * m;
        let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * m;
        let surrogate = unclipped.min(clipped);
        stats.loss += -(surrogate + psi * entropy) / n;
        stats.mean_ratio += ratio / n;
        stats.entropy += entropy / n;
        if (ratio - 1.0).abs() > eps {
            stats.clip_fraction += 1.0 / n;
        }

        // d surrogate / d logπ: the unclipped branch contributes ρ·M when it
        // attains the min; inside the band both branches agree; outside, the
        // clipped branch is constant.
        let d_surr_d_lp = if unclipped <= clipped { unclipped } else { 0.0 };
        let d_lp = -d_surr_d_lp / n;
        let (mut d_mean, mut d_log_std) =
            log_prob_grads(&eval.mean_pre, &eval.log_std, &batch.pre_squash[t]);
        for v in &mut d_mean {
            *v *= d_lp;
        }
        for v in &mut d_log_std {
            // Entropy depends on log-std alone with unit derivative.
            *v = *v * d_lp - psi / n;
        }
        actor.backward(&eval, d_mean, &d_log_std);
    }
    stats
}

/// Forward-only actor loss (used by the finite-difference harness).
pub fn actor_loss_value(actor: &ActorNet, batch: &ActorBatch, eps: f64, psi: f64) -> f64 {
    let n = batch.len() as f64;
    let mut loss = 0.0;
    for t in 0..batch.len() {
        let eval = actor.forward(&batch.obs[t]);
        let (lp, entropy) = actor.log_prob_entropy(&eval, &batch.pre_squash[t]);
        let ratio = (lp - batch.log_prob_old[t]).exp();
        let m = batch.weights[t];
        let surrogate = (ratio * m).min(ratio.clamp(1.0 - eps, 1.0 + eps) * m);
        loss += -(surrogate + psi * entropy) / n;
    }
    loss
}

/// New-to-behavior policy ratios of a batch under the actor's current
/// parameters (the cascade update after an agent's steps).
pub fn policy_ratios(actor: &ActorNet, batch: &ActorBatch) -> Vec<f64> {
    (0..batch.len())
        .map(|t| {
            let eval = actor.forward(&batch.obs[t]);
            let lp = squashed_log_prob(&eval.mean_pre, &eval.log_std, &batch.pre_squash[t]);
            (lp - batch.log_prob_old[t]).exp()
        })
        .collect()
}

/// Half mean squared error between the critic's predictions and the value
/// targets; gradients accumulate into the critic's parameter set (zeroed
/// first).
pub fn critic_loss(critic: &mut CriticNet, states: &[Vec<f64>], targets: &[f64]) -> f64 {
    assert_eq!(states.len(), targets.len(), "states/targets length");
    assert!(!states.is_empty(), "critic batch must be non-empty");
    let n = states.len() as f64;
    critic.params.zero_grads();
    let mut loss = 0.0;
    for (state, &target) in states.iter().zip(targets) {
        let (trace, v) = critic.forward(state);
        loss += 0.5 * (target - v) * (target - v) / n;
        critic.backward(&trace, (v - target) / n);
    }
    loss
}

/// Forward-only critic loss.
pub fn critic_loss_value(critic: &CriticNet, states: &[Vec<f64>], targets: &[f64]) -> f64 {
    let n = states.len() as f64;
    states
        .iter()
        .zip(targets)
        .map(|(s, &y)| {
            let v = critic.value(s);
            0.5 * (y - v) * (y - v) / n
        })
        .sum()
}

/// Finite-difference wrapper around the full actor loss.
pub struct ActorLossModel {
    pub actor: ActorNet,
    pub batch: ActorBatch,
    pub eps: f64,
    pub psi: f64,
}

impl LossModel for ActorLossModel {
    fn params(&self) -> &ParameterSet {
        &self.actor.params
    }

    fn params_mut(&mut self) -> &mut ParameterSet {
        &mut self.actor.params
    }

    fn loss_and_grad(&mut self) -> f64 {
        actor_loss(&mut self.actor, &self.batch, self.eps, self.psi).loss
    }

    fn loss(&self) -> f64 {
        actor_loss_value(&self.actor, &self.batch, self.eps, self.psi)
    }
}

/// Finite-difference wrapper around the critic loss.
pub struct CriticLossModel {
    pub critic: CriticNet,
    pub states: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl LossModel for CriticLossModel {
    fn params(&self) -> &ParameterSet {
        &self.critic.params
    }

    fn params_mut(&mut self) -> &mut ParameterSet {
        &mut self.critic.params
    }

    fn loss_and_grad(&mut self) -> f64 {
        critic_loss(&mut self.critic, &self.states, &self.targets)
    }

    fn loss(&self) -> f64 {
        critic_loss_value(&self.critic, &self.states, &self.targets)
    }
}

/// Finite-difference wrapper around the squashed Gaussian log-density, with
/// the mean and log-std as free parameters.
pub struct LogProbModel {
    pub params: ParameterSet,
    pub pre_squash: Vec<f64>,
}

impl LogProbModel {
    pub fn new(mean: Vec<f64>, log_std: Vec<f64>, pre_squash: Vec<f64>) -> LogProbModel {
        let mut params = ParameterSet::new();
        let d = mean.len();
        params.add("mean", vec![d], mean).unwrap();
        params.add("log_std", vec![d], log_std).unwrap();
        LogProbModel { params, pre_squash }
    }
}

impl LossModel for LogProbModel {
    fn params(&self) -> &ParameterSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParameterSet {
        &mut self.params
    }

    fn loss_and_grad(&mut self) -> f64 {
        self.params.zero_grads();
        let mean = self.params.value(self.params.by_name("mean").unwrap()).to_vec();
        let log_std = self.params.value(self.params.by_name("log_std").unwrap()).to_vec();
        let (d_mean, d_log_std) = log_prob_grads(&mean, &log_std, &self.pre_squash);
        let mean_id = self.params.by_name("mean").unwrap();
        self.params.entry_mut(mean_id).grad.copy_from_slice(&d_mean);
        let ls_id = self.params.by_name("log_std").unwrap();
        self.params.entry_mut(ls_id).grad.copy_from_slice(&d_log_std);
        squashed_log_prob(&mean, &log_std, &self.pre_squash)
    }

    fn loss(&self) -> f64 {
        let mean = self.params.value(self.params.by_name("mean").unwrap());
        let log_std = self.params.value(self.params.by_name("log_std").unwrap());
        squashed_log_prob(mean, log_std, &self.pre_squash)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{finite_difference_check, ActorVariant, FD_STEP};
    use crate::rng::{stream, StreamKind};
    use rand::RngExt;

    fn tiny_actor(counter: u64) -> ActorNet {
        let mut r = stream(101, StreamKind::ParamInit, counter);
        ActorNet::build(ActorVariant::Mlp, 6, 3, &mut r).unwrap()
    }

    fn batch_for(actor: &ActorNet, counter: u64, samples: usize) -> ActorBatch {
        let mut r = stream(103, StreamKind::Policy, counter);
        let mut batch = ActorBatch::default();
        for _ in 0..samples {
            let obs: Vec<f64> = (0..actor.obs_len).map(|_| r.random_range(-1.0..1.0)).collect();
            let eval = actor.forward(&obs);
            let s = actor.sample(&eval, &mut r);
            batch.obs.push(obs);
            batch.pre_squash.push(s.pre_squash);
            batch.log_prob_old.push(s.log_prob);
            batch.weights.push(r.random_range(-2.0..2.0));
        }
        batch
    }

    #[test]
    fn identity_parameters_give_unit_ratios_and_mean_weight() {
        let mut actor = tiny_actor(0);
        let batch = batch_for(&actor, 0, 16);
        let stats = actor_loss(&mut actor, &batch, 0.2, 0.0);
        assert!((stats.mean_ratio - 1.0).abs() < 1e-12);
        assert_eq!(stats.clip_fraction, 0.0);
        let mean_weight = batch.weights.iter().sum::<f64>() / batch.len() as f64;
        assert!((stats.loss + mean_weight).abs() < 1e-12, "surrogate reduces to E[M]");
    }

    #[test]
    fn clip_arithmetic_selects_the_bounded_branch() {
        // ρ = 2, ε = 0.2, M > 0 → surrogate = 1.2·M.
        let ratio: f64 = 2.0;
        let m = 1.5;
        let surr = (ratio * m).min(ratio.clamp(0.8, 1.2) * m);
        assert_eq!(surr, 1.2 * m);
    }

    #[test]
    fn actor_loss_gradient_matches_finite_differences() {
        let actor = tiny_actor(1);
        // Perturb the behavior slightly so ratios are not exactly 1.
        let mut behavior = actor.clone();
        for e in behavior.params.entries_mut() {
            for v in &mut e.value {
                *v += 1e-3;
            }
        }
        let batch = batch_for(&behavior, 1, 8);
        let mut model = ActorLossModel { actor, batch, eps: 0.2, psi: 0.01 };
        let report = finite_difference_check(&mut model, FD_STEP);
        assert!(report.passed(1e-4), "max err {}", report.max_rel_err());
    }

    #[test]
    fn critic_best_constant_prediction() {
        // Targets {0, 2}: a constant predictor is best at 1 with loss 0.5.
        let mut r = stream(105, StreamKind::ParamInit, 0);
        let mut critic = CriticNet::build(3, &mut r).unwrap();
        for e in critic.params.entries_mut() {
            e.value.fill(0.0);
        }
        let bias = critic.params.by_name("lin4.b").unwrap();
        critic.params.entry_mut(bias).value[0] = 1.0;
        let states = vec![vec![0.2, 0.4, -0.1], vec![-0.3, 0.9, 0.5]];
        let loss = critic_loss_value(&critic, &states, &[0.0, 2.0]);
        assert!((loss - 0.5).abs() < 1e-12);
        // Perfect predictions give zero loss.
        let v0 = critic.value(&states[0]);
        let v1 = critic.value(&states[1]);
        let loss = critic_loss_value(&critic, &states, &[v0, v1]);
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn critic_gradient_matches_finite_differences() {
        let mut r = stream(107, StreamKind::ParamInit, 0);
        let critic = CriticNet::build(5, &mut r).unwrap();
        let mut xr = stream(107, StreamKind::Policy, 1);
        let states: Vec<Vec<f64>> =
            (0..6).map(|_| (0..5).map(|_| xr.random_range(-1.0..1.0)).collect()).collect();
        let targets: Vec<f64> = (0..6).map(|_| xr.random_range(-2.0..2.0)).collect();
        let mut model = CriticLossModel { critic, states, targets };
        let report = finite_difference_check(&mut model, FD_STEP);
        assert!(report.passed(1e-4), "max err {}", report.max_rel_err());
    }

    #[test]
    fn log_prob_gradient_matches_finite_differences() {
        let mut r = stream(109, StreamKind::Policy, 2);
        for _ in 0..20 {
            let d = r.random_range(1..5usize);
            let mean: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
            let log_std: Vec<f64> = (0..d).map(|_| r.random_range(-1.5..0.5)).collect();
            let u: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
            let mut model = LogProbModel::new(mean, log_std, u);
            let report = finite_difference_check(&mut model, FD_STEP);
            assert!(report.passed(1e-6), "max err {}", report.max_rel_err());
        }
    }

    #[test]
    fn surrogate_never_exceeds_the_max_branch() {
        let mut r = stream(111, StreamKind::Policy, 3);
        for _ in 0..10_000 {
            let ratio: f64 = r.random_range(0.0..3.0);
            let m: f64 = r.random_range(-2.0..2.0);
            let eps = 0.2;
            let unclipped = ratio * m;
            let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * m;
            let surr = unclipped.min(clipped);
            assert!(surr <= unclipped.max(clipped));
        }
    }
}
