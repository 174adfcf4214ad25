//! The standard gradient-verification suite: every differentiable component
//! against central finite differences over many random configurations.

use rand::RngExt;

use crate::happo::{ActorBatch, ActorLossModel, CriticLossModel, LogProbModel};
use crate::nn::{
    finite_difference_check, ActorNet, ActorVariant, CriticNet, GradCheckReport, KanLayerSpec,
    StackBuilder, StackLoss, FD_STEP,
};
use crate::rng::{stream, StreamKind};

/// One verified component family.
#[derive(Clone, Debug)]
pub struct FamilyResult {
    pub family: &'static str,
    pub draws: usize,
    pub report: GradCheckReport,
}

impl FamilyResult {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.report.passed(tolerance)
    }
}

fn conv_family(draws: usize, seed: u64) -> GradCheckReport {
    let mut merged = GradCheckReport::default();
    for d in 0..draws {
        let mut rng = stream(seed, StreamKind::ParamInit, d as u64);
        let in_len = rng.random_range(7..14usize);
        let out_ch = rng.random_range(1..4usize);
        let kernel = rng.random_range(2..4usize);
        let stride = rng.random_range(1..3usize);
        let (stack, ps) = StackBuilder::new(in_len, &mut rng)
            .conv1d(out_ch, kernel, stride, 1.0)
            .unwrap()
            .tanh()
            .conv1d(2, 2, 1, 1.0)
            .unwrap()
            .finish();
        let mut model = StackLoss::new(stack, ps, &mut rng);
        merged.merge(finite_difference_check(&mut model, FD_STEP));
    }
    merged
}

fn kan_family(draws: usize, seed: u64) -> GradCheckReport {
    let mut merged = GradCheckReport::default();
    for d in 0..draws {
        let mut rng = stream(seed, StreamKind::ParamInit, 1000 + d as u64);
        let in_dim = rng.random_range(2..6usize);
        let hidden = rng.random_range(2..5usize);
        let out = rng.random_range(1..4usize);
        let spec = KanLayerSpec {
            grid_size: rng.random_range(3..7usize),
            spline_order: rng.random_range(1..4usize),
            grid_range: 2.0,
        };
        let (stack, ps) = StackBuilder::new(in_dim, &mut rng)
            .kan(hidden, &spec, 1.0)
            .unwrap()
            .kan(out, &spec, 1.0)
            .unwrap()
            .finish();
        let mut model = StackLoss::new(stack, ps, &mut rng);
        merged.merge(finite_difference_check(&mut model, FD_STEP));
    }
    merged
}

fn critic_mlp_family(draws: usize, seed: u64) -> GradCheckReport {
    let mut merged = GradCheckReport::default();
    for d in 0..draws {
        let mut rng = stream(seed, StreamKind::ParamInit, 2000 + d as u64);
        let in_len = rng.random_range(4..10usize);
        let w = rng.random_range(4..9usize);
        let critic = CriticNet::build_with_hidden(in_len, &[w, w], &mut rng).unwrap();
        let samples = rng.random_range(2..6usize);
        let states: Vec<Vec<f64>> = (0..samples)
            .map(|_| (0..in_len).map(|_| rng.random_range(-1.5..1.5)).collect())
            .collect();
        let targets: Vec<f64> = (0..samples).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut model = CriticLossModel { critic, states, targets };
        merged.merge(finite_difference_check(&mut model, FD_STEP));
    }
    merged
}

fn log_prob_family(draws: usize, seed: u64) -> GradCheckReport {
    let mut merged = GradCheckReport::default();
    for d in 0..draws {
        let mut rng = stream(seed, StreamKind::ParamInit, 3000 + d as u64);
        let dim = rng.random_range(1..6usize);
        let mean: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let log_std: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..0.5)).collect();
        let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut model = LogProbModel::new(mean, log_std, u);
        merged.merge(finite_difference_check(&mut model, FD_STEP));
    }
    merged
}

/// Builds an actor-loss model whose samples stay clear of the clip kinks so
/// the finite differences see a locally smooth objective.
fn actor_loss_model(seed: u64, d: u64, eps: f64) -> ActorLossModel {
    let mut rng = stream(seed, StreamKind::ParamInit, 4000 + d);
    let obs_len = rng.random_range(4..8usize);
    let act_dim = rng.random_range(1..4usize);
    let actor = ActorNet::build_with_width(ActorVariant::Mlp, obs_len, act_dim, 6, &mut rng)
        .unwrap();
    let mut behavior = actor.clone();
    for e in behavior.params.entries_mut() {
        for v in &mut e.value {
            *v += rng.random_range(-2e-3..2e-3);
        }
    }
    let mut batch = ActorBatch::default();
    let mut attempts = 0;
    while batch.len() < 8 && attempts < 256 {
        attempts += 1;
        let obs: Vec<f64> = (0..obs_len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let eval = behavior.forward(&obs);
        let sampled = behavior.sample(&eval, &mut rng);
        let new_eval = actor.forward(&obs);
        let (lp_new, _) = actor.log_prob_entropy(&new_eval, &sampled.pre_squash);
        let ratio = (lp_new - sampled.log_prob).exp();
        // Skip samples within finite-difference reach of a clip kink.
        if (ratio - (1.0 - eps)).abs() < 1e-3 || (ratio - (1.0 + eps)).abs() < 1e-3 {
            continue;
        }
        batch.obs.push(obs);
        batch.pre_squash.push(sampled.pre_squash);
        batch.log_prob_old.push(sampled.log_prob);
        batch.weights.push(rng.random_range(-2.0..2.0));
    }
    ActorLossModel { actor, batch, eps, psi: 0.01 }
}

fn actor_loss_family(draws: usize, seed: u64) -> GradCheckReport {
    let mut merged = GradCheckReport::default();
    for d in 0..draws {
        let mut model = actor_loss_model(seed, d as u64, 0.2);
        merged.merge(finite_difference_check(&mut model, FD_STEP));
    }
    merged
}

fn critic_loss_family(draws: usize, seed: u64) -> GradCheckReport {
    // Same loss as the critic MLP family but exercised through a one-hidden
    // layer net with larger targets, matching the regression path used in
    // training.
    let mut merged = GradCheckReport::default();
    for d in 0..draws {
        let mut rng = stream(seed, StreamKind::ParamInit, 5000 + d as u64);
        let in_len = rng.random_range(6..12usize);
        let critic = CriticNet::build_with_hidden(in_len, &[8], &mut rng).unwrap();
        let samples = rng.random_range(3..9usize);
        let states: Vec<Vec<f64>> = (0..samples)
            .map(|_| (0..in_len).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let targets: Vec<f64> = (0..samples).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mut model = CriticLossModel { critic, states, targets };
        merged.merge(finite_difference_check(&mut model, FD_STEP));
    }
    merged
}

/// Runs every family with `draws` random configurations each.
pub fn standard_gradient_checks(draws: usize, seed: u64) -> Vec<FamilyResult> {
    let families: [(&'static str, fn(usize, u64) -> GradCheckReport); 6] = [
        ("conv1d", conv_family),
        ("kan", kan_family),
        ("critic_mlp", critic_mlp_family),
        ("gaussian_log_prob", log_prob_family),
        ("actor_loss", actor_loss_family),
        ("critic_loss", critic_loss_family),
    ];
    families
        .iter()
        .map(|(name, f)| FamilyResult { family: name, draws, report: f(draws, seed) })
        .collect()
}
