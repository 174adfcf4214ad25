//! Actor and critic networks with a tanh-squashed diagonal Gaussian head.
//!
//! The actor's stack produces a pre-squash mean; actions emitted to the
//! environment are `tanh` of the sampled pre-squash vector, so every entry
//! lies in (-1, 1). Log-densities carry the exact change-of-variables
//! correction, evaluated at the stored pre-squash sample. The log-std is a
//! state-independent learnable vector, clamped to a fixed range at use.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::layers::{Stack, StackBuilder, Trace};
use super::params::{NnError, ParamId, ParameterSet};
use super::spline::KanLayerSpec;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 1.0;
pub const LOG_STD_INIT: f64 = -0.5;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

/// Actor architecture selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActorVariant {
    /// Conv feature extractor followed by spline-activated layers.
    Ckan,
    /// Same conv extractor with a dense head (spline layers removed).
    Cnn,
    /// Dense network only.
    Mlp,
}

impl ActorVariant {
    pub const ALL: [ActorVariant; 3] = [ActorVariant::Ckan, ActorVariant::Cnn, ActorVariant::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            ActorVariant::Ckan => "ckan",
            ActorVariant::Cnn => "cnn",
            ActorVariant::Mlp => "mlp",
        }
    }
}

impl std::str::FromStr for ActorVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ckan" => Ok(ActorVariant::Ckan),
            "cnn" => Ok(ActorVariant::Cnn),
            "mlp" => Ok(ActorVariant::Mlp),
            other => Err(format!("unknown actor variant `{other}` (ckan|cnn|mlp)")),
        }
    }
}

/// Policy network of one agent.
#[derive(Clone, Debug)]
pub struct ActorNet {
    pub variant: ActorVariant,
    pub stack: Stack,
    pub params: ParameterSet,
    pub log_std: ParamId,
    pub obs_len: usize,
    pub out_dim: usize,
}

/// Forward-pass record: the stack trace plus the head outputs.
#[derive(Clone, Debug)]
pub struct ActorEval {
    pub trace: Trace,
    /// Pre-squash Gaussian mean (the stack output).
    pub mean_pre: Vec<f64>,
    /// Clamped log standard deviations.
    pub log_std: Vec<f64>,
}

/// One sampled action.
#[derive(Clone, Debug)]
pub struct SampledAction {
    /// Pre-squash Gaussian sample (stored in rollout buffers).
    pub pre_squash: Vec<f64>,
    /// Squashed action in (-1, 1)^d (fed to the environment).
    pub squashed: Vec<f64>,
    /// Log-density of the squashed action.
    pub log_prob: f64,
}

impl ActorNet {
    /// Builds an actor for the given observation and action sizes.
    ///
    /// Default topologies: the conv extractor is conv(1→8, k3, s1) → tanh →
    /// conv(8→8, k3, s2) → tanh; spline or dense heads map the flattened
    /// features through a 64-wide hidden layer to the action dimension.
    pub fn build(
        variant: ActorVariant,
        obs_len: usize,
        out_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<ActorNet, NnError> {
        Self::build_with_width(variant, obs_len, out_dim, 64, rng)
    }

    /// `build` with a custom hidden width (small widths keep the
    /// finite-difference harness fast).
    pub fn build_with_width(
        variant: ActorVariant,
        obs_len: usize,
        out_dim: usize,
        width: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<ActorNet, NnError> {
        let spec = KanLayerSpec::default();
        let (stack, mut params) = match variant {
            ActorVariant::Ckan => StackBuilder::new(obs_len, rng)
                .conv1d(8, 3, 1, 1.0)?
                .tanh()
                .conv1d(8, 3, 2, 1.0)?
                .tanh()
                .kan(width, &spec, 1.0)?
                .kan(out_dim, &spec, 0.1)?
                .finish(),
            ActorVariant::Cnn => StackBuilder::new(obs_len, rng)
                .conv1d(8, 3, 1, 1.0)?
                .tanh()
                .conv1d(8, 3, 2, 1.0)?
                .tanh()
                .linear(width, 1.0)?
                .tanh()
                .linear(out_dim, 0.01)?
                .finish(),
            ActorVariant::Mlp => StackBuilder::new(obs_len, rng)
                .linear(width, 1.0)?
                .tanh()
                .linear(width, 1.0)?
                .tanh()
                .linear(out_dim, 0.01)?
                .finish(),
        };
        let log_std = params.add("head.log_std", vec![out_dim], vec![LOG_STD_INIT; out_dim])?;
        Ok(ActorNet { variant, stack, params, log_std, obs_len, out_dim })
    }

    pub fn forward(&self, obs: &[f64]) -> ActorEval {
        let trace = self.stack.forward(&self.params, obs);
        let mean_pre = trace.output().to_vec();
        let log_std = self
            .params
            .value(self.log_std)
            .iter()
            .map(|s| s.clamp(LOG_STD_MIN, LOG_STD_MAX))
            .collect();
        ActorEval { trace, mean_pre, log_std }
    }

    /// Deterministic policy output: the squashed mean, every entry in
    /// [-1, 1].
    pub fn mean_action(&self, obs: &[f64]) -> Vec<f64> {
        self.forward(obs).mean_pre.iter().map(|m| m.tanh()).collect()
    }

    /// Samples an action and reports its squashed log-density.
    pub fn sample(&self, eval: &ActorEval, rng: &mut ChaCha8Rng) -> SampledAction {
        let pre_squash: Vec<f64> = eval
            .mean_pre
            .iter()
            .zip(&eval.log_std)
            .map(|(m, s)| {
                let z: f64 = rng.sample(StandardNormal);
                m + s.exp() * z
            })
            .collect();
        let squashed = pre_squash.iter().map(|u| u.tanh()).collect();
        let log_prob = squashed_log_prob(&eval.mean_pre, &eval.log_std, &pre_squash);
        SampledAction { pre_squash, squashed, log_prob }
    }

    /// Log-density and entropy of a stored pre-squash action under the
    /// current parameters.
    pub fn log_prob_entropy(&self, eval: &ActorEval, pre_squash: &[f64]) -> (f64, f64) {
        (
            squashed_log_prob(&eval.mean_pre, &eval.log_std, pre_squash),
            gaussian_entropy(&eval.log_std),
        )
    }

    /// Backpropagates head gradients: `d_mean` through the stack and
    /// `d_log_std` into the log-std vector (masked where the clamp binds).
    pub fn backward(&mut self, eval: &ActorEval, d_mean: Vec<f64>, d_log_std: &[f64]) {
        {
            let raw = self.params.value(self.log_std).to_vec();
            let grad = &mut self.params.entry_mut(self.log_std).grad;
            for ((g, d), r) in grad.iter_mut().zip(d_log_std).zip(&raw) {
                if (LOG_STD_MIN..LOG_STD_MAX).contains(r) {
                    *g += d;
                }
            }
        }
        self.stack.backward(&mut self.params, &eval.trace, d_mean);
    }
}

/// Log-density of the pre-squash Gaussian at `u`.
pub fn gaussian_log_density(mean: &[f64], log_std: &[f64], u: &[f64]) -> f64 {
    let mut lp = 0.0;
    for i in 0..mean.len() {
        let inv_std = (-log_std[i]).exp();
        let z = (u[i] - mean[i]) * inv_std;
        lp += -HALF_LN_TWO_PI - log_std[i] - 0.5 * z * z;
    }
    lp
}

/// `Σ log(1 - tanh²(u))`, the squashing Jacobian, in the numerically stable
/// form `2·(ln 2 - u - softplus(-2u))`.
pub fn squash_correction(u: &[f64]) -> f64 {
    u.iter()
        .map(|&ui| 2.0 * (std::f64::consts::LN_2 - ui - (-2.0 * ui).exp().ln_1p()))
        .sum()
}

/// Log-density of the squashed action `tanh(u)`.
pub fn squashed_log_prob(mean: &[f64], log_std: &[f64], u: &[f64]) -> f64 {
    gaussian_log_density(mean, log_std, u) - squash_correction(u)
}

/// Entropy of the pre-squash Gaussian (used for the exploration bonus).
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|s| 0.5 + HALF_LN_TWO_PI + s).sum()
}

/// Gradients of [`squashed_log_prob`] w.r.t. the mean and log-std.
///
/// The Jacobian correction depends only on `u`, so it vanishes here.
pub fn log_prob_grads(mean: &[f64], log_std: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut d_mean = vec![0.0; mean.len()];
    let mut d_log_std = vec![0.0; mean.len()];
    for i in 0..mean.len() {
        let inv_var = (-2.0 * log_std[i]).exp();
        let diff = u[i] - mean[i];
        d_mean[i] = diff * inv_var;
        d_log_std[i] = -1.0 + diff * diff * inv_var;
    }
    (d_mean, d_log_std)
}

/// Centralized value network: a dense stack ending in one scalar.
#[derive(Clone, Debug)]
pub struct CriticNet {
    pub stack: Stack,
    pub params: ParameterSet,
    pub in_len: usize,
}

impl CriticNet {
    /// Default topology: two tanh layers of width 128 and a linear head.
    pub fn build(in_len: usize, rng: &mut ChaCha8Rng) -> Result<CriticNet, NnError> {
        Self::build_with_hidden(in_len, &[128, 128], rng)
    }

    pub fn build_with_hidden(
        in_len: usize,
        hidden: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> Result<CriticNet, NnError> {
        let mut b = StackBuilder::new(in_len, rng);
        for &w in hidden {
            b = b.linear(w, 1.0)?.tanh();
        }
        let (stack, params) = b.linear(1, 1.0)?.finish();
        Ok(CriticNet { stack, params, in_len })
    }

    pub fn forward(&self, state: &[f64]) -> (Trace, f64) {
        let trace = self.stack.forward(&self.params, state);
        let v = trace.output()[0];
        (trace, v)
    }

    pub fn value(&self, state: &[f64]) -> f64 {
        self.forward(state).1
    }

    pub fn backward(&mut self, trace: &Trace, d_value: f64) {
        self.stack.backward(&mut self.params, trace, vec![d_value]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamKind};

    fn rng(counter: u64) -> ChaCha8Rng {
        stream(77, StreamKind::ParamInit, counter)
    }

    #[test]
    fn fresh_actor_log_std_is_the_init_value() {
        for variant in ActorVariant::ALL {
            let mut r = rng(0);
            let net = ActorNet::build(variant, 11, 4, &mut r).unwrap();
            let eval = net.forward(&vec![0.1; 11]);
            assert!(eval.log_std.iter().all(|&s| s == LOG_STD_INIT));
        }
    }

    #[test]
    fn mean_actions_respect_the_squash_bound() {
        let mut r = rng(1);
        let net = ActorNet::build(ActorVariant::Ckan, 11, 4, &mut r).unwrap();
        let mut xr = rng(2);
        for _ in 0..10_000 {
            let obs: Vec<f64> = (0..11).map(|_| xr.random_range(-3.0..3.0)).collect();
            for a in net.mean_action(&obs) {
                assert!((-1.0..=1.0).contains(&a));
            }
        }
    }

    #[test]
    fn standard_normal_log_density_at_the_mode() {
        let lp = gaussian_log_density(&[0.0], &[0.0], &[0.0]);
        assert!((lp + HALF_LN_TWO_PI).abs() < 1e-15);
    }

    #[test]
    fn entropy_closed_form() {
        // d dims at log_std 0: d · ½ ln(2πe).
        let h = gaussian_entropy(&[0.0; 3]);
        let expected = 3.0 * 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        assert!((h - expected).abs() < 1e-12);
    }

    #[test]
    fn squashed_density_integrates_to_one() {
        // Trapezoid quadrature of exp(log_prob) over the squashed support.
        for (mean, log_std) in [(0.0, -0.5), (0.8, -1.0), (-1.2, -0.3)] {
            let n = 400_000;
            let lo = -1.0 + 1e-9;
            let hi = 1.0 - 1e-9;
            let dx = (hi - lo) / n as f64;
            let mut integral = 0.0;
            for i in 0..=n {
                let a: f64 = lo + i as f64 * dx;
                let u = a.atanh();
                let p = squashed_log_prob(&[mean], &[log_std], &[u]).exp();
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                integral += w * p * dx;
            }
            assert!(
                (integral - 1.0).abs() < 1e-4,
                "mean {mean}, log_std {log_std}: integral {integral}"
            );
        }
    }

    #[test]
    fn sampled_actions_are_consistent() {
        let mut r = rng(3);
        let net = ActorNet::build(ActorVariant::Mlp, 7, 3, &mut r).unwrap();
        let eval = net.forward(&vec![0.2; 7]);
        let mut pr = rng(4);
        for _ in 0..100 {
            let s = net.sample(&eval, &mut pr);
            for (a, u) in s.squashed.iter().zip(&s.pre_squash) {
                assert_eq!(*a, u.tanh());
                assert!((-1.0..=1.0).contains(a));
            }
            let (lp, _) = net.log_prob_entropy(&eval, &s.pre_squash);
            assert!((lp - s.log_prob).abs() < 1e-12);
        }
    }

    #[test]
    fn actor_head_dims_match_agent_action_layout() {
        use crate::pomdp::{uav_action_dim, user_action_dim};
        let cfg = crate::SimConfig { num_users: 20, num_uavs: 5, ..crate::SimConfig::full_scale() };
        // User agents: 2 + U; UAV agents: 3 + 2K.
        assert_eq!(user_action_dim(&cfg), 7);
        assert_eq!(uav_action_dim(&cfg), 43);
        let mut r = rng(5);
        let user = ActorNet::build(ActorVariant::Ckan, 20, user_action_dim(&cfg), &mut r).unwrap();
        assert_eq!(user.out_dim, 7);
        let uav = ActorNet::build(ActorVariant::Ckan, 76, uav_action_dim(&cfg), &mut r).unwrap();
        assert_eq!(uav.stack.out_len(), 43);
    }

    #[test]
    fn critic_zero_weights_returns_bias() {
        let mut r = rng(6);
        let mut net = CriticNet::build(10, &mut r).unwrap();
        for e in net.params.entries_mut() {
            e.value.fill(0.0);
        }
        let id = net.params.by_name("lin4.b").unwrap();
        net.params.entry_mut(id).value[0] = 0.75;
        assert_eq!(net.value(&vec![0.3; 10]), 0.75);
    }

    #[test]
    fn critic_matches_hand_computed_two_layer_net() {
        // 2 → 2 → 1 dense net with tanh between, evaluated by hand.
        let mut r = rng(7);
        let (stack, mut ps) = StackBuilder::new(2, &mut r)
            .linear(2, 1.0)
            .unwrap()
            .tanh()
            .linear(1, 1.0)
            .unwrap()
            .finish();
        let w0 = ps.by_name("lin0.w").unwrap();
        ps.entry_mut(w0).value.copy_from_slice(&[0.5, -1.0, 2.0, 0.25]);
        let b0 = ps.by_name("lin0.b").unwrap();
        ps.entry_mut(b0).value.copy_from_slice(&[0.1, -0.2]);
        let w2 = ps.by_name("lin2.w").unwrap();
        ps.entry_mut(w2).value.copy_from_slice(&[1.5, -0.5]);
        let b2 = ps.by_name("lin2.b").unwrap();
        ps.entry_mut(b2).value[0] = 0.05;
        let x = [0.3, 0.7];
        let h0 = (0.5f64 * 0.3 - 1.0 * 0.7 + 0.1).tanh();
        let h1 = (2.0f64 * 0.3 + 0.25 * 0.7 - 0.2).tanh();
        let expected = 1.5 * h0 - 0.5 * h1 + 0.05;
        let t = stack.forward(&ps, &x);
        assert!((t.output()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn critic_value_finite_for_bounded_inputs() {
        let mut r = rng(8);
        let net = CriticNet::build(16, &mut r).unwrap();
        let mut xr = rng(9);
        for _ in 0..200 {
            let x: Vec<f64> = (0..16).map(|_| xr.random_range(-5.0..5.0)).collect();
            assert!(net.value(&x).is_finite());
        }
    }
}
