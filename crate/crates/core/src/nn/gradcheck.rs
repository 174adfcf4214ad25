//! Central finite-difference verification of analytic gradients.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;

use super::layers::Stack;
use super::params::ParameterSet;

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// A scalar loss with analytic gradients, checkable against finite
/// differences. `loss_and_grad` must leave the gradient of every parameter
/// in the set's gradient slots; `loss` must not mutate parameters.
pub trait LossModel {
    fn params(&self) -> &ParameterSet;
    fn params_mut(&mut self) -> &mut ParameterSet;
    /// Zeroes gradients, runs forward and backward, returns the loss.
    fn loss_and_grad(&mut self) -> f64;
    /// Forward pass only.
    fn loss(&self) -> f64;
}

/// Worst relative error per parameter block.
#[derive(Clone, Debug)]
pub struct BlockReport {
    pub name: String,
    pub max_rel_err: f64,
    pub scalars: usize,
}

#[derive(Clone, Debug, Default)]
pub struct GradCheckReport {
    pub blocks: Vec<BlockReport>,
}

impl GradCheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_rel_err).fold(0.0, f64::max)
    }

    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_rel_err() <= tolerance
    }

    pub fn merge(&mut self, other: GradCheckReport) {
        for b in other.blocks {
            match self.blocks.iter_mut().find(|mine| mine.name == b.name) {
                Some(mine) => {
                    mine.max_rel_err = mine.max_rel_err.max(b.max_rel_err);
                    mine.scalars = mine.scalars.max(b.scalars);
                }
                None => self.blocks.push(b),
            }
        }
    }
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Compares every analytic parameter gradient of `model` against central
/// finite differences with step `h`.
pub fn finite_difference_check(model: &mut dyn LossModel, h: f64) -> GradCheckReport {
    model.loss_and_grad();
    let analytic: Vec<Vec<f64>> = model.params().entries().map(|e| e.grad.clone()).collect();
    let names: Vec<String> = model.params().entries().map(|e| e.name.clone()).collect();

    let mut blocks = Vec::with_capacity(names.len());
    for (ei, name) in names.iter().enumerate() {
        let n = analytic[ei].len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let original = {
                let e = model.params_mut().entries_mut().nth(ei).unwrap();
                let v = e.value[i];
                e.value[i] = v + h;
                v
            };
            let plus = model.loss();
            model.params_mut().entries_mut().nth(ei).unwrap().value[i] = original - h;
            let minus = model.loss();
            model.params_mut().entries_mut().nth(ei).unwrap().value[i] = original;
            let numeric = (plus - minus) / (2.0 * h);
            worst = worst.max(relative_error(analytic[ei][i], numeric));
        }
        blocks.push(BlockReport { name: name.clone(), max_rel_err: worst, scalars: n });
    }
    GradCheckReport { blocks }
}

/// Loss model for a bare stack: a fixed random linear functional of the
/// output, which exercises every output path.
pub struct StackLoss {
    pub stack: Stack,
    pub params: ParameterSet,
    pub input: Vec<f64>,
    pub probe: Vec<f64>,
}

impl StackLoss {
    pub fn new(stack: Stack, params: ParameterSet, rng: &mut ChaCha8Rng) -> StackLoss {
        let input = (0..stack.in_len()).map(|_| rng.random_range(-1.5..1.5)).collect();
        let probe = (0..stack.out_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        StackLoss { stack, params, input, probe }
    }
}

impl LossModel for StackLoss {
    fn params(&self) -> &ParameterSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParameterSet {
        &mut self.params
    }

    fn loss_and_grad(&mut self) -> f64 {
        self.params.zero_grads();
        let trace = self.stack.forward(&self.params, &self.input);
        let loss = trace.output().iter().zip(&self.probe).map(|(y, w)| y * w).sum();
        self.stack.backward(&mut self.params, &trace, self.probe.clone());
        loss
    }

    fn loss(&self) -> f64 {
        let trace = self.stack.forward(&self.params, &self.input);
        trace.output().iter().zip(&self.probe).map(|(y, w)| y * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::layers::StackBuilder;
    use crate::nn::spline::KanLayerSpec;
    use crate::rng::{stream, StreamKind};

    fn rng(counter: u64) -> ChaCha8Rng {
        stream(91, StreamKind::ParamInit, counter)
    }

    #[test]
    fn quadratic_loss_gradient_is_two_params() {
        struct Quad {
            ps: ParameterSet,
        }
        impl LossModel for Quad {
            fn params(&self) -> &ParameterSet {
                &self.ps
            }
            fn params_mut(&mut self) -> &mut ParameterSet {
                &mut self.ps
            }
            fn loss_and_grad(&mut self) -> f64 {
                self.ps.zero_grads();
                let v = self.ps.entries().next().unwrap().value.clone();
                let e = self.ps.entries_mut().next().unwrap();
                for (g, x) in e.grad.iter_mut().zip(&v) {
                    *g = 2.0 * x;
                }
                v.iter().map(|x| x * x).sum()
            }
            fn loss(&self) -> f64 {
                self.ps.entries().next().unwrap().value.iter().map(|x| x * x).sum()
            }
        }
        let mut ps = ParameterSet::new();
        ps.add("x", vec![4], vec![0.3, -1.2, 2.0, 0.0]).unwrap();
        let mut m = Quad { ps };
        let loss = m.loss_and_grad();
        assert!((loss - (0.09 + 1.44 + 4.0)).abs() < 1e-12);
        assert_eq!(m.ps.entries().next().unwrap().grad, vec![0.6, -2.4, 4.0, 0.0]);
        let report = finite_difference_check(&mut m, FD_STEP);
        assert!(report.passed(1e-7), "max err {}", report.max_rel_err());
    }

    #[test]
    fn constant_loss_has_zero_gradient() {
        struct Constant {
            ps: ParameterSet,
        }
        impl LossModel for Constant {
            fn params(&self) -> &ParameterSet {
                &self.ps
            }
            fn params_mut(&mut self) -> &mut ParameterSet {
                &mut self.ps
            }
            fn loss_and_grad(&mut self) -> f64 {
                self.ps.zero_grads();
                4.2
            }
            fn loss(&self) -> f64 {
                4.2
            }
        }
        let mut ps = ParameterSet::new();
        ps.add("x", vec![3], vec![1.0, 2.0, 3.0]).unwrap();
        let mut m = Constant { ps };
        let report = finite_difference_check(&mut m, FD_STEP);
        assert_eq!(report.max_rel_err(), 0.0);
    }

    #[test]
    fn linear_layer_error_is_machine_scale() {
        let mut r = rng(0);
        let (stack, ps) = StackBuilder::new(6, &mut r).linear(4, 1.0).unwrap().finish();
        let mut model = StackLoss::new(stack, ps, &mut r);
        let report = finite_difference_check(&mut model, FD_STEP);
        assert!(report.passed(1e-7), "max err {}", report.max_rel_err());
    }

    #[test]
    fn conv_stride_two_passes() {
        let mut r = rng(1);
        let (stack, ps) = StackBuilder::new(9, &mut r)
            .conv1d(3, 3, 2, 1.0)
            .unwrap()
            .tanh()
            .finish();
        let mut model = StackLoss::new(stack, ps, &mut r);
        let report = finite_difference_check(&mut model, FD_STEP);
        assert!(report.passed(1e-4), "max err {}", report.max_rel_err());
    }

    #[test]
    fn kan_cubic_passes() {
        let mut r = rng(2);
        let spec = KanLayerSpec::default();
        let (stack, ps) = StackBuilder::new(5, &mut r)
            .kan(4, &spec, 1.0)
            .unwrap()
            .kan(3, &spec, 1.0)
            .unwrap()
            .finish();
        let mut model = StackLoss::new(stack, ps, &mut r);
        let report = finite_difference_check(&mut model, FD_STEP);
        assert!(report.passed(1e-4), "max err {}", report.max_rel_err());
    }
}
