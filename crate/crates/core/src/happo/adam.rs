//! Adaptive-moment parameter updates.

use crate::nn::ParameterSet;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// One bias-corrected adaptive-moment descent step over every parameter of
/// the set, consuming the accumulated gradients. The actor objective is
/// already negated where it is built, so both networks descend.
pub fn optimizer_step(ps: &mut ParameterSet, lr: f64) {
    ps.adam_step += 1;
    let t = ps.adam_step as i32;
    let corr1 = 1.0 - ADAM_BETA1.powi(t);
    let corr2 = 1.0 - ADAM_BETA2.powi(t);
    for e in ps.entries_mut() {
        for i in 0..e.value.len() {
            let g = e.grad[i];
            e.m[i] = ADAM_BETA1 * e.m[i] + (1.0 - ADAM_BETA1) * g;
            e.v[i] = ADAM_BETA2 * e.v[i] + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = e.m[i] / corr1;
            let v_hat = e.v[i] / corr2;
            e.value[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_with(values: Vec<f64>) -> ParameterSet {
        let mut ps = ParameterSet::new();
        let n = values.len();
        ps.add("x", vec![n], values).unwrap();
        ps
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut ps = set_with(vec![1.0, -2.0, 0.5]);
        optimizer_step(&mut ps, 0.1);
        assert_eq!(ps.entries().next().unwrap().value, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_moves_by_roughly_the_learning_rate() {
        let mut ps = set_with(vec![0.0, 0.0]);
        {
            let e = ps.entries_mut().next().unwrap();
            e.grad.copy_from_slice(&[3.7, -0.002]);
        }
        optimizer_step(&mut ps, 0.01);
        let v = &ps.entries().next().unwrap().value;
        // Bias-corrected first step ≈ lr · sign(g).
        assert!((v[0] + 0.01).abs() < 1e-6, "{}", v[0]);
        assert!((v[1] - 0.01).abs() < 1e-4, "{}", v[1]);
    }

    #[test]
    fn quadratic_bowl_converges() {
        let mut ps = set_with(vec![3.0, -4.0, 1.5, 0.25]);
        for _ in 0..500 {
            let e = ps.entries_mut().next().unwrap();
            let g: Vec<f64> = e.value.iter().map(|x| 2.0 * x).collect();
            e.grad.copy_from_slice(&g);
            optimizer_step(&mut ps, 0.05);
        }
        let norm2: f64 = ps.entries().next().unwrap().value.iter().map(|x| x * x).sum();
        assert!(norm2 < 1e-4, "did not converge: {norm2}");
    }
}
