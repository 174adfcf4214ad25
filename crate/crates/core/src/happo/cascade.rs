//! The sequential multi-agent advantage cascade.
//!
//! During one update round the agents step in a shuffled order. Each agent's
//! surrogate weights are its own (normalized) advantage estimates multiplied
//! by the running product of the already-updated agents' policy ratios; after
//! an agent finishes its steps, its new-to-behavior ratios fold into the
//! product. A sequence counter guards against out-of-order application.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("cascade applied out of order: expected agent position {expected}, got {got}")]
    OutOfOrder { expected: usize, got: usize },
    #[error("cascade ratio length {got} does not match batch length {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Clone, Debug)]
pub struct AdvantageCascade {
    ratio_product: Vec<f64>,
    agents_applied: usize,
}

impl AdvantageCascade {
    /// Fresh cascade for a batch: the ratio product starts at one, so the
    /// first agent sees exactly its advantage estimates.
    pub fn new(batch_len: usize) -> Self {
        AdvantageCascade { ratio_product: vec![1.0; batch_len], agents_applied: 0 }
    }

    pub fn len(&self) -> usize {
        self.ratio_product.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratio_product.is_empty()
    }

    /// How many agents' ratios have been folded in.
    pub fn agents_applied(&self) -> usize {
        self.agents_applied
    }

    /// Surrogate weights for the next agent: elementwise product of the
    /// accumulated ratios with that agent's advantage estimates.
    pub fn weighted(&self, advantages: &[f64]) -> Vec<f64> {
        assert_eq!(advantages.len(), self.ratio_product.len(), "advantage length");
        self.ratio_product.iter().zip(advantages).map(|(r, a)| r * a).collect()
    }

    /// Folds the just-updated agent's per-sample ratios into the product.
    /// `position` is the agent's index in the round's update order.
    pub fn apply_agent(&mut self, ratios: &[f64], position: usize) -> Result<(), CascadeError> {
        if position != self.agents_applied {
            return Err(CascadeError::OutOfOrder { expected: self.agents_applied, got: position });
        }
        if ratios.len() != self.ratio_product.len() {
            return Err(CascadeError::LengthMismatch {
                expected: self.ratio_product.len(),
                got: ratios.len(),
            });
        }
        for (p, r) in self.ratio_product.iter_mut().zip(ratios) {
            *p *= r;
        }
        self.agents_applied += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_cascade_passes_advantages_through() {
        let c = AdvantageCascade::new(3);
        assert_eq!(c.weighted(&[1.5, -2.0, 0.5]), vec![1.5, -2.0, 0.5]);
    }

    #[test]
    fn unit_ratios_leave_the_cascade_unchanged() {
        let mut c = AdvantageCascade::new(2);
        c.apply_agent(&[1.0, 1.0], 0).unwrap();
        c.apply_agent(&[1.0, 1.0], 1).unwrap();
        assert_eq!(c.weighted(&[0.7, -0.3]), vec![0.7, -0.3]);
        assert_eq!(c.agents_applied(), 2);
    }

    #[test]
    fn hand_built_two_agent_product() {
        let adv = [2.0, -1.0];
        let mut c = AdvantageCascade::new(2);
        c.apply_agent(&[1.1, 0.9], 0).unwrap();
        c.apply_agent(&[0.5, 2.0], 1).unwrap();
        let m = c.weighted(&adv);
        assert!((m[0] - 1.1 * 0.5 * 2.0).abs() < 1e-12);
        assert!((m[1] - 0.9 * 2.0 * -1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_order_application_is_rejected() {
        let mut c = AdvantageCascade::new(2);
        assert!(matches!(
            c.apply_agent(&[1.0, 1.0], 1),
            Err(CascadeError::OutOfOrder { expected: 0, got: 1 })
        ));
        c.apply_agent(&[1.0, 1.0], 0).unwrap();
        assert!(c.apply_agent(&[1.0, 1.0], 0).is_err());
        assert!(c.apply_agent(&[1.0], 1).is_err());
    }
}
