//! Generalized advantage estimation and batch normalization.

/// Computes GAE advantages and value targets over a (possibly multi-episode)
/// sequence. Episode boundaries are marked by `dones`; the bootstrap value
/// past a terminal slot (and past the end of the buffer) is zero. Targets
/// are the λ-returns `advantage + value`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert_eq!(values.len(), n, "values length");
    assert_eq!(dones.len(), n, "dones length");
    let mut advantages = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let cont = if dones[t] { 0.0 } else { 1.0 };
        let next_value = if dones[t] || t + 1 == n { 0.0 } else { values[t + 1] };
        let delta = rewards[t] + gamma * next_value * cont - values[t];
        acc = delta + gamma * lambda * cont * acc;
        advantages[t] = acc;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    (advantages, returns)
}

/// Normalizes a batch of advantages to zero mean and unit standard deviation
/// (std floored at 1e-8, so constant batches map to zeros).
pub fn advantage_normalize(advantages: &[f64]) -> Vec<f64> {
    let n = advantages.len().max(1) as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt().max(1e-8);
    advantages.iter().map(|a| (a - mean) / std).collect()
}
