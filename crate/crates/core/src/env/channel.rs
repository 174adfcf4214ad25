//! Rician air-to-ground channel and the resulting transmission rate.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::SimConfig;
use crate::geom::Vec3;

/// Small-scale fading draw: two independent standard Gaussians forming the
/// circularly-symmetric scattered component of one link.
#[derive(Clone, Copy, Debug)]
pub struct FadingDraw {
    pub re: f64,
    pub im: f64,
}

impl FadingDraw {
    pub fn sample(rng: &mut ChaCha8Rng) -> Self {
        FadingDraw { re: rng.sample(StandardNormal), im: rng.sample(StandardNormal) }
    }
}

/// Squared small-scale fading magnitude |ĝ|² for a Rician factor `k`.
///
/// Mixes a unit-modulus line-of-sight term weighted √(k/(k+1)) with the
/// scattered term weighted √(1/(k+1)); the expectation is exactly 1.
pub fn small_scale_gain(rician_k: f64, draw: FadingDraw) -> f64 {
    let los = (rician_k / (rician_k + 1.0)).sqrt();
    let scatter = (1.0 / (rician_k + 1.0)).sqrt();
    // Scattered component has unit mean power, so each quadrature carries 1/2.
    let re = los + scatter * draw.re / 2f64.sqrt();
    let im = scatter * draw.im / 2f64.sqrt();
    re * re + im * im
}

/// Channel power gain |g|² between a user and a UAV.
///
/// Large-scale part is `beta0 / distance²`; the small-scale part comes from
/// the supplied fading draw. The distance is strictly positive because UAVs
/// fly at `z ≥ z_min > 0`.
pub fn channel_power_gain(q_user: Vec3, q_uav: Vec3, cfg: &SimConfig, draw: FadingDraw) -> f64 {
    let d2 = {
        let d = q_uav - q_user;
        d.x * d.x + d.y * d.y + d.z * d.z
    };
    cfg.beta0 / d2 * small_scale_gain(cfg.rician_k, draw)
}

/// Achievable rate in bits/s for one scheduled link.
///
/// Returns `beta · B · log2(1 + p · gain / (N0 · B))`, taking the limit value
/// 0 when the user is unscheduled or granted no bandwidth.
pub fn transmission_rate(beta: f64, bandwidth: f64, gain: f64, cfg: &SimConfig) -> f64 {
    if beta == 0.0 || bandwidth <= 0.0 {
        return 0.0;
    }
    let snr = cfg.p_tx * gain / (cfg.noise_psd * bandwidth);
    beta * bandwidth * (1.0 + snr).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamKind};

    #[test]
    fn pure_los_limit() {
        // K → ∞ leaves only the deterministic unit-modulus term.
        let cfg = SimConfig { beta0: 1e-3, rician_k: 1e12, ..SimConfig::desk_scale() };
        let gain = channel_power_gain(
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 100.0),
            &cfg,
            FadingDraw { re: 0.3, im: -1.2 },
        );
        assert!((gain - 1e-7).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_limit_is_exponential_unit_mean() {
        // K = 0: |ĝ|² = (a² + b²)/2 with a, b standard normal — exponential
        // with mean 1. Check mean and variance empirically.
        let mut rng = stream(11, StreamKind::Fading, 0);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let g = small_scale_gain(0.0, FadingDraw::sample(&mut rng));
            sum += g;
            sum_sq += g * g;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn unit_mean_small_scale_power() {
        let mut rng = stream(12, StreamKind::Fading, 0);
        let n = 100_000;
        let mean: f64 =
            (0..n).map(|_| small_scale_gain(3.0, FadingDraw::sample(&mut rng))).sum::<f64>()
                / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn unscheduled_rate_is_zero() {
        let cfg = SimConfig::desk_scale();
        assert_eq!(transmission_rate(0.0, 1e6, 1e-7, &cfg), 0.0);
        assert_eq!(transmission_rate(1.0, 0.0, 1e-7, &cfg), 0.0);
    }

    #[test]
    fn unit_snr_gives_one_bit_per_hz() {
        // p · gain / (N0 · B) = 1 → rate = B.
        let cfg = SimConfig { p_tx: 0.1, noise_psd: 1e-17, ..SimConfig::desk_scale() };
        let gain = 1e-17 * 1e6 / 0.1;
        let rate = transmission_rate(1.0, 1e6, gain, &cfg);
        assert!((rate - 1e6).abs() < 1e-6);
    }

    #[test]
    fn direct_formula_evaluation() {
        let cfg = SimConfig { p_tx: 0.1, noise_psd: 1e-17, ..SimConfig::desk_scale() };
        // SNR = 0.1 · 1e-7 / (1e-17 · 1e6) = 1000.
        let rate = transmission_rate(1.0, 1e6, 1e-7, &cfg);
        let expected = 1e6 * 1001f64.log2();
        assert!((rate - expected).abs() < 1e-6);
        assert!((rate - 9.968e6).abs() < 5e3);
    }

    #[test]
    fn rate_monotone_in_gain_and_power() {
        let cfg = SimConfig::desk_scale();
        let mut rng = stream(13, StreamKind::Fading, 1);
        for _ in 0..500 {
            let b: f64 = rng.random_range(1e4..1e7);
            let g: f64 = rng.random_range(1e-12..1e-5);
            let g2 = g * rng.random_range(1.0..10.0);
            let r1 = transmission_rate(1.0, b, g, &cfg);
            let r2 = transmission_rate(1.0, b, g2, &cfg);
            assert!(r2 >= r1);
            let hot = SimConfig { p_tx: cfg.p_tx * 2.0, ..cfg.clone() };
            assert!(transmission_rate(1.0, b, g, &hot) >= r1);
            assert!(r1 > 0.0);
        }
    }
}
