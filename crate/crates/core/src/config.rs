//! Simulation configuration: every physical, economic, and learning constant.
//!
//! All quantities use one canonical SI unit per field (meters, seconds,
//! watts, joules, hertz, bits). Conversions happen at config parse time,
//! never inside the physics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

/// Physical and learning constants for one scenario.
///
/// `Default` is the desk-scale scenario used by tests and CI; the full-size
/// scenario is available as [`SimConfig::full_scale`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Service area east extent, meters.
    pub area_x_max: f64,
    /// Service area north extent, meters.
    pub area_y_max: f64,
    /// Minimum UAV altitude, meters.
    pub z_min: f64,
    /// Maximum UAV altitude, meters.
    pub z_max: f64,
    /// Number of sensing users (K).
    pub num_users: usize,
    /// Number of UAVs (U).
    pub num_uavs: usize,
    /// Slots per episode (N).
    pub num_slots: usize,
    /// Slot duration, seconds.
    pub delta: f64,

    /// Gauss-Markov speed memory factor.
    pub c1: f64,
    /// Gauss-Markov direction memory factor.
    pub c2: f64,
    /// Mean user speed, m/s.
    pub v_bar: f64,
    /// Mean user heading, radians.
    pub alpha_bar: f64,
    /// Std-dev of the speed perturbation, m/s.
    pub sigma_speed: f64,
    /// Std-dev of the heading perturbation, radians.
    pub sigma_dir: f64,

    /// Reference channel power gain at 1 m.
    pub beta0: f64,
    /// Rician factor (LoS-to-scatter power ratio).
    pub rician_k: f64,
    /// Noise power spectral density, W/Hz.
    pub noise_psd: f64,
    /// User transmit power, W.
    pub p_tx: f64,
    /// Total bandwidth per UAV, Hz.
    pub bandwidth: f64,

    /// Sensing rate per user, bits/s.
    pub sensing_rate: f64,
    /// CPU cycles per bit at users.
    pub cycles_per_bit_user: f64,
    /// CPU cycles per bit at UAVs.
    pub cycles_per_bit_uav: f64,
    /// Maximum user CPU frequency, Hz.
    pub f_user_max: f64,
    /// Maximum UAV CPU frequency, Hz.
    pub f_uav_max: f64,
    /// Sensing energy per bit, J/bit.
    pub sensing_energy_per_bit: f64,
    /// Effective switched capacitance, J·s²/cycle³.
    pub kappa: f64,
    /// Per-slot user energy budget, J.
    pub e_user_max: f64,
    /// Per-slot UAV energy budget, J.
    pub e_uav_max: f64,

    /// Maximum UAV speed, m/s.
    pub v_max: f64,
    /// Maximum UAV acceleration, m/s².
    pub a_max: f64,
    /// Minimum UAV separation, meters.
    pub d_min: f64,

    /// Blade profile power at hover, W.
    pub p0_blade: f64,
    /// Induced power at hover, W.
    pub p_induced: f64,
    /// Blade angular velocity, rad/s.
    pub rotor_speed: f64,
    /// Rotor radius, meters.
    pub rotor_radius: f64,
    /// Fuselage drag ratio.
    pub fuselage_drag: f64,
    /// Air density, kg/m³.
    pub air_density: f64,
    /// Rotor solidity.
    pub rotor_solidity: f64,
    /// Rotor disc area, m².
    pub rotor_area: f64,
    /// Mean rotor induced velocity at hover, m/s.
    pub v_induced: f64,
    /// Aircraft weight, N.
    pub weight: f64,
    /// Use the literal divergent induced-power term instead of the guarded
    /// form (only defined for nonzero horizontal speed).
    pub induced_power_literal: bool,

    /// User energy-budget penalty weight, per J.
    pub mu_user_energy: f64,
    /// User sensed-data-capacity penalty weight, per Mbit.
    pub mu_user_sense: f64,
    /// User computed-vs-transmitted penalty weight, per Mbit.
    pub mu_user_link: f64,
    /// UAV energy-budget penalty weight, per J.
    pub mu_uav_energy: f64,
    /// UAV computed-vs-transmitted penalty weight, per Mbit.
    pub mu_uav_link: f64,
    /// UAV out-of-area penalty weight, per 100 m of overrun.
    pub mu_uav_range: f64,
    /// UAV proximity penalty weight, per meter below the safety distance.
    pub mu_uav_proximity: f64,

    /// Reward discount factor.
    pub gamma: f64,
    /// GAE bias/variance trade-off.
    pub gae_lambda: f64,
    /// PPO clip radius.
    pub clip_epsilon: f64,
    /// Entropy bonus coefficient.
    pub entropy_coef: f64,
    /// Actor learning rate.
    pub actor_lr: f64,
    /// Critic learning rate.
    pub critic_lr: f64,
    /// Master seed for all derived random streams.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            area_x_max: 500.0,
            area_y_max: 500.0,
            z_min: 100.0,
            z_max: 300.0,
            num_users: 4,
            num_uavs: 2,
            num_slots: 10,
            delta: 1.0,
            c1: 0.8,
            c2: 0.8,
            v_bar: 1.0,
            alpha_bar: 0.0,
            sigma_speed: 0.3,
            sigma_dir: 0.2,
            beta0: 1e-3,
            rician_k: 3.0,
            noise_psd: 1e-17,
            p_tx: 0.1,
            bandwidth: 1e7,
            sensing_rate: 1e7,
            cycles_per_bit_user: 300.0,
            cycles_per_bit_uav: 300.0,
            f_user_max: 1e9,
            f_uav_max: 8e9,
            sensing_energy_per_bit: 1e-8,
            kappa: 1e-28,
            e_user_max: 0.5,
            e_uav_max: 250.0,
            v_max: 30.0,
            a_max: 3.0,
            d_min: 50.0,
            p0_blade: 79.86,
            p_induced: 88.63,
            rotor_speed: 300.0,
            rotor_radius: 0.4,
            fuselage_drag: 0.6,
            air_density: 1.225,
            rotor_solidity: 0.05,
            rotor_area: 0.503,
            v_induced: 3.6,
            weight: 20.0,
            induced_power_literal: false,
            mu_user_energy: 10.0,
            mu_user_sense: 1.0,
            mu_user_link: 1.0,
            mu_uav_energy: 10.0,
            mu_uav_link: 1.0,
            mu_uav_range: 1.0,
            mu_uav_proximity: 1.0,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_epsilon: 0.2,
            entropy_coef: 0.01,
            actor_lr: 3e-4,
            critic_lr: 1e-3,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Desk-scale scenario: 4 users, 2 UAVs, 10 slots over a 500 m square.
    pub fn desk_scale() -> Self {
        Self::default()
    }

    /// Full-size scenario: 20 users, 5 UAVs, 20 slots over a 1000 m square.
    pub fn full_scale() -> Self {
        SimConfig {
            area_x_max: 1000.0,
            area_y_max: 1000.0,
            num_users: 20,
            num_uavs: 5,
            num_slots: 20,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, format!("must be strictly positive, got {v}")))
            }
        }
        fn unit_interval(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(field, format!("must lie in [0, 1], got {v}")))
            }
        }

        positive("delta", self.delta)?;
        positive("z_min", self.z_min)?;
        if self.z_max < self.z_min {
            return Err(invalid("z_max", "must be at least z_min"));
        }
        unit_interval("c1", self.c1)?;
        unit_interval("c2", self.c2)?;
        if self.num_users == 0 {
            return Err(invalid("num_users", "at least one user required"));
        }
        if self.num_uavs == 0 {
            return Err(invalid("num_uavs", "at least one UAV required"));
        }
        if self.num_slots == 0 {
            return Err(invalid("num_slots", "at least one slot required"));
        }
        for (field, v) in [
            ("area_x_max", self.area_x_max),
            ("area_y_max", self.area_y_max),
            ("beta0", self.beta0),
            ("noise_psd", self.noise_psd),
            ("p_tx", self.p_tx),
            ("bandwidth", self.bandwidth),
            ("sensing_rate", self.sensing_rate),
            ("cycles_per_bit_user", self.cycles_per_bit_user),
            ("cycles_per_bit_uav", self.cycles_per_bit_uav),
            ("f_user_max", self.f_user_max),
            ("f_uav_max", self.f_uav_max),
            ("sensing_energy_per_bit", self.sensing_energy_per_bit),
            ("kappa", self.kappa),
            ("e_user_max", self.e_user_max),
            ("e_uav_max", self.e_uav_max),
            ("v_max", self.v_max),
            ("a_max", self.a_max),
            ("d_min", self.d_min),
            ("p0_blade", self.p0_blade),
            ("p_induced", self.p_induced),
            ("rotor_speed", self.rotor_speed),
            ("rotor_radius", self.rotor_radius),
            ("fuselage_drag", self.fuselage_drag),
            ("air_density", self.air_density),
            ("rotor_solidity", self.rotor_solidity),
            ("rotor_area", self.rotor_area),
            ("v_induced", self.v_induced),
            ("weight", self.weight),
        ] {
            positive(field, v)?;
        }
        if self.rician_k < 0.0 || !self.rician_k.is_finite() {
            return Err(invalid("rician_k", "must be non-negative"));
        }
        if self.sigma_speed < 0.0 {
            return Err(invalid("sigma_speed", "must be non-negative"));
        }
        if self.sigma_dir < 0.0 {
            return Err(invalid("sigma_dir", "must be non-negative"));
        }
        for (field, v) in [
            ("mu_user_energy", self.mu_user_energy),
            ("mu_user_sense", self.mu_user_sense),
            ("mu_user_link", self.mu_user_link),
            ("mu_uav_energy", self.mu_uav_energy),
            ("mu_uav_link", self.mu_uav_link),
            ("mu_uav_range", self.mu_uav_range),
            ("mu_uav_proximity", self.mu_uav_proximity),
        ] {
            if v < 0.0 {
                return Err(invalid(field, "penalty weights must be non-negative"));
            }
        }
        unit_interval("gamma", self.gamma)?;
        unit_interval("gae_lambda", self.gae_lambda)?;
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return Err(invalid("clip_epsilon", "must lie in (0, 1)"));
        }
        positive("actor_lr", self.actor_lr)?;
        positive("critic_lr", self.critic_lr)?;
        Ok(())
    }
}
