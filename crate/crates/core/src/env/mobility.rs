//! User Gauss-Markov mobility and UAV point-mass kinematics.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::SimConfig;
use crate::geom::Vec3;

use super::state::{UavState, UserState};

/// Advances one user by one slot.
///
/// The position moves with the pre-update speed and heading, then speed and
/// heading evolve as first-order Gauss-Markov processes. Draws exactly two
/// standard Gaussians (speed first, heading second) regardless of config so
/// stream positions stay aligned across scenarios. Positions are clamped to
/// the service area and speed is floored at zero.
pub fn step_user_mobility(state: &UserState, cfg: &SimConfig, rng: &mut ChaCha8Rng) -> UserState {
    let noise_v: f64 = rng.sample(StandardNormal);
    let noise_a: f64 = rng.sample(StandardNormal);

    let x = state.pos.x + state.speed * state.heading.cos() * cfg.delta;
    let y = state.pos.y + state.speed * state.heading.sin() * cfg.delta;

    let speed = cfg.c1 * state.speed
        + (1.0 - cfg.c1) * cfg.v_bar
        + (1.0 - cfg.c1 * cfg.c1).sqrt() * cfg.sigma_speed * noise_v;
    let heading = cfg.c2 * state.heading
        + (1.0 - cfg.c2) * cfg.alpha_bar
        + (1.0 - cfg.c2 * cfg.c2).sqrt() * cfg.sigma_dir * noise_a;

    UserState {
        pos: Vec3::new(x.clamp(0.0, cfg.area_x_max), y.clamp(0.0, cfg.area_y_max), 0.0),
        speed: speed.max(0.0),
        heading,
        ..state.clone()
    }
}

/// Advances one UAV by one slot under the commanded acceleration.
///
/// Position integrates `q + v δ + ½ a δ²` and is then projected into the
/// service volume; the pre-projection position is retained for the boundary
/// penalty. Velocity integrates `v + a δ` and its norm is projected onto the
/// speed limit.
pub fn step_uav_kinematics(state: &UavState, accel: Vec3, cfg: &SimConfig) -> UavState {
    let d = cfg.delta;
    let raw = state.pos + state.vel.scale(d) + accel.scale(0.5 * d * d);
    let vel = (state.vel + accel.scale(d)).clamp_norm(cfg.v_max);
    let pos = Vec3::new(
        raw.x.clamp(0.0, cfg.area_x_max),
        raw.y.clamp(0.0, cfg.area_y_max),
        raw.z.clamp(cfg.z_min, cfg.z_max),
    );
    UavState { pos, raw_pos: raw, vel, ..state.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamKind};

    fn cfg() -> SimConfig {
        SimConfig::desk_scale()
    }

    fn user_at(x: f64, y: f64, speed: f64, heading: f64) -> UserState {
        UserState { pos: Vec3::new(x, y, 0.0), speed, heading, ..UserState::default() }
    }

    #[test]
    fn memory_preserving_limit_keeps_speed() {
        // c1 = 1 kills both the mean-reversion and the noise weight.
        let cfg = SimConfig { c1: 1.0, c2: 1.0, ..cfg() };
        let mut rng = stream(1, StreamKind::Mobility, 0);
        let s0 = user_at(100.0, 100.0, 2.5, 0.7);
        let s1 = step_user_mobility(&s0, &cfg, &mut rng);
        assert_eq!(s1.speed, 2.5);
        assert_eq!(s1.heading, 0.7);
    }

    #[test]
    fn mean_reverting_limit_hits_the_mean() {
        let cfg = SimConfig {
            c1: 0.0,
            c2: 0.0,
            sigma_speed: 0.0,
            sigma_dir: 0.0,
            v_bar: 1.0,
            alpha_bar: 0.25,
            ..cfg()
        };
        let mut rng = stream(1, StreamKind::Mobility, 0);
        let s1 = step_user_mobility(&user_at(100.0, 100.0, 9.0, 3.0), &cfg, &mut rng);
        assert_eq!(s1.speed, 1.0);
        assert_eq!(s1.heading, 0.25);
    }

    #[test]
    fn position_update_uses_previous_speed_and_heading() {
        let cfg = cfg();
        let mut rng = stream(1, StreamKind::Mobility, 0);
        let s1 = step_user_mobility(&user_at(10.0, 10.0, 2.0, 0.0), &cfg, &mut rng);
        assert!((s1.pos.x - 12.0).abs() < 1e-12);
        assert!((s1.pos.y - 10.0).abs() < 1e-12);
    }

    #[test]
    fn position_clamped_to_area() {
        let cfg = cfg();
        let mut rng = stream(1, StreamKind::Mobility, 0);
        let s1 = step_user_mobility(&user_at(cfg.area_x_max - 1.0, 0.0, 30.0, 0.0), &cfg, &mut rng);
        assert_eq!(s1.pos.x, cfg.area_x_max);
        assert_eq!(s1.pos.y, 0.0);
    }

    #[test]
    fn speed_floored_at_zero() {
        let cfg = SimConfig { c1: 0.0, v_bar: 1e-9, sigma_speed: 10.0, ..cfg() };
        // Find a draw that would go negative without the floor.
        let mut rng = stream(3, StreamKind::Mobility, 0);
        let mut hit_floor = false;
        let mut s = user_at(100.0, 100.0, 0.0, 0.0);
        for _ in 0..64 {
            s = step_user_mobility(&s, &cfg, &mut rng);
            assert!(s.speed >= 0.0);
            if s.speed == 0.0 {
                hit_floor = true;
            }
        }
        assert!(hit_floor);
    }

    #[test]
    fn coasting_uav_translates_by_v_delta() {
        let cfg = cfg();
        let s0 = UavState {
            pos: Vec3::new(100.0, 100.0, 150.0),
            vel: Vec3::new(5.0, -2.0, 0.0),
            ..UavState::default()
        };
        let s1 = step_uav_kinematics(&s0, Vec3::ZERO, &cfg);
        assert_eq!(s1.pos, Vec3::new(105.0, 98.0, 150.0));
        assert_eq!(s1.vel, s0.vel);
    }

    #[test]
    fn half_a_delta_squared_from_rest() {
        let cfg = cfg();
        let s0 = UavState { pos: Vec3::new(50.0, 50.0, 200.0), ..UavState::default() };
        let s1 = step_uav_kinematics(&s0, Vec3::new(1.0, 0.0, 0.0), &cfg);
        assert!((s1.pos.x - 50.5).abs() < 1e-12);
        assert_eq!(s1.pos.y, 50.0);
    }

    #[test]
    fn velocity_projected_onto_speed_limit() {
        let cfg = cfg();
        let s0 = UavState {
            pos: Vec3::new(250.0, 250.0, 200.0),
            vel: Vec3::new(29.0, 0.0, 0.0),
            ..UavState::default()
        };
        let s1 = step_uav_kinematics(&s0, Vec3::new(3.0, 0.0, 0.0), &cfg);
        // Raw velocity (32, 0, 0) scaled back to norm 30.
        assert!((s1.vel.x - 30.0).abs() < 1e-12);
        assert_eq!(s1.vel.y, 0.0);
        assert!(s1.vel.norm() <= cfg.v_max + 1e-12);
    }

    #[test]
    fn altitude_projected_and_raw_retained() {
        let cfg = cfg();
        let s0 = UavState {
            pos: Vec3::new(499.0, 250.0, 299.0),
            vel: Vec3::new(10.0, 0.0, 10.0),
            ..UavState::default()
        };
        let s1 = step_uav_kinematics(&s0, Vec3::ZERO, &cfg);
        assert_eq!(s1.pos.x, cfg.area_x_max);
        assert_eq!(s1.pos.z, cfg.z_max);
        assert_eq!(s1.raw_pos.x, 509.0);
        assert_eq!(s1.raw_pos.z, 309.0);
    }
}
