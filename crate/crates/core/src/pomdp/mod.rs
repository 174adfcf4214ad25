//! Partially observable multi-agent wrapper: observations, feasible action
//! decoding, the closed-form user frequency, and penalty-shaped rewards.

mod action;
mod env;
mod frequency;
mod obs;
mod reward;

pub use action::{
    action_dim_for_agent, decode_uav_action, decode_user_action, uav_action_dim, user_action_dim,
    XI_MARGIN,
};
pub use env::{env_step, McsEnv, SlotEvaluation, StepOutcome};
pub use frequency::optimal_user_frequency;
pub use obs::{
    build_observations, global_state_len, obs_len_for_agent, uav_obs_len, user_obs_len,
};
pub use reward::{
    compute_rewards, penalty_f, InvalidInterval, RewardBreakdown, RewardInputs, MEGABIT,
    RANGE_NORMALIZER,
};
