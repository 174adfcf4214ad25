//! The learning algorithm: GAE, the sequential advantage cascade, clipped
//! surrogate and critic losses, and adaptive-moment updates.

mod adam;
mod buffer;
mod cascade;
mod gae;
mod loss;
mod update;

pub use adam::{optimizer_step, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use buffer::{AgentTrajectory, RolloutBuffer, Transition};
pub use cascade::{AdvantageCascade, CascadeError};
pub use gae::{advantage_normalize, compute_gae};
pub use loss::{
    actor_loss, actor_loss_value, critic_loss, critic_loss_value, policy_ratios, ActorBatch,
    ActorLossModel, ActorLossStats, CriticLossModel, LogProbModel,
};
pub use update::{
    sequential_update_round, AgentNets, AgentRoundStats, RoundStats, UpdateConfig, UpdateError,
};
