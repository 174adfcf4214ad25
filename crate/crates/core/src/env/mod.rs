//! The physical world: mobility, channel, data volumes, energy, and
//! constraint evaluation as pure functions of state, action, and an explicit
//! random stream.

mod channel;
mod constraints;
mod energy;
mod mobility;
mod state;

pub use channel::{channel_power_gain, small_scale_gain, transmission_rate, FadingDraw};
pub use constraints::{
    capped_processed_bits, evaluate_constraints, processed_data_objective, ConstraintReport,
    SlotQuantities, ViolationCounts,
};
pub use energy::{
    data_volumes, tx_energy, uav_energy, uav_flight_power, user_energy, DataVolumes, UserEnergy,
};
pub use mobility::{step_user_mobility, step_uav_kinematics};
pub use state::{JointAction, UavDecision, UavState, UserDecision, UserState, WorldState};
