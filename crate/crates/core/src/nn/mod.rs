//! Minimal double-precision neural toolkit with analytic gradients.

mod gradcheck;
mod layers;
mod params;
mod policy;
mod spline;

pub use gradcheck::{
    finite_difference_check, BlockReport, GradCheckReport, LossModel, StackLoss, FD_STEP,
};
pub use layers::{conv_out_len, Layer, Stack, StackBuilder, Trace};
pub use params::{NnError, Param, ParamId, ParameterSet};
pub use policy::{
    gaussian_entropy, gaussian_log_density, log_prob_grads, squash_correction,
    squashed_log_prob, ActorEval, ActorNet, ActorVariant, CriticNet, SampledAction,
    LOG_STD_INIT, LOG_STD_MAX, LOG_STD_MIN,
};
pub use spline::{BasisWindow, KanLayerSpec, SplineGrid};
