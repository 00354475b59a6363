//! Symbolic systems with computable cylinder distributions.

mod bernoulli;
mod standard;
mod sturmian;

pub use bernoulli::{BernoulliSystem, DEFAULT_COMPOSITION_BUDGET, MAX_EXACT_LEVEL};
pub use standard::{
    build_r_for_target, build_r_with_horizon, search_horizon, BigCount, ConstructionState,
    StageRecord, DEFAULT_HORIZON, MAX_CANDIDATE_INDEX, MAX_STAGES, U2_MARGIN,
};
pub use sturmian::SturmianSystem;
