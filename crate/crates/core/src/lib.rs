//! Adaptive rollout-budget allocation for group-relative policy optimization.
//!
//! The crate simulates one training step at a time: a [`oracle::RolloutSource`]
//! supplies binary verifier outcomes, the [`allocator`] spends a per-query
//! rollout budget either adaptively or at a fixed size, and the resulting
//! [`allocator::StepResult`] feeds the [`cost`] model and [`metrics`].
//! [`gradproxy`] checks the group-gradient norm identity that motivates the
//! 1:1 correct/incorrect curation ratio.

pub mod advantage;
pub mod allocator;
pub mod config;
pub mod cost;
pub mod experiment;
pub mod gradproxy;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod types;
pub mod verify;

pub use advantage::{AdvantageMode, AdvantageSet};
pub use allocator::{run_step_aero, run_step_fixed, CuratedGroup, FixedMode, StepResult};
pub use config::{AeroConfig, ConfigError, ModelSpec};
pub use cost::CostReport;
pub use types::{GroupObservation, Phase, PosteriorState, QueryId, RolloutRecord, StratumLabel};
