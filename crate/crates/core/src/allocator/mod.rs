//! Rollout allocation: the two-stage adaptive scheduler and the fixed-budget
//! baselines it is compared against.
//!
//! Stage I draws `n_explore` rollouts per query and stratifies by the exact
//! success rate. Stage II spends the pooled remainder
//! `(n_total - n_explore) * |batch|` on rescue increments for the rescue
//! stratum, downsamples incorrect rollouts in the low-partial stratum, keeps
//! high-stratum groups whole, and curates dead-zone groups with Bayesian
//! advantages.

mod aero;
mod curation;
mod fixed;
mod ledger;
mod rescue;

use std::collections::BTreeMap;

use thiserror::Error;

pub use aero::run_step_aero;
pub use curation::{curate_dead_zone, pair_rescued, reject_downsample, stratify, PairedKeep};
pub use fixed::{run_step_fixed, FixedMode};
pub use ledger::{BudgetLedger, Blocked};
pub use rescue::{rescue, RescueOutcome, RescueReport, RescueRun};

use crate::advantage::{AdvantageError, AdvantageSet};
use crate::config::ConfigError;
use crate::oracle::OracleError;
use crate::types::{GroupObservation, QueryId, RolloutRecord, StratumLabel, TypeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Advantage(#[from] AdvantageError),
    #[error("batch is empty")]
    EmptyBatch,
    #[error("fixed rollout count must be >= 1")]
    ZeroRollouts,
    #[error("stratification needs exactly {expected} exploration rollouts, got {found}")]
    WrongExploreCount { expected: u32, found: usize },
    #[error("rescued pairing needs a correct rescue rollout")]
    NoCorrectRescue,
    #[error("rejection downsampling needs at least one correct rollout")]
    NoCorrectForDownsample,
    #[error("dead-zone curation needs a single shared reward, got {correct} correct of {total}")]
    MixedDeadZone { correct: u64, total: u64 },
    #[error("source ran out of rollouts for {query} after {got} of {needed}")]
    SourceExhausted { query: QueryId, needed: u32, got: u32 },
}

/// Training set contributed by one query after Stage II.
#[derive(Debug, Clone, PartialEq)]
pub struct CuratedGroup {
    pub query_id: QueryId,
    pub stratum: StratumLabel,
    pub kept_rollouts: Vec<RolloutRecord>,
    pub advantages: AdvantageSet,
    pub rescue_iterations_used: u32,
    pub rescued: bool,
}

impl CuratedGroup {
    pub fn kept_correct(&self) -> usize {
        self.kept_rollouts.iter().filter(|r| r.correct()).count()
    }

    pub fn kept_incorrect(&self) -> usize {
        self.kept_rollouts.len() - self.kept_correct()
    }

    pub fn kept_tokens(&self) -> u64 {
        self.kept_rollouts.iter().map(|r| r.tokens() as u64).sum()
    }
}

/// Output of one allocation step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub step: u64,
    /// Curated training groups, in batch order. Filtering baselines may omit queries.
    pub groups: Vec<CuratedGroup>,
    /// Every rollout generated for each query (exploration plus rescue), in batch order.
    pub observations: Vec<GroupObservation>,
    pub ledger: BudgetLedger,
    /// Stage I stratum counts.
    pub stratum_counts: BTreeMap<StratumLabel, usize>,
    pub rescued_count: usize,
    pub total_rollouts_generated: u64,
    pub total_rollouts_trained: u64,
}

impl StepResult {
    pub fn batch_size(&self) -> usize {
        self.observations.len()
    }

    /// Trained rollouts per query in the batch.
    pub fn mean_group_size(&self) -> f64 {
        self.total_rollouts_trained as f64 / self.batch_size() as f64
    }

    pub(crate) fn assemble(
        step: u64,
        groups: Vec<CuratedGroup>,
        observations: Vec<GroupObservation>,
        ledger: BudgetLedger,
        strata: impl IntoIterator<Item = StratumLabel>,
    ) -> Self {
        let mut stratum_counts: BTreeMap<StratumLabel, usize> =
            StratumLabel::ALL.iter().map(|&s| (s, 0)).collect();
        for s in strata {
            *stratum_counts.entry(s).or_default() += 1;
        }
        let rescued_count = groups.iter().filter(|g| g.rescued).count();
        let total_rollouts_generated = observations.iter().map(|o| o.len() as u64).sum();
        let total_rollouts_trained = groups.iter().map(|g| g.kept_rollouts.len() as u64).sum();
        Self {
            step,
            groups,
            observations,
            ledger,
            stratum_counts,
            rescued_count,
            total_rollouts_generated,
            total_rollouts_trained,
        }
    }
}
