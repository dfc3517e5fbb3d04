//! Domain value types shared by every module.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypeError {
    #[error("rollout tokens must be >= 1")]
    ZeroTokens,
    #[error("rescue iteration index must be >= 1")]
    ZeroRescueIteration,
    #[error("posterior {field} must be positive and finite, got {value}")]
    NonPositivePosterior { field: &'static str, value: f64 },
    #[error("correct count {correct} exceeds total {total}")]
    CountOverflow { correct: u64, total: u64 },
    #[error("group observation needs at least one rollout")]
    EmptyGroup,
    #[error("rollout for {found} placed in group of {expected}")]
    MixedQueries { expected: QueryId, found: QueryId },
}

/// Opaque query identifier. Cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QueryId(Arc<str>);

impl QueryId {
    pub fn new(id: impl AsRef<str>) -> Self {
        Self(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for QueryId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Where a rollout came from within a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Exploration,
    /// 1-based rescue iteration.
    Rescue(u32),
}

/// One sampled response: a binary verifier outcome and its token count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RolloutRecord {
    query_id: QueryId,
    correct: bool,
    tokens: u32,
    phase: Phase,
}

impl RolloutRecord {
    pub fn new(query_id: QueryId, correct: bool, tokens: u32, phase: Phase) -> Result<Self, TypeError> {
        if tokens == 0 {
            return Err(TypeError::ZeroTokens);
        }
        if phase == Phase::Rescue(0) {
            return Err(TypeError::ZeroRescueIteration);
        }
        Ok(Self { query_id, correct, tokens, phase })
    }

    pub fn query_id(&self) -> &QueryId {
        &self.query_id
    }

    pub fn correct(&self) -> bool {
        self.correct
    }

    /// Reward r_i as 0.0 / 1.0.
    pub fn reward(&self) -> f64 {
        if self.correct {
            1.0
        } else {
            0.0
        }
    }

    pub fn tokens(&self) -> u32 {
        self.tokens
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }
}

/// Exact success rate c/n kept as an integer pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SuccessRate {
    pub correct: u64,
    pub total: u64,
}

impl SuccessRate {
    pub fn new(correct: u64, total: u64) -> Result<Self, TypeError> {
        if total == 0 {
            return Err(TypeError::EmptyGroup);
        }
        if correct > total {
            return Err(TypeError::CountOverflow { correct, total });
        }
        Ok(Self { correct, total })
    }

    pub fn as_f64(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }

    /// `self <= num/den`, compared exactly.
    pub fn le_fraction(&self, num: u64, den: u64) -> bool {
        (self.correct as u128) * (den as u128) <= (num as u128) * (self.total as u128)
    }

    /// `self < 1/2`, compared exactly.
    pub fn below_half(&self) -> bool {
        2 * self.correct < self.total
    }

    pub fn is_zero(&self) -> bool {
        self.correct == 0
    }

    pub fn is_one(&self) -> bool {
        self.correct == self.total
    }
}

/// All rollouts observed for one query in one step, with their tally.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupObservation {
    query_id: QueryId,
    rollouts: Vec<RolloutRecord>,
    correct: u64,
}

impl GroupObservation {
    pub fn new(query_id: QueryId, rollouts: Vec<RolloutRecord>) -> Result<Self, TypeError> {
        if rollouts.is_empty() {
            return Err(TypeError::EmptyGroup);
        }
        if let Some(bad) = rollouts.iter().find(|r| r.query_id != query_id) {
            return Err(TypeError::MixedQueries {
                expected: query_id,
                found: bad.query_id.clone(),
            });
        }
        let correct = rollouts.iter().filter(|r| r.correct).count() as u64;
        Ok(Self { query_id, rollouts, correct })
    }

    pub fn query_id(&self) -> &QueryId {
        &self.query_id
    }

    pub fn rollouts(&self) -> &[RolloutRecord] {
        &self.rollouts
    }

    pub fn into_rollouts(self) -> Vec<RolloutRecord> {
        self.rollouts
    }

    pub fn len(&self) -> usize {
        self.rollouts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rollouts.is_empty()
    }

    /// c
    pub fn correct(&self) -> u64 {
        self.correct
    }

    /// m
    pub fn incorrect(&self) -> u64 {
        self.rollouts.len() as u64 - self.correct
    }

    /// u = c/(c+m), exact.
    pub fn success_rate(&self) -> SuccessRate {
        SuccessRate { correct: self.correct, total: self.rollouts.len() as u64 }
    }

    pub fn rewards(&self) -> Vec<bool> {
        self.rollouts.iter().map(|r| r.correct).collect()
    }

    pub fn tokens(&self) -> u64 {
        self.rollouts.iter().map(|r| r.tokens as u64).sum()
    }

    /// All rollouts share one reward value.
    pub fn is_dead_zone(&self) -> bool {
        self.correct == 0 || self.incorrect() == 0
    }
}

/// Beta(alpha, beta) belief over a query's success rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    alpha: f64,
    beta: f64,
}

impl PosteriorState {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, TypeError> {
        for (field, value) in [("alpha", alpha), ("beta", beta)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(TypeError::NonPositivePosterior { field, value });
            }
        }
        Ok(Self { alpha, beta })
    }

    /// Uniform Beta(1, 1).
    pub fn uniform() -> Self {
        Self { alpha: 1.0, beta: 1.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for PosteriorState {
    fn default() -> Self {
        Self::uniform()
    }
}

/// Stage I stratum of a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumLabel {
    Rescue,
    LowPartial,
    High,
}

impl StratumLabel {
    pub const ALL: [StratumLabel; 3] = [StratumLabel::Rescue, StratumLabel::LowPartial, StratumLabel::High];

    /// Rescue iff u <= s/n_explore, LowPartial iff below 1/2, High otherwise.
    pub fn classify(rate: SuccessRate, rescue_threshold: u64, n_explore: u64) -> Self {
        if rate.le_fraction(rescue_threshold, n_explore) {
            StratumLabel::Rescue
        } else if rate.below_half() {
            StratumLabel::LowPartial
        } else {
            StratumLabel::High
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StratumLabel::Rescue => "rescue",
            StratumLabel::LowPartial => "low_partial",
            StratumLabel::High => "high",
        }
    }
}
