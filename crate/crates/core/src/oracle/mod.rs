//! Rollout outcome sources.
//!
//! The allocator only sees the [`RolloutSource`] trait; latent success
//! probabilities stay on the oracle side.

mod pool;
mod trace;

pub use pool::{apply_improvement, make_pool, ComponentKind, DifficultySpec, MixtureComponent, QueryPool, SyntheticOracle};
pub use trace::{write_trace, RecordingSource, ReplaySource, TraceRecord};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::QueryId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("unknown query {0}")]
    UnknownQuery(QueryId),
    #[error("invalid difficulty spec: {0}")]
    InvalidSpec(String),
    #[error("invalid length distribution: {0}")]
    InvalidLengths(String),
    #[error("improvement parameters must be finite and nonnegative (signal={signal}, eta={eta})")]
    InvalidImprovement { signal: f64, eta: f64 },
    #[error("trace line {line}: {message}")]
    MalformedTrace { line: usize, message: String },
    #[error("trace line {line}: step {step} follows step {previous}")]
    OutOfOrderStep { line: usize, step: u64, previous: u64 },
    #[error("trace I/O: {0}")]
    Io(String),
}

/// One verifier outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Draw {
    pub correct: bool,
    pub tokens: u32,
}

pub trait RolloutSource {
    /// Next outcome for `query` at `step`. `Ok(None)` means the source has no
    /// further outcomes for that query (only trace replay runs dry).
    fn draw(&mut self, query: &QueryId, step: u64) -> Result<Option<Draw>, OracleError>;
}

impl<S: RolloutSource + ?Sized> RolloutSource for &mut S {
    fn draw(&mut self, query: &QueryId, step: u64) -> Result<Option<Draw>, OracleError> {
        (**self).draw(query, step)
    }
}

/// Token count (prompt + response) per synthetic rollout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LengthDist {
    Constant { tokens: u32 },
    /// Inclusive on both ends.
    Uniform { min: u32, max: u32 },
}

impl LengthDist {
    pub fn validate(self) -> Result<Self, OracleError> {
        match self {
            LengthDist::Constant { tokens: 0 } => {
                Err(OracleError::InvalidLengths("constant length must be >= 1".into()))
            }
            LengthDist::Uniform { min, max } if min == 0 || min > max => Err(OracleError::InvalidLengths(
                format!("uniform lengths need 1 <= min <= max, got [{min}, {max}]"),
            )),
            ok => Ok(ok),
        }
    }
}

impl Default for LengthDist {
    fn default() -> Self {
        LengthDist::Constant { tokens: 512 }
    }
}
