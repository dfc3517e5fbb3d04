//! FLOPs and token accounting.
//!
//! Generation costs `2 * N_params` FLOPs per token and a training update
//! (forward and backward) `6 * N_params` per token. Token counts include
//! prompt and response for every rollout.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocator::StepResult;
use crate::config::ModelSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("zero-accuracy ratio must lie in [0, 1), got {0}")]
    InvalidRatio(f64),
    #[error("target batch must be >= 1")]
    EmptyTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostReport {
    pub rollout_flops: f64,
    pub training_flops: f64,
    pub total_flops: f64,
    pub rollout_tokens: u64,
    pub training_tokens: u64,
}

impl CostReport {
    pub fn from_tokens(model: ModelSpec, rollout_tokens: u64, training_tokens: u64) -> Self {
        let rollout = rollout_flops(model, rollout_tokens);
        let training = training_flops(model, training_tokens);
        Self {
            rollout_flops: rollout,
            training_flops: training,
            total_flops: rollout + training,
            rollout_tokens,
            training_tokens,
        }
    }

    /// Sum two reports, recomputing FLOPs from the merged token tallies.
    pub fn merge(self, other: Self, model: ModelSpec) -> Self {
        Self::from_tokens(
            model,
            self.rollout_tokens + other.rollout_tokens,
            self.training_tokens + other.training_tokens,
        )
    }
}

pub fn rollout_flops(model: ModelSpec, n_tokens: u64) -> f64 {
    2.0 * model.n_params as f64 * n_tokens as f64
}

pub fn training_flops(model: ModelSpec, n_tokens: u64) -> f64 {
    6.0 * model.n_params as f64 * n_tokens as f64
}

/// Expected oversampling multiplier `1 / (1 - p0)` needed to collect a batch
/// of non-zero-accuracy queries.
pub fn inflation_factor(p0: f64) -> Result<f64, CostError> {
    if !(0.0..1.0).contains(&p0) {
        return Err(CostError::InvalidRatio(p0));
    }
    Ok(1.0 / (1.0 - p0))
}

/// Rollout cost counts every generated rollout; training cost only the kept ones.
pub fn step_cost(result: &StepResult, model: ModelSpec) -> CostReport {
    let rollout_tokens = result.observations.iter().map(|o| o.tokens()).sum();
    let training_tokens = result.groups.iter().map(|g| g.kept_tokens()).sum();
    CostReport::from_tokens(model, rollout_tokens, training_tokens)
}

/// Draw queries (each zero-accuracy with probability `p0`) until `target`
/// usable ones are collected, `trials` times; returns mean draws per usable
/// query.
pub fn simulate_oversampling<R: Rng + ?Sized>(
    p0: f64,
    target: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64, CostError> {
    inflation_factor(p0)?;
    if target == 0 || trials == 0 {
        return Err(CostError::EmptyTarget);
    }
    let mut draws = 0u64;
    for _ in 0..trials {
        let mut usable = 0;
        while usable < target {
            draws += 1;
            if rng.random::<f64>() >= p0 {
                usable += 1;
            }
        }
    }
    Ok(draws as f64 / (target * trials) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::{run_step_fixed, FixedMode};
    use crate::oracle::{LengthDist, QueryPool, SyntheticOracle};
    use crate::rng::substream;
    use crate::types::QueryId;
    use proptest::prelude::*;

    const M: ModelSpec = ModelSpec { n_params: 1_500_000_000 };

    #[test]
    fn flops_examples() {
        assert_eq!(rollout_flops(M, 0), 0.0);
        assert_eq!(rollout_flops(M, 1_000_000), 3e15);
        assert_eq!(rollout_flops(M, 2000), 2.0 * rollout_flops(M, 1000));
        assert_eq!(training_flops(M, 0), 0.0);
        assert_eq!(training_flops(M, 1_000_000), 9e15);
        assert_eq!(training_flops(M, 777), 3.0 * rollout_flops(M, 777));
    }

    #[test]
    fn inflation_examples() {
        assert_eq!(inflation_factor(0.0).unwrap(), 1.0);
        assert_eq!(inflation_factor(0.5).unwrap(), 2.0);
        assert!((inflation_factor(0.22).unwrap() - 1.2821).abs() < 1e-4);
        assert!(inflation_factor(1.0).is_err());
        assert!(inflation_factor(-0.1).is_err());
    }

    #[test]
    fn oversampling_matches_inflation() {
        let mean = simulate_oversampling(0.35, 64, 2000, &mut substream(1, &[])).unwrap();
        assert!((mean / inflation_factor(0.35).unwrap() - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn dapo_drops_dead_zone_tokens() {
        let pool = QueryPool::from_latent(
            vec![(QueryId::new("dead"), 0.0), (QueryId::new("live"), 0.5)],
            0,
        )
        .unwrap();
        let l = 300;
        let src = SyntheticOracle::new(pool, LengthDist::Constant { tokens: l }, 1).unwrap();
        let batch = [QueryId::new("dead"), QueryId::new("live")];
        let grpo = step_cost(&run_step_fixed(&batch, &mut src.clone(), 16, FixedMode::Grpo, 0).unwrap(), M);
        let dapo = step_cost(&run_step_fixed(&batch, &mut src.clone(), 16, FixedMode::DapoFilter, 0).unwrap(), M);
        assert_eq!(grpo.training_tokens, grpo.rollout_tokens);
        assert_eq!(dapo.rollout_tokens, grpo.rollout_tokens);
        // live query at p = 0.5 over 16 draws is mixed for this seed
        assert_eq!(dapo.training_tokens, dapo.rollout_tokens - 16 * l as u64);
        assert_eq!(dapo.total_flops, dapo.rollout_flops + dapo.training_flops);
    }

    proptest! {
        #[test]
        fn total_is_monotone(r in 0u64..1_000_000, t in 0u64..1_000_000, dr in 0u64..1000, dt in 0u64..1000) {
            let a = CostReport::from_tokens(M, r, t);
            let b = CostReport::from_tokens(M, r + dr, t + dt);
            prop_assert!(b.total_flops >= a.total_flops);
            prop_assert_eq!(a.total_flops, a.rollout_flops + a.training_flops);
        }
    }
}
