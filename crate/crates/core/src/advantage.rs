//! Group-relative advantages.
//!
//! Empirical mode standardizes each binary reward by the group's mean and
//! population standard deviation. When every reward in a group is equal the
//! standard deviation is zero and every advantage collapses to zero; such
//! groups are flagged as dead zones. Bayesian mode replaces the empirical
//! mean by the Beta posterior mean `(c + alpha0) / (n + alpha0 + beta0)` and
//! uses the plug-in Bernoulli deviation `sqrt(u~ (1 - u~))`, which is never
//! zero, so no advantage vanishes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{PosteriorState, TypeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdvantageError {
    #[error("reward list is empty")]
    Empty,
    #[error("invalid posterior counts: {0}")]
    Counts(#[from] TypeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdvantageMode {
    Empirical,
    Bayesian,
}

/// Per-rollout advantages aligned with a group's rollouts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageSet {
    values: Vec<f64>,
    mode: AdvantageMode,
    mean_used: f64,
    std_used: f64,
}

impl AdvantageSet {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> AdvantageMode {
        self.mode
    }

    pub fn mean_used(&self) -> f64 {
        self.mean_used
    }

    pub fn std_used(&self) -> f64 {
        self.std_used
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Empirical set whose standard deviation vanished (all advantages zero).
    pub fn is_dead_zone(&self) -> bool {
        self.mode == AdvantageMode::Empirical && self.std_used == 0.0
    }

    pub fn abs_sum(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// Mean and population standard deviation of a binary reward list.
pub fn empirical_stats(rewards: &[bool]) -> Result<(f64, f64), AdvantageError> {
    if rewards.is_empty() {
        return Err(AdvantageError::Empty);
    }
    let n = rewards.len() as f64;
    let correct = rewards.iter().filter(|&&r| r).count() as f64;
    let mean = correct / n;
    // squared deviations summed per reward value, so the result does not
    // depend on rollout order
    let var = (correct * (1.0 - mean).powi(2) + (n - correct) * mean.powi(2)) / n;
    Ok((mean, var.sqrt()))
}

pub fn empirical_advantages(rewards: &[bool]) -> Result<AdvantageSet, AdvantageError> {
    let (mean, std) = empirical_stats(rewards)?;
    let values = if std > 0.0 {
        rewards.iter().map(|&r| (f64::from(u8::from(r)) - mean) / std).collect()
    } else {
        vec![0.0; rewards.len()]
    };
    Ok(AdvantageSet { values, mode: AdvantageMode::Empirical, mean_used: mean, std_used: std })
}

/// Conjugate update: Beta(alpha + c, beta + n - c).
pub fn posterior_update(prior: PosteriorState, correct: u64, total: u64) -> Result<PosteriorState, AdvantageError> {
    if correct > total {
        return Err(TypeError::CountOverflow { correct, total }.into());
    }
    Ok(PosteriorState::new(
        prior.alpha() + correct as f64,
        prior.beta() + (total - correct) as f64,
    )?)
}

pub fn posterior_mean(state: PosteriorState) -> f64 {
    state.alpha() / (state.alpha() + state.beta())
}

/// Bayesian advantages with the posterior built from the rewards themselves.
pub fn bayesian_advantages(rewards: &[bool], prior: PosteriorState) -> Result<AdvantageSet, AdvantageError> {
    let correct = rewards.iter().filter(|&&r| r).count() as u64;
    bayesian_advantages_from_tally(rewards, prior, correct, rewards.len() as u64)
}

/// Bayesian advantages for `rewards` using an externally observed tally
/// `(correct, total)`. Curated dead-zone groups keep a subset of their
/// rollouts but smooth with the full tally.
pub fn bayesian_advantages_from_tally(
    rewards: &[bool],
    prior: PosteriorState,
    correct: u64,
    total: u64,
) -> Result<AdvantageSet, AdvantageError> {
    if rewards.is_empty() {
        return Err(AdvantageError::Empty);
    }
    let mean = posterior_mean(posterior_update(prior, correct, total)?);
    let std = (mean * (1.0 - mean)).sqrt();
    let values = rewards.iter().map(|&r| (f64::from(u8::from(r)) - mean) / std).collect();
    Ok(AdvantageSet { values, mode: AdvantageMode::Bayesian, mean_used: mean, std_used: std })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bits(s: &[u8]) -> Vec<bool> {
        s.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn stats_examples() {
        assert_eq!(empirical_stats(&bits(&[1, 0, 1, 0])).unwrap(), (0.5, 0.5));
        assert_eq!(empirical_stats(&[false; 8]).unwrap(), (0.0, 0.0));
        let (u, s) = empirical_stats(&bits(&[1, 0, 0, 0])).unwrap();
        assert_eq!(u, 0.25);
        assert_abs_diff_eq!(s, 0.1875f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s, 0.43301, epsilon = 1e-5);
        assert_eq!(empirical_stats(&[]), Err(AdvantageError::Empty));
    }

    #[test]
    fn empirical_examples() {
        assert_eq!(empirical_advantages(&bits(&[1, 0])).unwrap().values(), &[1.0, -1.0]);

        let dead = empirical_advantages(&[false; 8]).unwrap();
        assert_eq!(dead.values(), &[0.0; 8]);
        assert!(dead.is_dead_zone());

        let set = empirical_advantages(&bits(&[1, 1, 1, 0])).unwrap();
        let v = set.values();
        for &x in &v[..3] {
            assert_abs_diff_eq!(x, 0.57735, epsilon = 1e-5);
        }
        assert_abs_diff_eq!(v[3], -1.73205, epsilon = 1e-5);
        assert_abs_diff_eq!(v.iter().sum::<f64>(), 0.0, epsilon = 1e-12);
        assert!(!set.is_dead_zone());
        assert!(empirical_advantages(&[]).is_err());
    }

    #[test]
    fn posterior_update_examples() {
        let uni = PosteriorState::uniform();
        let p = posterior_update(uni, 0, 8).unwrap();
        assert_eq!((p.alpha(), p.beta()), (1.0, 9.0));
        assert_eq!(posterior_update(uni, 0, 0).unwrap(), uni);
        let p = posterior_update(PosteriorState::new(2.0, 3.0).unwrap(), 4, 6).unwrap();
        assert_eq!((p.alpha(), p.beta()), (6.0, 5.0));
        assert!(posterior_update(uni, 9, 8).is_err());
    }

    #[test]
    fn posterior_mean_examples() {
        let uni = PosteriorState::uniform();
        let mean = |c, n| posterior_mean(posterior_update(uni, c, n).unwrap());
        assert_abs_diff_eq!(mean(0, 8), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(mean(8, 8), 0.9, epsilon = 1e-15);
        assert_eq!(mean(4, 8), 0.5);
    }

    #[test]
    fn bayesian_examples() {
        let uni = PosteriorState::uniform();
        let fail = bayesian_advantages(&[false; 8], uni).unwrap();
        assert_eq!(fail.mode(), AdvantageMode::Bayesian);
        assert_abs_diff_eq!(fail.std_used(), 0.3, epsilon = 1e-15);
        for &v in fail.values() {
            assert_abs_diff_eq!(v, -1.0 / 3.0, epsilon = 1e-12);
        }
        let pass = bayesian_advantages(&[true; 8], uni).unwrap();
        for &v in pass.values() {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-12);
        }
        let bal = bayesian_advantages(&bits(&[1, 0]), uni).unwrap();
        assert_eq!(bal.mean_used(), 0.5);
        assert_eq!(bal.values(), &[1.0, -1.0]);
        assert!(bayesian_advantages(&[], uni).is_err());
    }

    #[test]
    fn tally_overrides_subsample() {
        // four kept out of an all-fail group of 12
        let set = bayesian_advantages_from_tally(&[false; 4], PosteriorState::uniform(), 0, 12).unwrap();
        assert_eq!(set.len(), 4);
        assert_abs_diff_eq!(set.mean_used(), 1.0 / 14.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn population_std_is_bernoulli(flags in proptest::collection::vec(any::<bool>(), 1..128)) {
            let (u, s) = empirical_stats(&flags).unwrap();
            prop_assert!((s - (u * (1.0 - u)).sqrt()).abs() <= 1e-12);
        }

        #[test]
        fn mixed_group_is_centered_two_valued(flags in proptest::collection::vec(any::<bool>(), 2..128)) {
            let c = flags.iter().filter(|&&f| f).count();
            prop_assume!(c > 0 && c < flags.len());
            let set = empirical_advantages(&flags).unwrap();
            prop_assert!(set.values().iter().sum::<f64>().abs() <= 1e-12);
            let u = set.mean_used();
            let (a_pos, a_neg) = ((1.0 - u) / set.std_used(), -u / set.std_used());
            for (&f, &v) in flags.iter().zip(set.values()) {
                let expected = if f { a_pos } else { a_neg };
                prop_assert!((v - expected).abs() <= 1e-12);
                prop_assert!((f && v > 0.0) || (!f && v < 0.0));
            }
        }

        #[test]
        fn bayesian_never_vanishes(
            flags in proptest::collection::vec(any::<bool>(), 1..128),
            a0 in 0.05f64..5.0, b0 in 0.05f64..5.0,
        ) {
            let prior = PosteriorState::new(a0, b0).unwrap();
            let set = bayesian_advantages(&flags, prior).unwrap();
            let m = set.mean_used();
            prop_assert!(m > 0.0 && m < 1.0);
            let floor = m.min(1.0 - m) / set.std_used();
            for (&f, &v) in flags.iter().zip(set.values()) {
                prop_assert!(v.is_finite() && v.abs() >= floor * (1.0 - 1e-12));
                prop_assert!((f && v > 0.0) || (!f && v < 0.0));
            }
        }

        #[test]
        fn advantages_permute_with_rewards(
            flags in proptest::collection::vec(any::<bool>(), 1..32),
            rot in 0usize..32,
        ) {
            let mut rotated = flags.clone();
            let r = rot % flags.len();
            rotated.rotate_left(r);
            for mode in [0, 1] {
                let run = |f: &[bool]| if mode == 0 {
                    empirical_advantages(f).unwrap()
                } else {
                    bayesian_advantages(f, PosteriorState::uniform()).unwrap()
                };
                let mut base = run(&flags).values().to_vec();
                base.rotate_left(r);
                prop_assert_eq!(base, run(&rotated).values().to_vec());
            }
        }
    }
}
