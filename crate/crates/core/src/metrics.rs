//! Batch- and run-level statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocator::{CuratedGroup, StepResult};
use crate::config::ModelSpec;
use crate::cost::{step_cost, CostReport};
use crate::types::GroupObservation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("input is empty")]
    Empty,
    #[error("problem {index} has {found} samples, expected {expected}")]
    Ragged { index: usize, expected: usize, found: usize },
    #[error("series lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("correlation needs at least two points")]
    TooShort,
    #[error("series is constant; correlation is undefined")]
    Constant,
    #[error("step {0} has a nonpositive maximum")]
    NonPositiveMax(usize),
    #[error("steps must be strictly increasing ({previous} then {step})")]
    NonIncreasingStep { previous: u64, step: u64 },
}

/// Fraction of groups with no correct rollout in their full tally.
pub fn zero_accuracy_ratio(groups: &[GroupObservation]) -> Result<f64, MetricsError> {
    if groups.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(groups.iter().filter(|g| g.correct() == 0).count() as f64 / groups.len() as f64)
}

/// Fraction of groups whose every rollout is correct.
pub fn all_correct_ratio(groups: &[GroupObservation]) -> Result<f64, MetricsError> {
    if groups.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(groups.iter().filter(|g| g.incorrect() == 0).count() as f64 / groups.len() as f64)
}

fn check_rect(outcomes: &[Vec<bool>]) -> Result<usize, MetricsError> {
    let n = outcomes.first().ok_or(MetricsError::Empty)?.len();
    if n == 0 {
        return Err(MetricsError::Empty);
    }
    if let Some((index, row)) = outcomes.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(MetricsError::Ragged { index, expected: n, found: row.len() });
    }
    Ok(n)
}

pub fn pass_at_n(outcomes: &[Vec<bool>]) -> Result<f64, MetricsError> {
    check_rect(outcomes)?;
    Ok(outcomes.iter().filter(|row| row.iter().any(|&c| c)).count() as f64 / outcomes.len() as f64)
}

pub fn avg_at_n(outcomes: &[Vec<bool>]) -> Result<f64, MetricsError> {
    let n = check_rect(outcomes)? as f64;
    let total: f64 = outcomes.iter().map(|row| row.iter().filter(|&&c| c).count() as f64 / n).sum();
    Ok(total / outcomes.len() as f64)
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(MetricsError::TooShort);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::Constant);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Divide both series by their per-step maximum.
pub fn normalized_scores(y1: &[f64], y2: &[f64]) -> Result<(Vec<f64>, Vec<f64>), MetricsError> {
    if y1.len() != y2.len() {
        return Err(MetricsError::LengthMismatch { left: y1.len(), right: y2.len() });
    }
    let mut a = Vec::with_capacity(y1.len());
    let mut b = Vec::with_capacity(y2.len());
    for (t, (&p, &q)) in y1.iter().zip(y2).enumerate() {
        let max = p.max(q);
        if max.is_nan() || max <= 0.0 {
            return Err(MetricsError::NonPositiveMax(t));
        }
        a.push(p / max);
        b.push(q / max);
    }
    Ok((a, b))
}

/// Mean |advantage| over every kept rollout.
pub fn mean_abs_advantage(groups: &[CuratedGroup]) -> Result<f64, MetricsError> {
    let n: usize = groups.iter().map(|g| g.advantages.len()).sum();
    if n == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(groups.iter().map(|g| g.advantages.abs_sum()).sum::<f64>() / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub generated: u64,
    pub trained: u64,
    pub zero_accuracy_ratio: f64,
    pub all_correct_ratio: f64,
    /// Zero when a filtering baseline kept nothing.
    pub mean_abs_advantage: f64,
    pub mean_group_size: f64,
    pub cost: CostReport,
}

impl StepRecord {
    pub fn from_step(result: &StepResult, model: ModelSpec) -> Result<Self, MetricsError> {
        Ok(Self {
            step: result.step,
            generated: result.total_rollouts_generated,
            trained: result.total_rollouts_trained,
            zero_accuracy_ratio: zero_accuracy_ratio(&result.observations)?,
            all_correct_ratio: all_correct_ratio(&result.observations)?,
            mean_abs_advantage: mean_abs_advantage(&result.groups).unwrap_or(0.0),
            mean_group_size: result.mean_group_size(),
            cost: step_cost(result, model),
        })
    }
}

/// Per-step records of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSeries {
    records: Vec<StepRecord>,
}

impl RunSeries {
    pub fn push(&mut self, record: StepRecord) -> Result<(), MetricsError> {
        if let Some(last) = self.records.last() {
            if record.step <= last.step {
                return Err(MetricsError::NonIncreasingStep { previous: last.step, step: record.step });
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn column(&self, f: impl Fn(&StepRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    pub fn mean_of(&self, f: impl Fn(&StepRecord) -> f64) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(f).sum::<f64>() / self.records.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::advantage::{bayesian_advantages_from_tally, empirical_advantages};
    use crate::rng::substream;
    use crate::types::{Phase, PosteriorState, QueryId, RolloutRecord, StratumLabel};
    use proptest::prelude::*;
    use rand::Rng;

    fn obs(c: usize, n: usize) -> GroupObservation {
        let rs = (0..n)
            .map(|i| RolloutRecord::new(QueryId::new("q"), i < c, 1, Phase::Exploration).unwrap())
            .collect();
        GroupObservation::new(QueryId::new("q"), rs).unwrap()
    }

    fn bernoulli(p: f64, n: usize, problems: usize, seed: u64) -> Vec<Vec<bool>> {
        let mut rng = substream(seed, &[]);
        (0..problems).map(|_| (0..n).map(|_| rng.random::<f64>() < p).collect()).collect()
    }

    #[test]
    fn zero_ratio_examples() {
        assert_eq!(zero_accuracy_ratio(&[obs(0, 8), obs(0, 8)]).unwrap(), 1.0);
        let groups: Vec<_> = (0..10).map(|i| obs(if i < 3 { 0 } else { 2 }, 8)).collect();
        assert_eq!(zero_accuracy_ratio(&groups).unwrap(), 0.3);
        assert_eq!(zero_accuracy_ratio(&[obs(1, 8)]).unwrap(), 0.0);
        assert_eq!(zero_accuracy_ratio(&[]), Err(MetricsError::Empty));
        assert_eq!(all_correct_ratio(&[obs(8, 8), obs(1, 8)]).unwrap(), 0.5);
    }

    #[test]
    fn pass_and_avg_examples() {
        let p = pass_at_n(&bernoulli(0.5, 8, 100_000, 1)).unwrap();
        assert!((p - (1.0 - 0.5f64.powi(8))).abs() < 0.002, "{p}");
        assert_eq!(pass_at_n(&vec![vec![false; 8]; 5]).unwrap(), 0.0);
        assert_eq!(pass_at_n(&[vec![false, true, false]]).unwrap(), 1.0);

        let a = avg_at_n(&bernoulli(0.3, 8, 100_000, 2)).unwrap();
        assert!((a - 0.3).abs() < 0.003, "{a}");
        assert_eq!(avg_at_n(&vec![vec![true; 4]; 3]).unwrap(), 1.0);
        assert_eq!(avg_at_n(&[vec![true; 4], vec![false; 4]]).unwrap(), 0.5);

        assert!(matches!(pass_at_n(&[vec![true; 3], vec![true; 2]]), Err(MetricsError::Ragged { index: 1, .. })));
        assert!(avg_at_n(&[]).is_err());
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.5, 7.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(MetricsError::Constant));
        assert_eq!(pearson(&[1.0], &[1.0]), Err(MetricsError::TooShort));
    }

    #[test]
    fn normalized_examples() {
        let (a, b) = normalized_scores(&[2.0, 4.0], &[2.0, 4.0]).unwrap();
        assert_eq!((a, b), (vec![1.0, 1.0], vec![1.0, 1.0]));
        let (a, b) = normalized_scores(&[2.0, 4.0], &[1.0, 4.0]).unwrap();
        assert_eq!((a, b), (vec![1.0, 1.0], vec![0.5, 1.0]));
        let (a3, b3) = normalized_scores(&[6.0, 12.0], &[3.0, 12.0]).unwrap();
        assert_eq!((a3, b3), (vec![1.0, 1.0], vec![0.5, 1.0]));
        assert_eq!(normalized_scores(&[0.0], &[-1.0]), Err(MetricsError::NonPositiveMax(0)));
    }

    fn group(adv: crate::advantage::AdvantageSet, n: usize) -> CuratedGroup {
        CuratedGroup {
            query_id: QueryId::new("q"),
            stratum: StratumLabel::Rescue,
            kept_rollouts: obs(0, n).into_rollouts(),
            advantages: adv,
            rescue_iterations_used: 0,
            rescued: false,
        }
    }

    #[test]
    fn mean_abs_advantage_examples() {
        let g = group(empirical_advantages(&[true, false]).unwrap(), 2);
        assert_eq!(mean_abs_advantage(&[g]).unwrap(), 1.0);
        let dead = group(empirical_advantages(&[false; 16]).unwrap(), 16);
        assert_eq!(mean_abs_advantage(&[dead]).unwrap(), 0.0);
        let bayes = group(bayesian_advantages_from_tally(&[false; 4], PosteriorState::uniform(), 0, 8).unwrap(), 4);
        assert!((mean_abs_advantage(&[bayes]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(mean_abs_advantage(&[]), Err(MetricsError::Empty));
    }

    #[test]
    fn series_steps_strictly_increase() {
        let rec = |step| StepRecord {
            step,
            generated: 0,
            trained: 0,
            zero_accuracy_ratio: 0.0,
            all_correct_ratio: 0.0,
            mean_abs_advantage: 0.0,
            mean_group_size: 0.0,
            cost: CostReport::default(),
        };
        let mut s = RunSeries::default();
        s.push(rec(0)).unwrap();
        s.push(rec(2)).unwrap();
        assert!(s.push(rec(2)).is_err());
        assert_eq!(s.len(), 2);
    }

    proptest! {
        #[test]
        fn pass_at_n_monotone_in_prefix(rows in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 8), 1..50), k in 1usize..8) {
            let short: Vec<Vec<bool>> = rows.iter().map(|r| r[..k].to_vec()).collect();
            prop_assert!(pass_at_n(&short).unwrap() <= pass_at_n(&rows).unwrap());
        }

        #[test]
        fn pearson_affine_invariant(
            pts in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            a in 0.1f64..10.0, b in -50.0f64..50.0,
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(r) = pearson(&x, &y) {
                let xt: Vec<f64> = x.iter().map(|v| a * v + b).collect();
                prop_assert!((pearson(&xt, &y).unwrap() - r).abs() < 1e-9);
            }
        }
    }
}
