use serde::{Deserialize, Serialize};

use super::aero::draw_exact;
use super::{AllocError, BudgetLedger, CuratedGroup, StepResult};
use crate::advantage::empirical_advantages;
use crate::oracle::RolloutSource;
use crate::types::{GroupObservation, Phase, QueryId, StratumLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedMode {
    /// Keep every rollout, dead zones included (with zero advantages).
    Grpo,
    /// Drop zero-variance groups after generation; their cost still counts.
    DapoFilter,
}

/// Fixed allocation: `n` rollouts for every query.
pub fn run_step_fixed<S: RolloutSource + ?Sized>(
    batch: &[QueryId],
    source: &mut S,
    n: u32,
    mode: FixedMode,
    step: u64,
) -> Result<StepResult, AllocError> {
    if n == 0 {
        return Err(AllocError::ZeroRollouts);
    }
    if batch.is_empty() {
        return Err(AllocError::EmptyBatch);
    }
    let mut ledger = BudgetLedger::new(0, n);
    let mut groups = Vec::with_capacity(batch.len());
    let mut observations = Vec::with_capacity(batch.len());
    let mut strata = Vec::with_capacity(batch.len());
    for q in batch {
        let rollouts = draw_exact(source, q, n, Phase::Exploration, step)?;
        ledger
            .record_unbudgeted(q, n)
            .map_err(|_| AllocError::WrongExploreCount { expected: n, found: ledger.count(q) as usize + n as usize })?;
        let obs = GroupObservation::new(q.clone(), rollouts)?;
        let stratum = StratumLabel::classify(obs.success_rate(), 0, n as u64);
        strata.push(stratum);
        let advantages = empirical_advantages(&obs.rewards())?;
        if !(mode == FixedMode::DapoFilter && advantages.is_dead_zone()) {
            groups.push(CuratedGroup {
                query_id: q.clone(),
                stratum,
                kept_rollouts: obs.rollouts().to_vec(),
                advantages,
                rescue_iterations_used: 0,
                rescued: false,
            });
        }
        observations.push(obs);
    }
    Ok(StepResult::assemble(step, groups, observations, ledger, strata))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{make_pool, DifficultySpec, LengthDist, SyntheticOracle};

    fn setup(spec: DifficultySpec, size: usize) -> (Vec<QueryId>, SyntheticOracle) {
        let pool = make_pool(&spec, size, 5).unwrap();
        let batch = pool.ids().cloned().collect();
        (batch, SyntheticOracle::new(pool, LengthDist::default(), 5).unwrap())
    }

    #[test]
    fn impossible_pool() {
        let (batch, src) = setup(DifficultySpec::point_mass(0.0), 10);
        let grpo = run_step_fixed(&batch, &mut src.clone(), 16, FixedMode::Grpo, 0).unwrap();
        assert_eq!(grpo.total_rollouts_trained, 160);
        assert!(grpo.groups.iter().all(|g| g.advantages.values().iter().all(|&v| v == 0.0)));
        let dapo = run_step_fixed(&batch, &mut src.clone(), 16, FixedMode::DapoFilter, 0).unwrap();
        assert_eq!(dapo.total_rollouts_trained, 0);
        assert_eq!(dapo.total_rollouts_generated, 160);
    }

    #[test]
    fn generation_counts_are_fixed() {
        let (batch, src) = setup(DifficultySpec::paperlike_1_5b(), 20);
        for n in [8, 16] {
            let r = run_step_fixed(&batch, &mut src.clone(), n, FixedMode::Grpo, 0).unwrap();
            assert_eq!(r.total_rollouts_generated, n as u64 * 20);
        }
        assert_eq!(run_step_fixed(&batch, &mut src.clone(), 0, FixedMode::Grpo, 0), Err(AllocError::ZeroRollouts));
    }

    #[test]
    fn dapo_keeps_only_mixed_groups() {
        let (batch, src) = setup(DifficultySpec::paperlike_1_5b(), 200);
        let grpo = run_step_fixed(&batch, &mut src.clone(), 16, FixedMode::Grpo, 3).unwrap();
        let dapo = run_step_fixed(&batch, &mut src.clone(), 16, FixedMode::DapoFilter, 3).unwrap();
        assert_eq!(grpo.observations, dapo.observations);
        let mixed = grpo.observations.iter().filter(|o| !o.is_dead_zone()).count() as u64;
        assert_eq!(dapo.total_rollouts_trained, 16 * mixed);
        assert!(mixed < 200);
    }
}
