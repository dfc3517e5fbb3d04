use super::{
    curate_dead_zone, pair_rescued, reject_downsample, stratify, AllocError, BudgetLedger, CuratedGroup, RescueOutcome,
    RescueRun, StepResult,
};
use crate::advantage::{bayesian_advantages_from_tally, empirical_advantages};
use crate::config::AeroConfig;
use crate::oracle::RolloutSource;
use crate::rng::{self, Stream};
use crate::types::{GroupObservation, Phase, QueryId, RolloutRecord, StratumLabel};

pub(super) fn draw_exact<S: RolloutSource + ?Sized>(
    source: &mut S,
    query: &QueryId,
    n: u32,
    phase: Phase,
    step: u64,
) -> Result<Vec<RolloutRecord>, AllocError> {
    let mut out = Vec::with_capacity(n as usize);
    for got in 0..n {
        let d = source
            .draw(query, step)?
            .ok_or_else(|| AllocError::SourceExhausted { query: query.clone(), needed: n, got })?;
        out.push(RolloutRecord::new(query.clone(), d.correct, d.tokens, phase)?);
    }
    Ok(out)
}

fn empirical_group(
    query_id: &QueryId,
    stratum: StratumLabel,
    kept: Vec<RolloutRecord>,
    rescue_iterations_used: u32,
    rescued: bool,
) -> Result<CuratedGroup, AllocError> {
    let rewards: Vec<bool> = kept.iter().map(|r| r.correct()).collect();
    Ok(CuratedGroup {
        query_id: query_id.clone(),
        stratum,
        advantages: empirical_advantages(&rewards)?,
        kept_rollouts: kept,
        rescue_iterations_used,
        rescued,
    })
}

fn curate_rescue(
    full: &GroupObservation,
    exploration_len: usize,
    outcome: RescueOutcome,
    iterations: u32,
    cfg: &AeroConfig,
    rng: &mut Stream,
) -> Result<CuratedGroup, AllocError> {
    let (explore, rescued) = full.rollouts().split_at(exploration_len);
    if let RescueOutcome::RescuedAt(_) = outcome {
        let pair = pair_rescued(explore, rescued, rng)?;
        if !pair.degenerate {
            return empirical_group(full.query_id(), StratumLabel::Rescue, pair.kept, iterations, true);
        }
        let rewards: Vec<bool> = pair.kept.iter().map(|r| r.correct()).collect();
        let advantages = bayesian_advantages_from_tally(&rewards, cfg.prior(), full.correct(), full.len() as u64)?;
        return Ok(CuratedGroup {
            query_id: full.query_id().clone(),
            stratum: StratumLabel::Rescue,
            kept_rollouts: pair.kept,
            advantages,
            rescue_iterations_used: iterations,
            rescued: true,
        });
    }
    if full.is_dead_zone() {
        return curate_dead_zone(full, cfg, StratumLabel::Rescue, iterations, rng);
    }
    // S > 0: the group already had successes but no increment hit; treat
    // the full tally like a low-partial group.
    let kept = reject_downsample(full, cfg.k, rng)?;
    empirical_group(full.query_id(), StratumLabel::Rescue, kept, iterations, false)
}

/// One adaptive allocation step over `batch`.
///
/// Rescue increments are scheduled round-robin: each pass gives every
/// still-active rescue query one increment, in batch order, until all have
/// finished. Curation randomness comes from per-query substreams of
/// `cfg.seed`, independent of the rollout source.
pub fn run_step_aero<S: RolloutSource + ?Sized>(
    batch: &[QueryId],
    source: &mut S,
    cfg: &AeroConfig,
    step: u64,
) -> Result<StepResult, AllocError> {
    let cfg = cfg.clone().validate()?;
    if batch.is_empty() {
        return Err(AllocError::EmptyBatch);
    }
    let budget = (cfg.n_total - cfg.n_explore) as u64 * batch.len() as u64;
    let mut ledger = BudgetLedger::new(budget, cfg.n_max);

    // Stage I
    let mut explored = Vec::with_capacity(batch.len());
    let mut strata = Vec::with_capacity(batch.len());
    for q in batch {
        let rollouts = draw_exact(source, q, cfg.n_explore, Phase::Exploration, step)?;
        ledger.record_unbudgeted(q, cfg.n_explore).map_err(|_| AllocError::WrongExploreCount {
            expected: cfg.n_explore,
            found: ledger.count(q) as usize + cfg.n_explore as usize,
        })?;
        let obs = GroupObservation::new(q.clone(), rollouts)?;
        strata.push(stratify(&obs, &cfg)?);
        explored.push(obs);
    }

    // Stage II rescue, round-robin over the pooled ledger
    let mut runs: Vec<Option<RescueRun>> = batch
        .iter()
        .zip(&strata)
        .map(|(q, s)| (*s == StratumLabel::Rescue).then(|| RescueRun::new(q.clone())))
        .collect();
    loop {
        let mut active = false;
        for run in runs.iter_mut().flatten() {
            if !run.is_done() {
                active |= !run.advance(source, &mut ledger, &cfg, step)?;
            }
        }
        if !active {
            break;
        }
    }

    // Stage II curation
    let mut groups = Vec::with_capacity(batch.len());
    let mut observations = Vec::with_capacity(batch.len());
    for (i, ((obs, stratum), run)) in explored.into_iter().zip(&strata).zip(runs).enumerate() {
        let mut rng = rng::substream(cfg.seed, &[rng::tag::CURATION, step, i as u64]);
        let (full, group) = match run {
            Some(run) => {
                let report = run.finish();
                let explore_len = obs.len();
                let mut all = obs.into_rollouts();
                all.extend(report.rollouts);
                let full = GroupObservation::new(batch[i].clone(), all)?;
                let g = curate_rescue(&full, explore_len, report.outcome, report.iterations, &cfg, &mut rng)?;
                (full, g)
            }
            None if obs.is_dead_zone() => {
                let g = curate_dead_zone(&obs, &cfg, *stratum, 0, &mut rng)?;
                (obs, g)
            }
            None if *stratum == StratumLabel::LowPartial => {
                let kept = reject_downsample(&obs, cfg.k, &mut rng)?;
                let g = empirical_group(obs.query_id(), *stratum, kept, 0, false)?;
                (obs, g)
            }
            None => {
                let g = empirical_group(obs.query_id(), *stratum, obs.rollouts().to_vec(), 0, false)?;
                (obs, g)
            }
        };
        observations.push(full);
        groups.push(group);
    }

    Ok(StepResult::assemble(step, groups, observations, ledger, strata))
}
