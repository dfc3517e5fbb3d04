use rand::seq::index;
use rand::Rng;

use super::{AllocError, CuratedGroup};
use crate::advantage::bayesian_advantages_from_tally;
use crate::config::AeroConfig;
use crate::types::{GroupObservation, RolloutRecord, StratumLabel};

/// Stage I stratum of an `n_explore`-rollout observation.
pub fn stratify(obs: &GroupObservation, cfg: &AeroConfig) -> Result<StratumLabel, AllocError> {
    if obs.len() != cfg.n_explore as usize {
        return Err(AllocError::WrongExploreCount { expected: cfg.n_explore, found: obs.len() });
    }
    Ok(StratumLabel::classify(obs.success_rate(), cfg.rescue_threshold as u64, cfg.n_explore as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedKeep {
    pub kept: Vec<RolloutRecord>,
    /// No incorrect rollout existed; the group keeps a lone correct rollout
    /// and must use Bayesian advantages.
    pub degenerate: bool,
}

/// Keep the first correct rescue rollout plus one incorrect rollout drawn
/// uniformly from every incorrect rollout of the query.
pub fn pair_rescued<R: Rng + ?Sized>(
    exploration: &[RolloutRecord],
    rescue: &[RolloutRecord],
    rng: &mut R,
) -> Result<PairedKeep, AllocError> {
    let first_correct = rescue.iter().find(|r| r.correct()).ok_or(AllocError::NoCorrectRescue)?;
    let incorrect: Vec<&RolloutRecord> = exploration.iter().chain(rescue).filter(|r| !r.correct()).collect();
    if incorrect.is_empty() {
        return Ok(PairedKeep { kept: vec![first_correct.clone()], degenerate: true });
    }
    let pick = incorrect[rng.random_range(0..incorrect.len())];
    Ok(PairedKeep { kept: vec![first_correct.clone(), pick.clone()], degenerate: false })
}

/// Keep all `c` correct rollouts and `min(k*c, m)` incorrect ones chosen
/// uniformly without replacement. Original rollout order is preserved.
pub fn reject_downsample<R: Rng + ?Sized>(
    obs: &GroupObservation,
    k: u32,
    rng: &mut R,
) -> Result<Vec<RolloutRecord>, AllocError> {
    let c = obs.correct() as usize;
    if c == 0 {
        return Err(AllocError::NoCorrectForDownsample);
    }
    let incorrect_pos: Vec<usize> =
        obs.rollouts().iter().enumerate().filter(|(_, r)| !r.correct()).map(|(i, _)| i).collect();
    let want = (k as usize).saturating_mul(c).min(incorrect_pos.len());
    let mut keep = vec![false; obs.len()];
    for (i, r) in obs.rollouts().iter().enumerate() {
        keep[i] = r.correct();
    }
    for j in index::sample(rng, incorrect_pos.len(), want) {
        keep[incorrect_pos[j]] = true;
    }
    Ok(obs.rollouts().iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r.clone()).collect())
}

/// Keep `min(zero_adv_retain, n)` rollouts of an all-same-reward group at
/// random; advantages are Bayesian and smoothed with the full (c, n) tally.
pub fn curate_dead_zone<R: Rng + ?Sized>(
    obs: &GroupObservation,
    cfg: &AeroConfig,
    stratum: StratumLabel,
    rescue_iterations_used: u32,
    rng: &mut R,
) -> Result<CuratedGroup, AllocError> {
    if !obs.is_dead_zone() {
        return Err(AllocError::MixedDeadZone { correct: obs.correct(), total: obs.len() as u64 });
    }
    let retain = (cfg.zero_adv_retain as usize).min(obs.len());
    let mut picks = index::sample(rng, obs.len(), retain).into_vec();
    picks.sort_unstable();
    let kept: Vec<RolloutRecord> = picks.into_iter().map(|i| obs.rollouts()[i].clone()).collect();
    let rewards: Vec<bool> = kept.iter().map(|r| r.correct()).collect();
    let advantages = bayesian_advantages_from_tally(&rewards, cfg.prior(), obs.correct(), obs.len() as u64)?;
    Ok(CuratedGroup {
        query_id: obs.query_id().clone(),
        stratum,
        kept_rollouts: kept,
        advantages,
        rescue_iterations_used,
        rescued: false,
    })
}
