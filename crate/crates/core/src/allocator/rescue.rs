use super::{AllocError, BudgetLedger, Blocked};
use crate::config::AeroConfig;
use crate::oracle::RolloutSource;
use crate::types::{Phase, QueryId, RolloutRecord};

/// How an iterative rescue ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescueOutcome {
    /// An increment contained a correct rollout at this 1-based iteration.
    RescuedAt(u32),
    /// The pooled budget could not cover another increment.
    BudgetExhausted,
    /// `K_max` iterations ran, or another increment would exceed `n_max`.
    CapReached,
    /// The rollout source had nothing left for this query (trace replay).
    SourceExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescueReport {
    pub rollouts: Vec<RolloutRecord>,
    pub outcome: RescueOutcome,
    pub iterations: u32,
}

/// Resumable rescue for one query, advanced one increment at a time so the
/// scheduler can interleave queries round-robin over a shared ledger.
#[derive(Debug, Clone)]
pub struct RescueRun {
    query: QueryId,
    rollouts: Vec<RolloutRecord>,
    iterations: u32,
    outcome: Option<RescueOutcome>,
}

impl RescueRun {
    pub fn new(query: QueryId) -> Self {
        Self { query, rollouts: Vec::new(), iterations: 0, outcome: None }
    }

    pub fn query(&self) -> &QueryId {
        &self.query
    }

    pub fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    /// Run one increment of `n_extra` draws. Returns `true` once finished.
    pub fn advance<S: RolloutSource + ?Sized>(
        &mut self,
        source: &mut S,
        ledger: &mut BudgetLedger,
        cfg: &AeroConfig,
        step: u64,
    ) -> Result<bool, AllocError> {
        if self.outcome.is_some() {
            return Ok(true);
        }
        if self.iterations >= cfg.max_rescue_iterations {
            self.outcome = Some(RescueOutcome::CapReached);
            return Ok(true);
        }
        match ledger.reserve(&self.query, cfg.n_extra) {
            Err(Blocked::Budget) => {
                self.outcome = Some(RescueOutcome::BudgetExhausted);
                return Ok(true);
            }
            Err(Blocked::Cap) => {
                self.outcome = Some(RescueOutcome::CapReached);
                return Ok(true);
            }
            Ok(()) => {}
        }
        self.iterations += 1;
        let iteration = self.iterations;
        let mut drawn = 0;
        let mut hit = false;
        while drawn < cfg.n_extra {
            match source.draw(&self.query, step)? {
                Some(d) => {
                    hit |= d.correct;
                    self.rollouts.push(RolloutRecord::new(
                        self.query.clone(),
                        d.correct,
                        d.tokens,
                        Phase::Rescue(iteration),
                    )?);
                    drawn += 1;
                }
                None => break,
            }
        }
        if drawn < cfg.n_extra {
            ledger.release(&self.query, cfg.n_extra - drawn);
        }
        if hit {
            self.outcome = Some(RescueOutcome::RescuedAt(iteration));
        } else if drawn < cfg.n_extra {
            self.outcome = Some(RescueOutcome::SourceExhausted);
        }
        Ok(self.outcome.is_some())
    }

    pub fn finish(self) -> RescueReport {
        RescueReport {
            rollouts: self.rollouts,
            outcome: self.outcome.unwrap_or(RescueOutcome::CapReached),
            iterations: self.iterations,
        }
    }
}

/// Rescue a single query to completion: draw `n_extra` rollouts per
/// iteration until one increment contains a success, `K_max` iterations
/// have run, or the ledger refuses the next increment.
pub fn rescue<S: RolloutSource + ?Sized>(
    query: &QueryId,
    source: &mut S,
    ledger: &mut BudgetLedger,
    cfg: &AeroConfig,
    step: u64,
) -> Result<RescueReport, AllocError> {
    let mut run = RescueRun::new(query.clone());
    while !run.advance(source, ledger, cfg, step)? {}
    Ok(run.finish())
}
