use std::collections::BTreeMap;

use crate::types::QueryId;

/// Why a reservation was refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Blocked {
    Budget,
    Cap,
}

/// Pooled Stage II budget plus per-query rollout counts.
///
/// Exploration rollouts count toward a query's cap but not toward the pooled
/// budget, which covers only the rollouts left after Stage I.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetLedger {
    total_budget: u64,
    spent: u64,
    n_max: u32,
    per_query_counts: BTreeMap<QueryId, u32>,
}

impl BudgetLedger {
    pub fn new(total_budget: u64, n_max: u32) -> Self {
        Self { total_budget, spent: 0, n_max, per_query_counts: BTreeMap::new() }
    }

    pub fn total_budget(&self) -> u64 {
        self.total_budget
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }

    pub fn remaining(&self) -> u64 {
        self.total_budget - self.spent
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn count(&self, query: &QueryId) -> u32 {
        self.per_query_counts.get(query).copied().unwrap_or(0)
    }

    pub fn per_query_counts(&self) -> &BTreeMap<QueryId, u32> {
        &self.per_query_counts
    }

    /// Record unbudgeted (exploration or fixed) rollouts.
    pub fn record_unbudgeted(&mut self, query: &QueryId, n: u32) -> Result<(), Blocked> {
        let count = self.count(query);
        if count + n > self.n_max {
            return Err(Blocked::Cap);
        }
        self.per_query_counts.insert(query.clone(), count + n);
        Ok(())
    }

    /// Atomically reserve `n` budgeted rollouts for `query`.
    pub fn reserve(&mut self, query: &QueryId, n: u32) -> Result<(), Blocked> {
        if self.remaining() < n as u64 {
            return Err(Blocked::Budget);
        }
        let count = self.count(query);
        if count + n > self.n_max {
            return Err(Blocked::Cap);
        }
        self.spent += n as u64;
        self.per_query_counts.insert(query.clone(), count + n);
        Ok(())
    }

    /// Return part of a reservation that was never drawn.
    pub fn release(&mut self, query: &QueryId, n: u32) {
        let count = self.count(query);
        debug_assert!(n <= count && n as u64 <= self.spent);
        self.spent -= n as u64;
        self.per_query_counts.insert(query.clone(), count - n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserve_respects_budget_then_cap() {
        let q = QueryId::new("q");
        let mut ledger = BudgetLedger::new(6, 12);
        ledger.record_unbudgeted(&q, 8).unwrap();
        ledger.reserve(&q, 2).unwrap();
        ledger.reserve(&q, 2).unwrap();
        assert_eq!(ledger.reserve(&q, 2), Err(Blocked::Cap));
        assert_eq!(ledger.spent(), 4);
        let r = QueryId::new("r");
        ledger.reserve(&r, 2).unwrap();
        assert_eq!(ledger.reserve(&r, 2), Err(Blocked::Budget));
        ledger.release(&r, 1);
        assert_eq!((ledger.remaining(), ledger.count(&r)), (1, 1));
    }
}
