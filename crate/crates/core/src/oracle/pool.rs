use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::{Draw, LengthDist, OracleError, RolloutSource};
use crate::rng::{self, Stream};
use crate::types::QueryId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentKind {
    PointMass { p: f64 },
    Beta { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    #[serde(flatten)]
    pub kind: ComponentKind,
}

/// Mixture over latent success probabilities. `unsolvable_mass` is the
/// weight of a p = 0 point mass; together with the component weights it
/// must sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultySpec {
    #[serde(default)]
    pub unsolvable_mass: f64,
    #[serde(default)]
    pub components: Vec<MixtureComponent>,
}

impl DifficultySpec {
    pub const PAPERLIKE_1_5B: &'static str = "paperlike-1.5b";

    pub fn point_mass(p: f64) -> Self {
        Self {
            unsolvable_mass: 0.0,
            components: vec![MixtureComponent { weight: 1.0, kind: ComponentKind::PointMass { p } }],
        }
    }

    /// Calibrated so that 8 fixed rollouts leave ~35% of queries with zero
    /// correct answers: 0.12 + 0.88 * E[(1-p)^8 | Beta(0.9, 2.4)] = 0.3520.
    pub fn paperlike_1_5b() -> Self {
        Self {
            unsolvable_mass: 0.12,
            components: vec![MixtureComponent { weight: 0.88, kind: ComponentKind::Beta { a: 0.9, b: 2.4 } }],
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            Self::PAPERLIKE_1_5B => Some(Self::paperlike_1_5b()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |m: String| Err(OracleError::InvalidSpec(m));
        if !(0.0..=1.0).contains(&self.unsolvable_mass) {
            return bad(format!("unsolvable_mass {} outside [0, 1]", self.unsolvable_mass));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !(c.weight >= 0.0 && c.weight.is_finite()) {
                return bad(format!("component {i} weight {} is not a nonnegative real", c.weight));
            }
            match c.kind {
                ComponentKind::PointMass { p } if !(0.0..=1.0).contains(&p) => {
                    return bad(format!("component {i} point mass p={p} outside [0, 1]"));
                }
                ComponentKind::Beta { a, b } if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) => {
                    return bad(format!("component {i} Beta({a}, {b}) needs positive shapes"));
                }
                _ => {}
            }
        }
        let total = self.unsolvable_mass + self.components.iter().map(|c| c.weight).sum::<f64>();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("weights sum to {total}, expected 1"));
        }
        Ok(())
    }

    /// E_p[(1-p)^n] over the mixture: the expected fraction of queries with no
    /// correct rollout among n fixed draws. Beta moments use the exact
    /// product form prod_j (b + j) / (a + b + j).
    pub fn expected_zero_accuracy(&self, n: u32) -> f64 {
        let comp: f64 = self
            .components
            .iter()
            .map(|c| {
                let moment = match c.kind {
                    ComponentKind::PointMass { p } => (1.0 - p).powi(n as i32),
                    ComponentKind::Beta { a, b } => (0..n).map(|j| (b + j as f64) / (a + b + j as f64)).product(),
                };
                c.weight * moment
            })
            .sum();
        self.unsolvable_mass + comp
    }
}

/// Queries with their hidden success probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPool {
    queries: Vec<(QueryId, f64)>,
    index: HashMap<QueryId, usize>,
    seed: u64,
}

impl QueryPool {
    pub fn from_latent(queries: Vec<(QueryId, f64)>, seed: u64) -> Result<Self, OracleError> {
        if let Some((q, p)) = queries.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
            return Err(OracleError::InvalidSpec(format!("query {q} has latent p={p} outside [0, 1]")));
        }
        let index = queries.iter().enumerate().map(|(i, (q, _))| (q.clone(), i)).collect::<HashMap<_, _>>();
        if index.len() != queries.len() {
            return Err(OracleError::InvalidSpec("duplicate query ids".into()));
        }
        Ok(Self { queries, index, seed })
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ids(&self) -> impl Iterator<Item = &QueryId> {
        self.queries.iter().map(|(q, _)| q)
    }

    pub fn id_at(&self, i: usize) -> &QueryId {
        &self.queries[i].0
    }

    pub fn position(&self, id: &QueryId) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Oracle-side accessor; the allocator never calls this.
    pub fn latent_p(&self, id: &QueryId) -> Option<f64> {
        self.position(id).map(|i| self.queries[i].1)
    }

    pub fn latent_ps(&self) -> impl Iterator<Item = f64> + '_ {
        self.queries.iter().map(|(_, p)| *p)
    }
}

pub fn make_pool(spec: &DifficultySpec, size: usize, seed: u64) -> Result<QueryPool, OracleError> {
    spec.validate()?;
    if size == 0 {
        return Err(OracleError::InvalidSpec("pool size must be >= 1".into()));
    }
    let betas = spec
        .components
        .iter()
        .map(|c| match c.kind {
            ComponentKind::Beta { a, b } => Beta::new(a, b).map(Some).map_err(|e| OracleError::InvalidSpec(e.to_string())),
            ComponentKind::PointMass { .. } => Ok(None),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut stream = rng::substream(seed, &[rng::tag::POOL]);
    let queries = (0..size)
        .map(|i| {
            let mut pick: f64 = stream.random();
            let mut p = 0.0;
            if pick >= spec.unsolvable_mass {
                pick -= spec.unsolvable_mass;
                // last component absorbs rounding in the weights
                let last = spec.components.len() - 1;
                let idx = spec
                    .components
                    .iter()
                    .position(|c| {
                        let hit = pick < c.weight;
                        pick -= c.weight;
                        hit
                    })
                    .unwrap_or(last);
                p = match (spec.components[idx].kind, &betas[idx]) {
                    (ComponentKind::PointMass { p }, _) => p,
                    (_, Some(beta)) => beta.sample(&mut stream),
                    _ => unreachable!("beta component without sampler"),
                };
            }
            (QueryId::new(format!("q{i}")), p)
        })
        .collect();
    QueryPool::from_latent(queries, seed)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Logistic drift p' = sigmoid(logit(p) + eta * signal); p = 0 and p = 1 stay put.
pub fn apply_improvement(pool: &QueryPool, signal: f64, eta: f64) -> Result<QueryPool, OracleError> {
    if !(signal >= 0.0 && eta >= 0.0 && signal.is_finite() && eta.is_finite()) {
        return Err(OracleError::InvalidImprovement { signal, eta });
    }
    let shift = eta * signal;
    let mut next = pool.clone();
    if shift == 0.0 {
        return Ok(next);
    }
    for (_, p) in next.queries.iter_mut() {
        if *p > 0.0 && *p < 1.0 {
            *p = logistic((*p / (1.0 - *p)).ln() + shift);
        }
    }
    Ok(next)
}

/// Bernoulli policy over a [`QueryPool`]. Each (query, step) pair owns an
/// independent stream, so draw order across queries does not matter.
#[derive(Debug, Clone)]
pub struct SyntheticOracle {
    pool: QueryPool,
    lengths: LengthDist,
    seed: u64,
    step: u64,
    streams: HashMap<usize, Stream>,
}

impl SyntheticOracle {
    pub fn new(pool: QueryPool, lengths: LengthDist, seed: u64) -> Result<Self, OracleError> {
        Ok(Self { pool, lengths: lengths.validate()?, seed, step: 0, streams: HashMap::new() })
    }

    pub fn pool(&self) -> &QueryPool {
        &self.pool
    }

    /// Replace the pool (e.g. after drift). Open streams are kept.
    pub fn set_pool(&mut self, pool: QueryPool) {
        self.pool = pool;
    }

    /// Sample one rollout outcome for `query`.
    pub fn sample(&mut self, query: &QueryId, step: u64) -> Result<Draw, OracleError> {
        let idx = self.pool.position(query).ok_or_else(|| OracleError::UnknownQuery(query.clone()))?;
        if step != self.step {
            self.streams.clear();
            self.step = step;
        }
        let p = self.pool.queries[idx].1;
        let seed = self.seed;
        let stream = self
            .streams
            .entry(idx)
            .or_insert_with(|| rng::substream(seed, &[rng::tag::ORACLE, step, idx as u64]));
        let correct = stream.random::<f64>() < p;
        let tokens = match self.lengths {
            LengthDist::Constant { tokens } => tokens,
            LengthDist::Uniform { min, max } => stream.random_range(min..=max),
        };
        Ok(Draw { correct, tokens })
    }
}

impl RolloutSource for SyntheticOracle {
    fn draw(&mut self, query: &QueryId, step: u64) -> Result<Option<Draw>, OracleError> {
        self.sample(query, step).map(Some)
    }
}
