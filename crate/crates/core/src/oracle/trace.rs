//! Newline-delimited JSON rollout traces.
//!
//! One record per line with exactly four fields:
//! `{"query_id":"q1","step":0,"correct":1,"tokens":512}`.
//! Steps are non-decreasing through the file; records for one
//! `(query_id, step)` are served in file order.

use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Draw, OracleError, RolloutSource};
use crate::types::QueryId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub query_id: QueryId,
    pub step: u64,
    pub correct: u8,
    pub tokens: u32,
}

pub fn write_trace<W: Write>(records: &[TraceRecord], mut out: W) -> Result<(), OracleError> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| OracleError::Io(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| OracleError::Io(e.to_string()))?;
    }
    out.flush().map_err(|e| OracleError::Io(e.to_string()))
}

/// Serves recorded outcomes back in file order.
#[derive(Debug, Clone, Default)]
pub struct ReplaySource {
    queues: HashMap<(QueryId, u64), VecDeque<Draw>>,
    step_queries: Vec<(u64, Vec<QueryId>)>,
}

impl ReplaySource {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, OracleError> {
        let mut src = ReplaySource::default();
        let mut previous: Option<u64> = None;
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| OracleError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TraceRecord = serde_json::from_str(&line)
                .map_err(|e| OracleError::MalformedTrace { line: line_no, message: e.to_string() })?;
            if rec.correct > 1 {
                return Err(OracleError::MalformedTrace {
                    line: line_no,
                    message: format!("correct must be 0 or 1, got {}", rec.correct),
                });
            }
            if rec.tokens == 0 {
                return Err(OracleError::MalformedTrace { line: line_no, message: "tokens must be >= 1".into() });
            }
            if let Some(prev) = previous {
                if rec.step < prev {
                    return Err(OracleError::OutOfOrderStep { line: line_no, step: rec.step, previous: prev });
                }
            }
            previous = Some(rec.step);
            if src.step_queries.last().map(|(s, _)| *s) != Some(rec.step) {
                src.step_queries.push((rec.step, Vec::new()));
            }
            let key = (rec.query_id.clone(), rec.step);
            let queue = src.queues.entry(key).or_default();
            if queue.is_empty() {
                let (_, qs) = src.step_queries.last_mut().expect("pushed above");
                if !qs.contains(&rec.query_id) {
                    qs.push(rec.query_id.clone());
                }
            }
            queue.push_back(Draw { correct: rec.correct == 1, tokens: rec.tokens });
        }
        Ok(src)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, OracleError> {
        let file = std::fs::File::open(path).map_err(|e| OracleError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(std::io::BufReader::new(file))
    }

    /// Steps present in the trace, ascending.
    pub fn steps(&self) -> Vec<u64> {
        self.step_queries.iter().map(|(s, _)| *s).collect()
    }

    /// Queries with records at `step`, in first-appearance order.
    pub fn queries_at(&self, step: u64) -> &[QueryId] {
        self.step_queries
            .iter()
            .find(|(s, _)| *s == step)
            .map(|(_, q)| q.as_slice())
            .unwrap_or(&[])
    }

    pub fn remaining(&self, query: &QueryId, step: u64) -> usize {
        self.queues.get(&(query.clone(), step)).map_or(0, VecDeque::len)
    }
}

impl RolloutSource for ReplaySource {
    fn draw(&mut self, query: &QueryId, step: u64) -> Result<Option<Draw>, OracleError> {
        Ok(self.queues.get_mut(&(query.clone(), step)).and_then(VecDeque::pop_front))
    }
}

/// Wraps a source and records every outcome it serves.
#[derive(Debug)]
pub struct RecordingSource<S> {
    inner: S,
    records: Vec<TraceRecord>,
    enabled: bool,
}

impl<S: RolloutSource> RecordingSource<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, records: Vec::new(), enabled: true }
    }

    /// Forward draws without recording them.
    pub fn passthrough(inner: S) -> Self {
        Self { inner, records: Vec::new(), enabled: false }
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut S {
        &mut self.inner
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn into_parts(self) -> (S, Vec<TraceRecord>) {
        (self.inner, self.records)
    }
}

impl<S: RolloutSource> RolloutSource for RecordingSource<S> {
    fn draw(&mut self, query: &QueryId, step: u64) -> Result<Option<Draw>, OracleError> {
        let out = self.inner.draw(query, step)?;
        if let (Some(d), true) = (out, self.enabled) {
            self.records.push(TraceRecord {
                query_id: query.clone(),
                step,
                correct: u8::from(d.correct),
                tokens: d.tokens,
            });
        }
        Ok(out)
    }
}
