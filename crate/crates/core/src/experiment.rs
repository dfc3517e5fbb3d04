//! Multi-step experiment runner and report writers used by the `aero` CLI.
//!
//! An experiment is described by a TOML document:
//!
//! ```toml
//! name = "aero-1.5b"
//! seed = 7
//! batch_size = 256
//! steps = 20
//!
//! [method]
//! kind = "aero"            # or "grpo" / "dapo" (with n = 16) / "grpo_reduced" (n = 5.12)
//!
//! [aero]                   # AeroConfig keys; its seed is replaced by the top-level seed
//! n_extra = 2
//!
//! [pool]
//! kind = "preset"          # or "mixture" / "trace"
//! name = "paperlike-1.5b"
//! size = 4096
//!
//! [tokens]
//! kind = "constant"
//! tokens = 512
//!
//! [model]
//! n_params = 1500000000
//!
//! [improvement]
//! kind = "off"             # or "logistic" with eta = 0.5
//!
//! [output]
//! dir = "out"
//! trace = false
//! ```
//!
//! Every random choice flows from `seed`; identical configs produce
//! byte-identical reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocator::{run_step_aero, run_step_fixed, AllocError, FixedMode, StepResult};
use crate::config::{AeroConfig, ModelSpec};
use crate::cost::CostReport;
use crate::metrics::{MetricsError, RunSeries, StepRecord};
use crate::oracle::{
    apply_improvement, make_pool, write_trace, ComponentKind, DifficultySpec, LengthDist, MixtureComponent,
    OracleError, QueryPool, RecordingSource, ReplaySource, RolloutSource, SyntheticOracle,
};
use crate::types::{QueryId, StratumLabel};

pub const SERIES_COLUMNS: [&str; 11] = [
    "step",
    "method",
    "generated",
    "trained",
    "zero_ratio",
    "all_correct_ratio",
    "mean_abs_adv",
    "mean_group_size",
    "rollout_flops",
    "training_flops",
    "total_flops",
];

pub const COMPARE_COLUMNS: [&str; 12] = [
    "name",
    "method",
    "mean_group_size",
    "rollout_flops",
    "training_flops",
    "total_flops",
    "zero_ratio",
    "mean_abs_adv",
    "group_size_ratio",
    "rollout_flops_ratio",
    "training_flops_ratio",
    "total_flops_ratio",
];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
    #[error("invalid config field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("compare: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

impl ExperimentError {
    /// 1 for configuration problems, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config { .. } | ExperimentError::Field { .. } | ExperimentError::Mismatch(_) => 1,
            _ => 2,
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        ExperimentError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    Aero,
    Grpo {
        #[serde(default = "default_n")]
        n: u32,
    },
    Dapo {
        #[serde(default = "default_n")]
        n: u32,
    },
    /// Fixed budget with a fractional rollout count, rounded down.
    GrpoReduced { n: f64 },
}

fn default_n() -> u32 {
    16
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Aero => "aero",
            Method::Grpo { .. } => "grpo",
            Method::Dapo { .. } => "dapo",
            Method::GrpoReduced { .. } => "grpo_reduced",
        }
    }

    fn fixed(&self) -> Result<Option<(u32, FixedMode)>, ExperimentError> {
        let field = |message: String| ExperimentError::Field { field: "method.n", message };
        match *self {
            Method::Aero => Ok(None),
            Method::Grpo { n } | Method::Dapo { n } if n == 0 => Err(field("must be >= 1".into())),
            Method::Grpo { n } => Ok(Some((n, FixedMode::Grpo))),
            Method::Dapo { n } => Ok(Some((n, FixedMode::DapoFilter))),
            Method::GrpoReduced { n } => {
                if !(n >= 1.0 && n.is_finite()) {
                    return Err(field(format!("reduced budget {n} rounds below 1")));
                }
                Ok(Some((n.floor() as u32, FixedMode::Grpo)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PoolSource {
    Preset {
        name: String,
        size: usize,
    },
    Mixture {
        size: usize,
        #[serde(default)]
        unsolvable_mass: f64,
        #[serde(default)]
        components: Vec<MixtureComponent>,
    },
    Trace {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Improvement {
    Off,
    Logistic { eta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    /// Also write every generated rollout as a replayable trace.
    #[serde(default)]
    pub trace: bool,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out(), trace: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub batch_size: usize,
    pub steps: u64,
    pub method: Method,
    #[serde(default)]
    pub aero: AeroConfig,
    pub pool: PoolSource,
    #[serde(default)]
    pub tokens: LengthDist,
    pub model: ModelSpec,
    #[serde(default = "default_improvement")]
    pub improvement: Improvement,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_improvement() -> Improvement {
    Improvement::Off
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = toml::from_str(text)
            .map_err(|e| ExperimentError::Config { path: origin.to_string(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|e| ExperimentError::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml(&text, &path.display().to_string())?;
        // trace paths are relative to the config file
        if let PoolSource::Trace { path: trace } = &mut cfg.pool {
            if trace.is_relative() {
                if let Some(dir) = path.parent() {
                    *trace = dir.join(&*trace);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let field = |field: &'static str, message: String| Err(ExperimentError::Field { field, message });
        if self.batch_size == 0 {
            return field("batch_size", "must be >= 1".into());
        }
        if self.steps == 0 {
            return field("steps", "must be >= 1".into());
        }
        self.method.fixed()?;
        if self.method == Method::Aero {
            if let Err(e) = self.aero.clone().validate() {
                return field("aero", e.to_string());
            }
        }
        if self.model.n_params == 0 {
            return field("model.n_params", "must be >= 1".into());
        }
        if let Err(e) = self.tokens.validate() {
            return field("tokens", e.to_string());
        }
        if let Improvement::Logistic { eta } = self.improvement {
            if !(eta >= 0.0 && eta.is_finite()) {
                return field("improvement.eta", format!("must be finite and >= 0, got {eta}"));
            }
        }
        match &self.pool {
            PoolSource::Preset { name, size } => {
                if DifficultySpec::preset(name).is_none() {
                    return field("pool.name", format!("unknown preset `{name}`"));
                }
                if *size == 0 {
                    return field("pool.size", "must be >= 1".into());
                }
            }
            PoolSource::Mixture { size, .. } => {
                if *size == 0 {
                    return field("pool.size", "must be >= 1".into());
                }
                if let Err(e) = self.difficulty().expect("mixture pool").validate() {
                    return field("pool", e.to_string());
                }
            }
            PoolSource::Trace { .. } => {
                if self.improvement != Improvement::Off {
                    return field("improvement", "drift cannot be applied to a replayed trace".into());
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.method.label().to_string())
    }

    fn difficulty(&self) -> Option<DifficultySpec> {
        match &self.pool {
            PoolSource::Preset { name, .. } => DifficultySpec::preset(name),
            PoolSource::Mixture { unsolvable_mass, components, .. } => {
                Some(DifficultySpec { unsolvable_mass: *unsolvable_mass, components: components.clone() })
            }
            PoolSource::Trace { .. } => None,
        }
    }
}

/// Aggregate report of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub method: String,
    pub seed: u64,
    pub steps: u64,
    pub batch_size: usize,
    pub n_params: u64,
    pub generated: u64,
    pub trained: u64,
    pub rescued: u64,
    pub stratum_counts: BTreeMap<StratumLabel, u64>,
    pub totals: CostReport,
    pub mean_group_size: f64,
    pub mean_zero_ratio: f64,
    pub mean_all_correct_ratio: f64,
    pub mean_abs_adv: f64,
    pub per_step_rollout_flops: f64,
    pub per_step_training_flops: f64,
    pub per_step_total_flops: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub series: RunSeries,
    pub summary: Summary,
    pub trace: Option<Vec<crate::oracle::TraceRecord>>,
}

enum Source {
    Synthetic(SyntheticOracle),
    Replay(ReplaySource),
}

impl RolloutSource for Source {
    fn draw(&mut self, query: &QueryId, step: u64) -> Result<Option<crate::oracle::Draw>, OracleError> {
        match self {
            Source::Synthetic(s) => s.draw(query, step),
            Source::Replay(r) => r.draw(query, step),
        }
    }
}

fn batch_for_step(pool: &QueryPool, batch_size: usize, step: u64) -> Vec<QueryId> {
    let start = (step as usize).wrapping_mul(batch_size);
    (0..batch_size).map(|j| pool.id_at((start + j) % pool.len()).clone()).collect()
}

/// Run every step of an experiment in memory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, ExperimentError> {
    cfg.validate()?;
    let fixed = cfg.method.fixed()?;
    let aero = AeroConfig { seed: cfg.seed, ..cfg.aero.clone() };

    let (source, steps): (Source, Vec<u64>) = match &cfg.pool {
        PoolSource::Trace { path } => {
            let replay = ReplaySource::from_path(path)?;
            let steps: Vec<u64> = replay.steps().into_iter().take(cfg.steps as usize).collect();
            if steps.is_empty() {
                return Err(ExperimentError::Field { field: "pool.path", message: "trace has no records".into() });
            }
            (Source::Replay(replay), steps)
        }
        PoolSource::Preset { size, .. } | PoolSource::Mixture { size, .. } => {
            let spec = cfg.difficulty().expect("synthetic pool has a difficulty spec");
            let pool = make_pool(&spec, *size, cfg.seed)?;
            (Source::Synthetic(SyntheticOracle::new(pool, cfg.tokens, cfg.seed)?), (0..cfg.steps).collect())
        }
    };
    let mut source = if cfg.output.trace {
        RecordingSource::new(source)
    } else {
        RecordingSource::passthrough(source)
    };

    let mut series = RunSeries::default();
    let mut strata: BTreeMap<StratumLabel, u64> = StratumLabel::ALL.iter().map(|&s| (s, 0)).collect();
    let mut totals = CostReport::default();
    let (mut generated, mut trained, mut rescued) = (0u64, 0u64, 0u64);
    let mut query_steps = 0u64;

    for &step in &steps {
        let batch = match source.inner() {
            Source::Synthetic(s) => batch_for_step(s.pool(), cfg.batch_size, step),
            Source::Replay(r) => r.queries_at(step).to_vec(),
        };
        let result: StepResult = match fixed {
            None => run_step_aero(&batch, &mut source, &aero, step)?,
            Some((n, mode)) => run_step_fixed(&batch, &mut source, n, mode, step)?,
        };
        let record = StepRecord::from_step(&result, cfg.model)?;
        generated += result.total_rollouts_generated;
        trained += result.total_rollouts_trained;
        rescued += result.rescued_count as u64;
        query_steps += result.batch_size() as u64;
        for (s, c) in &result.stratum_counts {
            *strata.entry(*s).or_default() += *c as u64;
        }
        totals = totals.merge(record.cost, cfg.model);
        if let (Improvement::Logistic { eta }, Source::Synthetic(oracle)) = (cfg.improvement, source.inner_mut()) {
            let next = apply_improvement(oracle.pool(), record.mean_abs_advantage, eta)?;
            oracle.set_pool(next);
        }
        series.push(record)?;
    }

    let n_steps = series.len() as f64;
    let summary = Summary {
        name: cfg.label(),
        method: cfg.method.label().to_string(),
        seed: cfg.seed,
        steps: series.len() as u64,
        batch_size: cfg.batch_size,
        n_params: cfg.model.n_params,
        generated,
        trained,
        rescued,
        stratum_counts: strata,
        totals,
        mean_group_size: trained as f64 / query_steps as f64,
        mean_zero_ratio: series.mean_of(|r| r.zero_accuracy_ratio),
        mean_all_correct_ratio: series.mean_of(|r| r.all_correct_ratio),
        mean_abs_adv: series.mean_of(|r| r.mean_abs_advantage),
        per_step_rollout_flops: totals.rollout_flops / n_steps,
        per_step_training_flops: totals.training_flops / n_steps,
        per_step_total_flops: totals.total_flops / n_steps,
    };
    let trace = cfg.output.trace.then(|| source.records().to_vec());
    Ok(RunOutput { series, summary, trace })
}

pub fn series_csv(method: &str, series: &RunSeries) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| ExperimentError::Io { path: "<series>".into(), message: e.to_string() };
    w.write_record(SERIES_COLUMNS).map_err(fail)?;
    for r in series.records() {
        w.write_record([
            r.step.to_string(),
            method.to_string(),
            r.generated.to_string(),
            r.trained.to_string(),
            r.zero_accuracy_ratio.to_string(),
            r.all_correct_ratio.to_string(),
            r.mean_abs_advantage.to_string(),
            r.mean_group_size.to_string(),
            r.cost.rollout_flops.to_string(),
            r.cost.training_flops.to_string(),
            r.cost.total_flops.to_string(),
        ])
        .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Io { path: "<series>".into(), message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn summary_json(summary: &Summary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
    s.push('\n');
    s
}

/// Paths of the files written by [`write_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunFiles {
    pub series: PathBuf,
    pub summary: PathBuf,
    pub trace: Option<PathBuf>,
}

pub fn write_run(out_dir: &Path, output: &RunOutput) -> Result<RunFiles, ExperimentError> {
    fs::create_dir_all(out_dir).map_err(|e| ExperimentError::io(out_dir, e))?;
    let name = &output.summary.name;
    let series = out_dir.join(format!("{name}_series.csv"));
    let summary = out_dir.join(format!("{name}_summary.json"));
    fs::write(&series, series_csv(&output.summary.method, &output.series)?).map_err(|e| ExperimentError::io(&series, e))?;
    fs::write(&summary, summary_json(&output.summary)).map_err(|e| ExperimentError::io(&summary, e))?;
    let trace = match &output.trace {
        Some(records) => {
            let path = out_dir.join(format!("{name}_trace.jsonl"));
            let file = fs::File::create(&path).map_err(|e| ExperimentError::io(&path, e))?;
            write_trace(records, std::io::BufWriter::new(file))?;
            Some(path)
        }
        None => None,
    };
    Ok(RunFiles { series, summary, trace })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub name: String,
    pub method: String,
    pub mean_group_size: f64,
    pub rollout_flops: f64,
    pub training_flops: f64,
    pub total_flops: f64,
    pub zero_ratio: f64,
    pub mean_abs_adv: f64,
    pub group_size_ratio: f64,
    pub rollout_flops_ratio: f64,
    pub training_flops_ratio: f64,
    pub total_flops_ratio: f64,
}

fn ratio(value: f64, base: f64) -> f64 {
    if value == base {
        1.0
    } else {
        value / base
    }
}

/// Per-step means of each run side by side, with ratios against the first.
pub fn compare(configs: &[ExperimentConfig]) -> Result<Vec<ComparisonRow>, ExperimentError> {
    let first = configs.first().ok_or_else(|| ExperimentError::Mismatch("no configs given".into()))?;
    for c in &configs[1..] {
        if c.pool != first.pool {
            return Err(ExperimentError::Mismatch(format!("`{}` uses a different pool than `{}`", c.label(), first.label())));
        }
        if c.seed != first.seed {
            return Err(ExperimentError::Mismatch(format!(
                "`{}` uses seed {} but `{}` uses seed {}",
                c.label(),
                c.seed,
                first.label(),
                first.seed
            )));
        }
    }
    let summaries = configs.iter().map(|c| run_experiment(c).map(|o| o.summary)).collect::<Result<Vec<_>, _>>()?;
    let base = &summaries[0];
    Ok(summaries
        .iter()
        .map(|s| ComparisonRow {
            name: s.name.clone(),
            method: s.method.clone(),
            mean_group_size: s.mean_group_size,
            rollout_flops: s.per_step_rollout_flops,
            training_flops: s.per_step_training_flops,
            total_flops: s.per_step_total_flops,
            zero_ratio: s.mean_zero_ratio,
            mean_abs_adv: s.mean_abs_adv,
            group_size_ratio: ratio(s.mean_group_size, base.mean_group_size),
            rollout_flops_ratio: ratio(s.per_step_rollout_flops, base.per_step_rollout_flops),
            training_flops_ratio: ratio(s.per_step_training_flops, base.per_step_training_flops),
            total_flops_ratio: ratio(s.per_step_total_flops, base.per_step_total_flops),
        })
        .collect())
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| ExperimentError::Io { path: "<compare>".into(), message: e.to_string() };
    w.write_record(COMPARE_COLUMNS).map_err(fail)?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.method.clone(),
            r.mean_group_size.to_string(),
            r.rollout_flops.to_string(),
            r.training_flops.to_string(),
            r.total_flops.to_string(),
            r.zero_ratio.to_string(),
            r.mean_abs_adv.to_string(),
            r.group_size_ratio.to_string(),
            r.rollout_flops_ratio.to_string(),
            r.training_flops_ratio.to_string(),
            r.total_flops_ratio.to_string(),
        ])
        .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Io { path: "<compare>".into(), message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Convenience constructor for the calibrated preset.
pub fn paperlike_pool(size: usize) -> PoolSource {
    PoolSource::Preset { name: DifficultySpec::PAPERLIKE_1_5B.to_string(), size }
}

/// Mixture pool from a single point mass, handy in tests.
pub fn point_mass_pool(p: f64, size: usize) -> PoolSource {
    PoolSource::Mixture {
        size,
        unsolvable_mass: 0.0,
        components: vec![MixtureComponent { weight: 1.0, kind: ComponentKind::PointMass { p } }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(method: Method) -> ExperimentConfig {
        ExperimentConfig {
            name: None,
            seed: 3,
            batch_size: 10,
            steps: 2,
            method,
            aero: AeroConfig::default(),
            pool: paperlike_pool(64),
            tokens: LengthDist::Constant { tokens: 100 },
            model: ModelSpec { n_params: 1_000_000 },
            improvement: Improvement::Off,
            output: OutputConfig::default(),
        }
    }

    #[test]
    fn toml_config_parses() {
        let text = r#"
            seed = 5
            batch_size = 4
            steps = 1
            [method]
            kind = "grpo_reduced"
            n = 5.12
            [pool]
            kind = "preset"
            name = "paperlike-1.5b"
            size = 16
            [model]
            n_params = 1000
        "#;
        let c = ExperimentConfig::from_toml(text, "inline").unwrap();
        assert_eq!(c.method.fixed().unwrap(), Some((5, FixedMode::Grpo)));
        assert_eq!(c.label(), "grpo_reduced");
        assert_eq!(c.tokens, LengthDist::Constant { tokens: 512 });
    }

    #[test]
    fn field_errors_name_the_field() {
        let mut c = cfg(Method::Aero);
        c.batch_size = 0;
        assert!(c.validate().unwrap_err().to_string().contains("batch_size"));
        let mut c = cfg(Method::Aero);
        c.aero.n_explore = 20;
        assert!(c.validate().unwrap_err().to_string().contains("aero"));
        let mut c = cfg(Method::Aero);
        c.pool = PoolSource::Preset { name: "nope".into(), size: 3 };
        assert!(c.validate().unwrap_err().to_string().contains("pool.name"));
        let err = ExperimentConfig::from_toml("steps = 1", "x.toml").unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("x.toml"));
    }

    #[test]
    fn grpo_run_counts() {
        let mut c = cfg(Method::Grpo { n: 16 });
        c.steps = 1;
        let out = run_experiment(&c).unwrap();
        assert_eq!(out.series.len(), 1);
        assert_eq!(out.series.records()[0].generated, 160);
        let csv = series_csv("grpo", &out.series).unwrap();
        assert_eq!(csv.lines().next().unwrap(), SERIES_COLUMNS.join(","));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn runs_are_deterministic() {
        let c = cfg(Method::Aero);
        assert_eq!(run_experiment(&c).unwrap(), run_experiment(&c).unwrap());
    }

    #[test]
    fn self_comparison_has_unit_ratios() {
        let c = cfg(Method::Grpo { n: 16 });
        let rows = compare(&[c.clone(), c]).unwrap();
        let r = &rows[1];
        assert_eq!(
            [r.group_size_ratio, r.rollout_flops_ratio, r.training_flops_ratio, r.total_flops_ratio],
            [1.0; 4]
        );
    }

    #[test]
    fn mismatched_pools_are_rejected() {
        let a = cfg(Method::Grpo { n: 16 });
        let mut b = cfg(Method::Aero);
        b.pool = paperlike_pool(65);
        assert!(matches!(compare(&[a.clone(), b]), Err(ExperimentError::Mismatch(_))));
        let mut c = cfg(Method::Aero);
        c.seed = 99;
        assert!(matches!(compare(&[a, c]), Err(ExperimentError::Mismatch(_))));
    }

    #[test]
    fn dapo_matches_grpo_rollouts_and_trains_less() {
        let rows = compare(&[cfg(Method::Grpo { n: 16 }), cfg(Method::Dapo { n: 16 })]).unwrap();
        assert_eq!(rows[1].rollout_flops_ratio, 1.0);
        assert!(rows[1].training_flops_ratio < 1.0);
    }

    #[test]
    fn logistic_drift_raises_accuracy() {
        let mut c = cfg(Method::Grpo { n: 8 });
        c.batch_size = 64;
        c.steps = 30;
        c.improvement = Improvement::Logistic { eta: 0.5 };
        let out = run_experiment(&c).unwrap();
        let zr = out.series.column(|r| r.zero_accuracy_ratio);
        let early: f64 = zr[..5].iter().sum::<f64>() / 5.0;
        let late: f64 = zr[25..].iter().sum::<f64>() / 5.0;
        assert!(late < early, "{early} -> {late}");
    }
}
