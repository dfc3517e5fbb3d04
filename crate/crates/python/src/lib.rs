//! Python bindings for `aero_core`.

use aero_core::advantage;
use aero_core::allocator::{run_step_aero, run_step_fixed, FixedMode, StepResult};
use aero_core::config::ModelSpec;
use aero_core::cost;
use aero_core::experiment::{self, ExperimentConfig};
use aero_core::gradproxy;
use aero_core::metrics;
use aero_core::oracle::{make_pool, DifficultySpec, LengthDist, SyntheticOracle};
use aero_core::types::{PosteriorState, QueryId};
use aero_core::verify;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

#[pyclass(name = "AeroConfig", from_py_object)]
#[derive(Clone)]
struct PyAeroConfig {
    #[pyo3(get, set)]
    n_total: u32,
    #[pyo3(get, set)]
    n_explore: u32,
    #[pyo3(get, set)]
    n_extra: u32,
    #[pyo3(get, set)]
    k: u32,
    #[pyo3(get, set)]
    rescue_threshold: u32,
    #[pyo3(get, set)]
    max_rescue_iterations: u32,
    #[pyo3(get, set)]
    n_max: u32,
    #[pyo3(get, set)]
    zero_adv_retain: u32,
    #[pyo3(get, set)]
    alpha0: f64,
    #[pyo3(get, set)]
    beta0: f64,
    #[pyo3(get, set)]
    seed: u64,
}

impl From<aero_core::AeroConfig> for PyAeroConfig {
    fn from(c: aero_core::AeroConfig) -> Self {
        Self {
            n_total: c.n_total,
            n_explore: c.n_explore,
            n_extra: c.n_extra,
            k: c.k,
            rescue_threshold: c.rescue_threshold,
            max_rescue_iterations: c.max_rescue_iterations,
            n_max: c.n_max,
            zero_adv_retain: c.zero_adv_retain,
            alpha0: c.alpha0,
            beta0: c.beta0,
            seed: c.seed,
        }
    }
}

impl PyAeroConfig {
    fn to_core(&self) -> aero_core::AeroConfig {
        aero_core::AeroConfig {
            n_total: self.n_total,
            n_explore: self.n_explore,
            n_extra: self.n_extra,
            k: self.k,
            rescue_threshold: self.rescue_threshold,
            max_rescue_iterations: self.max_rescue_iterations,
            n_max: self.n_max,
            zero_adv_retain: self.zero_adv_retain,
            alpha0: self.alpha0,
            beta0: self.beta0,
            seed: self.seed,
        }
    }
}

#[pymethods]
impl PyAeroConfig {
    #[new]
    fn new() -> Self {
        aero_core::AeroConfig::default().into()
    }

    /// Raise ValueError naming the first violated field.
    fn validate(&self) -> PyResult<()> {
        self.to_core().validate().map(|_| ()).map_err(value_err)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.to_core().to_toml().map_err(value_err)
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        aero_core::AeroConfig::from_toml(text).map(Into::into).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.to_core())
    }
}

fn step_dict<'py>(py: Python<'py>, r: &StepResult, n_params: u64) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let model = ModelSpec::new(n_params).map_err(value_err)?;
    let rec = metrics::StepRecord::from_step(r, model).map_err(runtime_err)?;
    d.set_item("step", r.step)?;
    d.set_item("generated", r.total_rollouts_generated)?;
    d.set_item("trained", r.total_rollouts_trained)?;
    d.set_item("rescued", r.rescued_count)?;
    d.set_item("zero_ratio", rec.zero_accuracy_ratio)?;
    d.set_item("all_correct_ratio", rec.all_correct_ratio)?;
    d.set_item("mean_abs_adv", rec.mean_abs_advantage)?;
    d.set_item("mean_group_size", rec.mean_group_size)?;
    d.set_item("rollout_tokens", rec.cost.rollout_tokens)?;
    d.set_item("training_tokens", rec.cost.training_tokens)?;
    d.set_item("rollout_flops", rec.cost.rollout_flops)?;
    d.set_item("training_flops", rec.cost.training_flops)?;
    d.set_item("total_flops", rec.cost.total_flops)?;
    let strata = PyDict::new(py);
    for (s, c) in &r.stratum_counts {
        strata.set_item(s.as_str(), *c)?;
    }
    d.set_item("strata", strata)?;
    Ok(d)
}

/// Synthetic query pool plus Bernoulli oracle.
#[pyclass(name = "Simulator")]
struct PySimulator {
    oracle: SyntheticOracle,
    n_params: u64,
}

#[pymethods]
impl PySimulator {
    #[new]
    #[pyo3(signature = (size, seed=0, preset="paperlike-1.5b", tokens=512, n_params=1_500_000_000))]
    fn new(size: usize, seed: u64, preset: &str, tokens: u32, n_params: u64) -> PyResult<Self> {
        let spec = DifficultySpec::preset(preset).ok_or_else(|| value_err(format!("unknown preset `{preset}`")))?;
        let pool = make_pool(&spec, size, seed).map_err(value_err)?;
        let oracle = SyntheticOracle::new(pool, LengthDist::Constant { tokens }, seed).map_err(value_err)?;
        Ok(Self { oracle, n_params })
    }

    fn __len__(&self) -> usize {
        self.oracle.pool().len()
    }

    fn latent_p(&self, query_id: &str) -> Option<f64> {
        self.oracle.pool().latent_p(&QueryId::new(query_id))
    }

    fn batch(&self, batch_size: usize, step: u64) -> Vec<String> {
        let pool = self.oracle.pool();
        (0..batch_size)
            .map(|j| pool.id_at((step as usize * batch_size + j) % pool.len()).to_string())
            .collect()
    }

    #[pyo3(signature = (batch_size, step=0, config=None))]
    fn step_aero<'py>(
        &mut self,
        py: Python<'py>,
        batch_size: usize,
        step: u64,
        config: Option<PyAeroConfig>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = config.map(|c| c.to_core()).unwrap_or_default();
        let batch: Vec<QueryId> = self.batch(batch_size, step).iter().map(QueryId::new).collect();
        let r = run_step_aero(&batch, &mut self.oracle, &cfg, step).map_err(value_err)?;
        step_dict(py, &r, self.n_params)
    }

    /// `mode` is "grpo" or "dapo".
    #[pyo3(signature = (batch_size, n=16, mode="grpo", step=0))]
    fn step_fixed<'py>(
        &mut self,
        py: Python<'py>,
        batch_size: usize,
        n: u32,
        mode: &str,
        step: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mode = match mode {
            "grpo" => FixedMode::Grpo,
            "dapo" => FixedMode::DapoFilter,
            other => return Err(value_err(format!("unknown mode `{other}`"))),
        };
        let batch: Vec<QueryId> = self.batch(batch_size, step).iter().map(QueryId::new).collect();
        let r = run_step_fixed(&batch, &mut self.oracle, n, mode, step).map_err(value_err)?;
        step_dict(py, &r, self.n_params)
    }
}

/// Returns (values, mean, std).
#[pyfunction]
fn empirical_advantages(rewards: Vec<bool>) -> PyResult<(Vec<f64>, f64, f64)> {
    let s = advantage::empirical_advantages(&rewards).map_err(value_err)?;
    Ok((s.values().to_vec(), s.mean_used(), s.std_used()))
}

/// Returns (values, posterior mean, plug-in std).
#[pyfunction]
#[pyo3(signature = (rewards, alpha0=1.0, beta0=1.0))]
fn bayesian_advantages(rewards: Vec<bool>, alpha0: f64, beta0: f64) -> PyResult<(Vec<f64>, f64, f64)> {
    let prior = PosteriorState::new(alpha0, beta0).map_err(value_err)?;
    let s = advantage::bayesian_advantages(&rewards, prior).map_err(value_err)?;
    Ok((s.values().to_vec(), s.mean_used(), s.std_used()))
}

#[pyfunction]
#[pyo3(signature = (correct, total, alpha0=1.0, beta0=1.0))]
fn posterior_mean(correct: u64, total: u64, alpha0: f64, beta0: f64) -> PyResult<f64> {
    let prior = PosteriorState::new(alpha0, beta0).map_err(value_err)?;
    let post = advantage::posterior_update(prior, correct, total).map_err(value_err)?;
    Ok(advantage::posterior_mean(post))
}

#[pyfunction]
fn balance(correct: u64, incorrect: u64) -> f64 {
    gradproxy::balance(correct, incorrect)
}

#[pyfunction]
fn balance_sweep(correct: u64, incorrect: Vec<u64>) -> Vec<(u64, f64)> {
    gradproxy::balance_sweep(correct, incorrect)
}

/// Returns (|G|^2 computed directly, closed-form norm_sq, balance, diff_sq).
#[pyfunction]
#[pyo3(signature = (correct, incorrect, dim=64, separation=1.0, noise=1.0, seed=0))]
fn gradient_identity(
    correct: usize,
    incorrect: usize,
    dim: usize,
    separation: f64,
    noise: f64,
    seed: u64,
) -> PyResult<(f64, f64, f64, f64)> {
    let mut rng = aero_core::rng::substream(seed, &[aero_core::rng::tag::GRADIENT]);
    let s = gradproxy::synth_gradients(correct, incorrect, dim, separation, noise, &mut rng).map_err(value_err)?;
    let g = gradproxy::group_gradient(&s).map_err(value_err)?;
    let cf = gradproxy::closed_form_norm(&s).map_err(value_err)?;
    Ok((gradproxy::norm_sq(&g), cf.norm_sq, cf.balance, cf.diff_sq))
}

#[pyfunction]
fn inflation_factor(p0: f64) -> PyResult<f64> {
    cost::inflation_factor(p0).map_err(value_err)
}

#[pyfunction]
fn rollout_flops(n_params: u64, n_tokens: u64) -> PyResult<f64> {
    Ok(cost::rollout_flops(ModelSpec::new(n_params).map_err(value_err)?, n_tokens))
}

#[pyfunction]
fn training_flops(n_params: u64, n_tokens: u64) -> PyResult<f64> {
    Ok(cost::training_flops(ModelSpec::new(n_params).map_err(value_err)?, n_tokens))
}

#[pyfunction]
fn pass_at_n(outcomes: Vec<Vec<bool>>) -> PyResult<f64> {
    metrics::pass_at_n(&outcomes).map_err(value_err)
}

#[pyfunction]
fn avg_at_n(outcomes: Vec<Vec<bool>>) -> PyResult<f64> {
    metrics::avg_at_n(&outcomes).map_err(value_err)
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    metrics::pearson(&x, &y).map_err(value_err)
}

/// Run an experiment described by TOML text; returns (series_csv, summary_json).
#[pyfunction]
fn run_experiment(config_toml: &str) -> PyResult<(String, String)> {
    let cfg = ExperimentConfig::from_toml(config_toml, "<python>").map_err(value_err)?;
    let out = experiment::run_experiment(&cfg).map_err(runtime_err)?;
    let csv = experiment::series_csv(&out.summary.method, &out.series).map_err(runtime_err)?;
    Ok((csv, experiment::summary_json(&out.summary)))
}

/// Built-in analytic checks as (name, passed, detail) tuples.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn verify_all(py: Python<'_>, seed: u64) -> Vec<(String, bool, String)> {
    py.detach(|| verify::run_all(seed))
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed, c.detail))
        .collect()
}

#[pymodule]
fn aero_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAeroConfig>()?;
    m.add_class::<PySimulator>()?;
    m.add_function(wrap_pyfunction!(empirical_advantages, m)?)?;
    m.add_function(wrap_pyfunction!(bayesian_advantages, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_mean, m)?)?;
    m.add_function(wrap_pyfunction!(balance, m)?)?;
    m.add_function(wrap_pyfunction!(balance_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_identity, m)?)?;
    m.add_function(wrap_pyfunction!(inflation_factor, m)?)?;
    m.add_function(wrap_pyfunction!(rollout_flops, m)?)?;
    m.add_function(wrap_pyfunction!(training_flops, m)?)?;
    m.add_function(wrap_pyfunction!(pass_at_n, m)?)?;
    m.add_function(wrap_pyfunction!(avg_at_n, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    Ok(())
}
