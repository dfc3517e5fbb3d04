//! Built-in analytic checks behind `aero verify`.

use rand::Rng;

use crate::advantage::{bayesian_advantages, empirical_advantages, posterior_mean, posterior_update};
use crate::allocator::{rescue, BudgetLedger, RescueOutcome};
use crate::config::AeroConfig;
use crate::cost::{inflation_factor, simulate_oversampling};
use crate::gradproxy::{argmax_all, balance_sweep, closed_form_norm, group_gradient, norm_sq, synth_gradients};
use crate::metrics::pass_at_n;
use crate::oracle::{LengthDist, QueryPool, SyntheticOracle};
use crate::rng::{self, tag};
use crate::types::{PosteriorState, QueryId};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn balance_check() -> CheckResult {
    let failures: Vec<u64> = (1..=16u64)
        .filter(|&c| {
            let sweep = balance_sweep(c, 1..=64);
            let best = argmax_all(&sweep);
            best != vec![c] || sweep[(c - 1) as usize].1 != 0.25
        })
        .collect();
    CheckResult {
        name: "balance_argmax",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "argmax m=c with value 0.25 for every c in [1,16], m in [1,64]".into()
        } else {
            format!("argmax differs from m=c for c in {failures:?}")
        },
    }
}

pub fn gradient_identity_check(samples: usize, seed: u64) -> CheckResult {
    let mut rng = rng::substream(seed, &[tag::VERIFY, tag::GRADIENT]);
    let dims = [4usize, 64, 512];
    let mut worst = 0.0f64;
    for i in 0..samples {
        let c = rng.random_range(1..=16);
        let m = rng.random_range(1..=16);
        let s = synth_gradients(c, m, dims[i % 3], 1.0, 1.0, &mut rng).expect("valid shape");
        let direct = norm_sq(&group_gradient(&s).expect("mixed sample"));
        let closed = closed_form_norm(&s).expect("mixed sample").norm_sq;
        worst = worst.max((direct - closed).abs() / closed.abs());
    }
    CheckResult {
        name: "gradient_identity",
        passed: worst < 1e-9,
        detail: format!("max relative error {worst:.3e} over {samples} samples"),
    }
}

pub fn posterior_check(prior: PosteriorState) -> CheckResult {
    let mut problems = Vec::new();
    for n in 1..=64u64 {
        for c in 0..=n {
            let mean = posterior_mean(posterior_update(prior, c, n).expect("c <= n"));
            if !(mean > 0.0 && mean < 1.0) {
                problems.push(format!("mean {mean} at c={c}, n={n}"));
            }
            let rewards: Vec<bool> = (0..n).map(|i| i < c).collect();
            let bayes = bayesian_advantages(&rewards, prior).expect("nonempty");
            if bayes.values().iter().any(|&v| v == 0.0 || !v.is_finite()) {
                problems.push(format!("zero Bayesian advantage at c={c}, n={n}"));
            }
            if c == 0 || c == n {
                let emp = empirical_advantages(&rewards).expect("nonempty");
                if emp.values().iter().any(|&v| v != 0.0) {
                    problems.push(format!("nonzero empirical dead zone at c={c}, n={n}"));
                }
            }
        }
    }
    CheckResult {
        name: "posterior_bounds",
        passed: problems.is_empty(),
        detail: problems.first().cloned().unwrap_or_else(|| "posterior mean in (0,1), no zero advantage, n <= 64".into()),
    }
}

/// Rescue rate with four increments of two draws versus `1 - (1-p)^8`.
pub fn rescue_rate(p: f64, trials: usize, seed: u64) -> f64 {
    let pool = QueryPool::from_latent((0..trials).map(|i| (QueryId::new(format!("r{i}")), p)).collect(), seed)
        .expect("valid probabilities");
    let mut oracle = SyntheticOracle::new(pool.clone(), LengthDist::Constant { tokens: 1 }, seed).expect("valid lengths");
    let cfg = AeroConfig { n_extra: 2, max_rescue_iterations: 10, ..Default::default() };
    let hits = pool
        .ids()
        .filter(|q| {
            let mut ledger = BudgetLedger::new(8, cfg.n_max);
            matches!(
                rescue(q, &mut oracle, &mut ledger, &cfg, 0).map(|r| r.outcome),
                Ok(RescueOutcome::RescuedAt(_))
            )
        })
        .count();
    hits as f64 / trials as f64
}

pub fn rescue_check(trials: usize, seed: u64) -> CheckResult {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for p in [0.05, 0.2, 0.5] {
        let rate = rescue_rate(p, trials, seed);
        let expected = 1.0 - (1.0 - p).powi(8);
        worst = worst.max((rate - expected).abs());
        parts.push(format!("p={p}: {rate:.4} vs {expected:.4}"));
    }
    CheckResult { name: "rescue_probability", passed: worst <= 0.01, detail: parts.join("; ") }
}

pub fn pass_at_n_check(problems: usize, seed: u64) -> CheckResult {
    let mut rng = rng::substream(seed, &[tag::VERIFY, 8]);
    let outcomes: Vec<Vec<bool>> = (0..problems).map(|_| (0..8).map(|_| rng.random::<f64>() < 0.5).collect()).collect();
    let got = pass_at_n(&outcomes).expect("rectangular");
    let expected = 1.0 - 0.5f64.powi(8);
    CheckResult {
        name: "pass_at_n",
        passed: (got - expected).abs() <= 0.002,
        detail: format!("Pass@8 at p=0.5: {got:.5} vs {expected:.5}"),
    }
}

pub fn inflation_check(seed: u64) -> CheckResult {
    let mut rng = rng::substream(seed, &[tag::VERIFY, 7]);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for p0 in [0.1, 0.22, 0.35] {
        let sim = simulate_oversampling(p0, 256, 400, &mut rng).expect("valid ratio");
        let expected = inflation_factor(p0).expect("valid ratio");
        worst = worst.max((sim / expected - 1.0).abs());
        parts.push(format!("p0={p0}: {sim:.4} vs {expected:.4}"));
    }
    CheckResult { name: "inflation_factor", passed: worst <= 0.02, detail: parts.join("; ") }
}

pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        balance_check(),
        gradient_identity_check(1000, seed),
        posterior_check(PosteriorState::uniform()),
        rescue_check(100_000, seed),
        pass_at_n_check(100_000, seed),
        inflation_check(seed),
    ]
}
