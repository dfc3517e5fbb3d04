//! Synthetic check of the group-gradient norm identity.
//!
//! Each rollout is stood in for by an abstract per-rollout gradient vector
//! `v_j`. With standardized binary advantages `a+ = (1-mu)/sigma` and
//! `a- = -mu/sigma`, the group gradient `(1/N) sum_j a_j v_j` equals
//! `(sqrt(cm)/(c+m)) (mean_C - mean_F)`, so its squared norm is the balance
//! term `cm/(c+m)^2` times `||mean_C - mean_F||^2`. The balance term peaks
//! at m = c.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradError {
    #[error("sample needs both correct and incorrect rollouts (c={correct}, m={incorrect})")]
    SingleClass { correct: usize, incorrect: usize },
    #[error("vectors and labels disagree in length ({vectors} vs {labels})")]
    LengthMismatch { vectors: usize, labels: usize },
    #[error("vector {index} has dimension {found}, expected {expected}")]
    Dimension { index: usize, expected: usize, found: usize },
    #[error("dimension must be >= 1")]
    ZeroDimension,
}

/// Per-rollout gradient stand-ins with correctness labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSample {
    vectors: Vec<Vec<f64>>,
    labels: Vec<bool>,
    dim: usize,
}

impl GradientSample {
    pub fn new(vectors: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self, GradError> {
        if vectors.len() != labels.len() {
            return Err(GradError::LengthMismatch { vectors: vectors.len(), labels: labels.len() });
        }
        let dim = vectors.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(GradError::ZeroDimension);
        }
        if let Some((index, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != dim) {
            return Err(GradError::Dimension { index, expected: dim, found: v.len() });
        }
        Ok(Self { vectors, labels, dim })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn counts(&self) -> (usize, usize) {
        let c = self.labels.iter().filter(|&&l| l).count();
        (c, self.labels.len() - c)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            vectors: self.vectors.iter().map(|v| v.iter().map(|x| x * s).collect()).collect(),
            labels: self.labels.clone(),
            dim: self.dim,
        }
    }

    fn mixed_counts(&self) -> Result<(usize, usize), GradError> {
        match self.counts() {
            (c, m) if c > 0 && m > 0 => Ok((c, m)),
            (c, m) => Err(GradError::SingleClass { correct: c, incorrect: m }),
        }
    }

    fn class_mean(&self, label: bool) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        let mut n = 0usize;
        for (v, _) in self.vectors.iter().zip(&self.labels).filter(|(_, &l)| l == label) {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
            n += 1;
        }
        acc.iter_mut().for_each(|a| *a /= n as f64);
        acc
    }
}

/// Correct vectors around `+separation * e1`, incorrect around
/// `-separation * e1`, plus isotropic Gaussian noise of scale `noise`.
pub fn synth_gradients<R: Rng + ?Sized>(
    correct: usize,
    incorrect: usize,
    dim: usize,
    separation: f64,
    noise: f64,
    rng: &mut R,
) -> Result<GradientSample, GradError> {
    if dim == 0 {
        return Err(GradError::ZeroDimension);
    }
    let labels: Vec<bool> = std::iter::repeat_n(true, correct).chain(std::iter::repeat_n(false, incorrect)).collect();
    let vectors = labels
        .iter()
        .map(|&l| {
            (0..dim)
                .map(|i| {
                    let center = if i == 0 { if l { separation } else { -separation } } else { 0.0 };
                    let eps: f64 = rng.sample(StandardNormal);
                    center + noise * eps
                })
                .collect()
        })
        .collect();
    GradientSample::new(vectors, labels)
}

/// `(1/N) sum_j a_j v_j` with standardized binary advantages.
pub fn group_gradient(sample: &GradientSample) -> Result<Vec<f64>, GradError> {
    let (c, m) = sample.mixed_counts()?;
    let n = (c + m) as f64;
    let mu = c as f64 / n;
    let sigma = (mu * (1.0 - mu)).sqrt();
    let a_pos = (1.0 - mu) / sigma;
    let a_neg = -mu / sigma;
    let mut g = vec![0.0; sample.dim];
    for (v, &l) in sample.vectors.iter().zip(&sample.labels) {
        let a = if l { a_pos } else { a_neg };
        for (gi, x) in g.iter_mut().zip(v) {
            *gi += a * x;
        }
    }
    g.iter_mut().for_each(|gi| *gi /= n);
    Ok(g)
}

/// Composition factor `cm / (c+m)^2`.
pub fn balance(correct: u64, incorrect: u64) -> f64 {
    let n = (correct + incorrect) as f64;
    correct as f64 * incorrect as f64 / (n * n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub norm_sq: f64,
    pub balance: f64,
    pub diff_sq: f64,
}

/// Closed-form squared norm from class means.
pub fn closed_form_norm(sample: &GradientSample) -> Result<ClosedForm, GradError> {
    let (c, m) = sample.mixed_counts()?;
    let mean_c = sample.class_mean(true);
    let mean_f = sample.class_mean(false);
    let diff_sq = mean_c.iter().zip(&mean_f).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let bal = balance(c as u64, m as u64);
    Ok(ClosedForm { norm_sq: bal * diff_sq, balance: bal, diff_sq })
}

pub fn balance_sweep(correct: u64, incorrect_range: impl IntoIterator<Item = u64>) -> Vec<(u64, f64)> {
    incorrect_range.into_iter().map(|m| (m, balance(correct, m))).collect()
}

/// Indices holding the maximum value; used to confirm a unique argmax.
pub fn argmax_all(sweep: &[(u64, f64)]) -> Vec<u64> {
    let best = sweep.iter().map(|&(_, b)| b).fold(f64::NEG_INFINITY, f64::max);
    sweep.iter().filter(|&&(_, b)| b == best).map(|&(m, _)| m).collect()
}

pub fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}
