//! Allocation hyperparameters and model size.
//!
//! `AeroConfig` round-trips through a flat TOML table whose keys are the
//! field names below (`S` and `K_max` keep their conventional spelling).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::PosteriorState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("n_explore must be > 0")]
    ExploreZero,
    #[error("n_explore must be < n_total (n_explore={n_explore}, n_total={n_total})")]
    ExploreNotBelowTotal { n_explore: u32, n_total: u32 },
    #[error("S exceeds n_explore/2 (S={s}, n_explore={n_explore})")]
    RescueThresholdTooLarge { s: u32, n_explore: u32 },
    #[error("n_extra must be >= 1")]
    ExtraZero,
    #[error("n_max must be >= n_total (n_max={n_max}, n_total={n_total})")]
    MaxBelowTotal { n_max: u32, n_total: u32 },
    #[error("k must be >= 1")]
    RatioZero,
    #[error("zero_adv_retain must lie in [1, n_explore] (zero_adv_retain={retain}, n_explore={n_explore})")]
    RetainOutOfRange { retain: u32, n_explore: u32 },
    #[error("{field} must be positive and finite, got {value}")]
    PriorNotPositive { field: &'static str, value: f64 },
    #[error("n_params must be >= 1")]
    ZeroParams,
    #[error("config parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AeroConfig {
    /// Per-query rollout budget.
    pub n_total: u32,
    /// Stage I rollouts per query.
    pub n_explore: u32,
    /// Rollouts per rescue iteration.
    pub n_extra: u32,
    /// Incorrect-to-correct downsampling ratio.
    pub k: u32,
    /// Rescue threshold on the Stage I correct count.
    #[serde(rename = "S")]
    pub rescue_threshold: u32,
    /// Maximum rescue iterations per query.
    #[serde(rename = "K_max")]
    pub max_rescue_iterations: u32,
    /// Hard per-query rollout cap.
    pub n_max: u32,
    /// Rollouts retained from a dead-zone group.
    pub zero_adv_retain: u32,
    pub alpha0: f64,
    pub beta0: f64,
    pub seed: u64,
}

impl Default for AeroConfig {
    fn default() -> Self {
        Self {
            n_total: 16,
            n_explore: 8,
            n_extra: 2,
            k: 1,
            rescue_threshold: 0,
            max_rescue_iterations: 10,
            n_max: 32,
            zero_adv_retain: 4,
            alpha0: 1.0,
            beta0: 1.0,
            seed: 0,
        }
    }
}

impl AeroConfig {
    /// Checks every invariant in a fixed order and reports the first violation.
    pub fn validate(self) -> Result<Self, ConfigError> {
        if self.n_explore == 0 {
            return Err(ConfigError::ExploreZero);
        }
        if self.n_explore >= self.n_total {
            return Err(ConfigError::ExploreNotBelowTotal {
                n_explore: self.n_explore,
                n_total: self.n_total,
            });
        }
        if 2 * self.rescue_threshold > self.n_explore {
            return Err(ConfigError::RescueThresholdTooLarge {
                s: self.rescue_threshold,
                n_explore: self.n_explore,
            });
        }
        if self.n_extra == 0 {
            return Err(ConfigError::ExtraZero);
        }
        if self.n_max < self.n_total {
            return Err(ConfigError::MaxBelowTotal { n_max: self.n_max, n_total: self.n_total });
        }
        if self.k == 0 {
            return Err(ConfigError::RatioZero);
        }
        if self.zero_adv_retain == 0 || self.zero_adv_retain > self.n_explore {
            return Err(ConfigError::RetainOutOfRange {
                retain: self.zero_adv_retain,
                n_explore: self.n_explore,
            });
        }
        for (field, value) in [("alpha0", self.alpha0), ("beta0", self.beta0)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::PriorNotPositive { field, value });
            }
        }
        Ok(self)
    }

    pub fn prior(&self) -> PosteriorState {
        PosteriorState::new(self.alpha0, self.beta0).expect("validated config has a positive prior")
    }

    /// Rescue-stratum threshold u_res = S / n_explore as a float, for display.
    pub fn rescue_rate_threshold(&self) -> f64 {
        self.rescue_threshold as f64 / self.n_explore as f64
    }

    /// Fails only for seeds above `i64::MAX`, which TOML integers cannot hold.
    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()
    }
}

/// Model size used by the FLOPs model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n_params: u64,
}

impl ModelSpec {
    pub fn new(n_params: u64) -> Result<Self, ConfigError> {
        if n_params == 0 {
            return Err(ConfigError::ZeroParams);
        }
        Ok(Self { n_params })
    }
}
