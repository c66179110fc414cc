use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapMode {
    #[serde(alias = "max")]
    Maximize,
    #[serde(alias = "min")]
    Minimize,
    #[default]
    Neutral,
}

impl FromStr for OverlapMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "max" | "maximize" => Ok(OverlapMode::Maximize),
            "min" | "minimize" => Ok(OverlapMode::Minimize),
            "neutral" | "none" => Ok(OverlapMode::Neutral),
            other => Err(format!("unknown overlap mode `{other}` (expected max, min or neutral)")),
        }
    }
}

impl fmt::Display for OverlapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverlapMode::Maximize => "max",
            OverlapMode::Minimize => "min",
            OverlapMode::Neutral => "neutral",
        })
    }
}

/// Where base edge weights come from before overlap reweighting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightSource {
    #[default]
    Uniform,
    /// Uniform random weights in `[0.5, 1.5]`, seeded; a demo option.
    Random,
}

impl FromStr for WeightSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(WeightSource::Uniform),
            "random" => Ok(WeightSource::Random),
            other => Err(format!("unknown weight source `{other}`")),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("alpha must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("delta must be positive")]
    Delta,
    #[error("max area ({max_area}) must be at least delta ({delta})")]
    MaxArea { delta: u64, max_area: u64 },
    #[error("overlap weights must be positive and finite")]
    OverlapWeight,
    #[error("time limits must be positive")]
    TimeLimit,
}

/// Planner settings shared by every stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub alpha: f64,
    /// Largest quadtree leaf area.
    pub delta: u64,
    /// Largest joined-cell area.
    pub max_area: u64,
    pub overlap_mode: OverlapMode,
    pub overlap_weight_max: f64,
    pub overlap_weight_min: f64,
    /// Cells with at most this many vertices go to the exhaustive solver.
    pub exact_threshold: usize,
    pub relaxed_time_limit_s: f64,
    pub full_time_limit_s: f64,
    /// Flip the curve's exit corner on odd layers.
    pub alternate_corners: bool,
    /// Worker threads; 0 picks the machine's parallelism.
    pub worker_count: usize,
    pub cell_solver: String,
    pub backend: String,
    pub weight_source: WeightSource,
    pub weight_seed: u64,
    pub project_boundary: bool,
    pub memoize: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            delta: 64,
            max_area: 120,
            overlap_mode: OverlapMode::Neutral,
            overlap_weight_max: 0.5,
            overlap_weight_min: 1.5,
            exact_threshold: 12,
            relaxed_time_limit_s: 30.0,
            full_time_limit_s: 120.0,
            alternate_corners: false,
            worker_count: 0,
            cell_solver: "auto".into(),
            backend: "frontier-dp".into(),
            weight_source: WeightSource::Uniform,
            weight_seed: 0,
            project_boundary: true,
            memoize: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if self.delta == 0 {
            return Err(ConfigError::Delta);
        }
        if self.max_area < self.delta {
            return Err(ConfigError::MaxArea { delta: self.delta, max_area: self.max_area });
        }
        let ok = |w: f64| w.is_finite() && w > 0.0;
        if !ok(self.overlap_weight_max) || !ok(self.overlap_weight_min) {
            return Err(ConfigError::OverlapWeight);
        }
        if !(self.relaxed_time_limit_s > 0.0 && self.full_time_limit_s > 0.0) {
            return Err(ConfigError::TimeLimit);
        }
        Ok(())
    }

    pub fn relaxed_time_limit(&self) -> Duration {
        Duration::from_secs_f64(self.relaxed_time_limit_s)
    }

    pub fn full_time_limit(&self) -> Duration {
        Duration::from_secs_f64(self.full_time_limit_s)
    }

    /// Weight given to an edge that coincides with a print edge one layer
    /// down, or `None` when the mode leaves weights alone.
    pub fn overlap_weight(&self) -> Option<f64> {
        match self.overlap_mode {
            OverlapMode::Maximize => Some(self.overlap_weight_max),
            OverlapMode::Minimize => Some(self.overlap_weight_min),
            OverlapMode::Neutral => None,
        }
    }
}
