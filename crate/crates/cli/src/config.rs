//! JSON run configuration. Frequencies are given in MHz and mean angular
//! frequencies of `2 pi f` rad/us; times are in us.

use std::path::Path;

use adiashort::protocols::{
    build_stirap, build_three_level_pipulse, build_two_level_case, preset, three_level_pump_area, Experiment, Regime,
    TwoLevelCase,
};
use adiashort::units::mhz_to_rad_per_us;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub experiment: Option<CustomExperiment>,
    /// Overrides the protocol's default step, us.
    pub grid_step_us: Option<f64>,
    pub record_stride: Option<usize>,
    pub output_dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CustomExperiment {
    TwoLevel {
        case: TwoLevelCase,
        regime: Regime,
    },
    ThreeLevel {
        k: usize,
        #[serde(default = "default_pulse_mhz")]
        pulse_amp_mhz: f64,
    },
    Stirap {
        tau_us: f64,
        /// Pump area in rad; defaults to that of the `match_k`-pulse transfer.
        target_area_rad: Option<f64>,
        match_k: Option<usize>,
    },
}

fn default_pulse_mhz() -> f64 {
    8.0
}

/// Sweep configuration: a list of run configurations.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub runs: Vec<ExperimentConfig>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(schema(format!("{name} must be positive, got {x}")))
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    if text.trim().is_empty() {
        return Err(schema("empty config; missing fields: one of `preset`, `experiment`"));
    }
    serde_json::from_str(text).map_err(|e| schema(e.to_string()))
}

pub fn parse_sweep(text: &str) -> Result<SweepConfig> {
    if text.trim().is_empty() {
        return Err(schema("empty sweep config; missing field: `runs`"));
    }
    let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    if cfg.runs.is_empty() {
        return Err(schema("`runs` must list at least one run"));
    }
    Ok(cfg)
}

impl ExperimentConfig {
    /// Builds the experiment, applying `step_override` (us) last.
    pub fn build(&self, step_override: Option<f64>) -> Result<Experiment> {
        let mut exp = match (&self.preset, &self.experiment) {
            (Some(name), None) => preset(name).map_err(|_| schema(format!("unknown preset `{name}`")))?,
            (None, Some(custom)) => custom.build()?,
            (Some(_), Some(_)) => return Err(schema("give exactly one of `preset`, `experiment`, not both")),
            (None, None) => return Err(schema("missing fields: one of `preset`, `experiment`")),
        };
        if let Some(stride) = self.record_stride {
            if stride == 0 {
                return Err(schema("record_stride must be at least 1"));
            }
            exp.record_stride = stride;
        }
        if let Some(step) = step_override.or(self.grid_step_us) {
            exp = exp.with_step(positive("grid step", step)?)?;
        }
        Ok(exp)
    }
}

impl CustomExperiment {
    fn build(&self) -> Result<Experiment> {
        match self {
            Self::TwoLevel { case, regime } => Ok(build_two_level_case(*case, *regime)?),
            Self::ThreeLevel { k, pulse_amp_mhz } => {
                if *k == 0 {
                    return Err(schema("k must be at least 1"));
                }
                let amp = mhz_to_rad_per_us(positive("pulse_amp_mhz", *pulse_amp_mhz)?);
                Ok(build_three_level_pipulse(*k, amp)?)
            }
            Self::Stirap { tau_us, target_area_rad, match_k } => {
                let tau = positive("tau_us", *tau_us)?;
                let area = match (target_area_rad, match_k) {
                    (Some(a), None) => positive("target_area_rad", *a)?,
                    (None, Some(k)) if *k > 0 => three_level_pump_area(*k),
                    (None, Some(_)) => return Err(schema("match_k must be at least 1")),
                    _ => return Err(schema("stirap needs exactly one of `target_area_rad`, `match_k`")),
                };
                Ok(build_stirap(tau, area)?)
            }
        }
    }
}
