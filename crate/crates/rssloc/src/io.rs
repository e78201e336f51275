//! Input file formats: measurement files, experiment configs and scenario
//! descriptions. All are JSON.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use rssloc_core::scenarios::{ScenarioId, SignalParams, DEFAULT_ALPHA, DEFAULT_P0};
use rssloc_core::{GnConfig, MeasurementSet, NoiseModel, Point, Scenario};

use crate::bench::{EstimatorKind, ExperimentConfig, ScenarioSource, Sweep};
use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
}

/// Sensor positions with either raw dB readings or equivalent measurements.
/// When both are present `raw_db` wins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementFile {
    pub sensors: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    /// Known shadowing deviation; absent selects the unknown-variance path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
}

/// Defaults for `estimate`; fields in the measurement file take precedence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub alpha: Option<f64>,
    pub p0: Option<f64>,
    pub sigma_db: Option<f64>,
}

/// A measurement set ready for estimation plus the noise model, if known.
#[derive(Clone, Debug)]
pub struct EstimateInput {
    pub measurements: MeasurementSet,
    pub noise: Option<NoiseModel>,
    pub alpha: f64,
}

impl MeasurementFile {
    pub fn resolve(self, defaults: &EstimateConfig) -> Result<EstimateInput, CliError> {
        let alpha = self.alpha.or(defaults.alpha).unwrap_or(DEFAULT_ALPHA);
        let p0 = self.p0.or(defaults.p0).unwrap_or(DEFAULT_P0);
        let sigma = self.sigma_db.or(defaults.sigma_db);
        let measurements = match (self.raw_db, self.y) {
            (Some(raw), _) => MeasurementSet::from_raw_db(self.sensors, raw, p0, alpha)?,
            (None, Some(y)) => MeasurementSet::from_equivalent(self.sensors, y)?,
            (None, None) => {
                return Err(CliError::Schema(
                    "measurement file needs `raw_db` or `y`".into(),
                ))
            }
        };
        let noise = sigma.map(|s| NoiseModel::new(s, alpha)).transpose()?;
        Ok(EstimateInput {
            measurements,
            noise,
            alpha,
        })
    }
}

/// A registry id or an inline scenario object.
pub fn parse_scenario(value: Value) -> Result<ScenarioSource, CliError> {
    match value {
        Value::String(id) => Ok(ScenarioSource::Registry(id.parse::<ScenarioId>()?)),
        other => serde_json::from_value::<Scenario>(other)
            .map(ScenarioSource::Inline)
            .map_err(|e| CliError::Schema(e.to_string())),
    }
}

/// On-disk experiment configuration. Missing fields take the defaults of
/// the named scenario family.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub scenario: Value,
    pub estimators: Option<Vec<EstimatorKind>>,
    pub sweep: Option<Sweep>,
    pub trials: Option<u32>,
    pub master_seed: Option<u64>,
    pub alpha: Option<f64>,
    pub p0: Option<f64>,
    pub sigma_db: Option<f64>,
    pub rounds: Option<u32>,
    pub random_sensors: Option<usize>,
    pub fixed_geometry: Option<bool>,
    pub record_timing: Option<bool>,
    pub threads: Option<usize>,
    pub ml: Option<GnConfig>,
}

pub const DEFAULT_TRIALS: u32 = 1000;
pub const DEFAULT_ROUNDS_SWEEP: [u32; 6] = [3, 10, 30, 100, 200, 400];
pub const DEFAULT_N_SWEEP: [usize; 6] = [100, 300, 1000, 2000, 3000, 4000];

impl ExperimentFile {
    /// Builds the harness config. `seed` overrides `master_seed`; one of
    /// them must be present.
    pub fn into_config(self, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
        let scenario = parse_scenario(self.scenario)?;
        let master_seed = seed.or(self.master_seed).ok_or_else(|| {
            CliError::InvalidInput("experiments need an explicit seed (--seed)".into())
        })?;
        let sweep = self.sweep.unwrap_or_else(|| match &scenario {
            ScenarioSource::Registry(ScenarioId::TwoDRandom) => {
                Sweep::NRandom(DEFAULT_N_SWEEP.to_vec())
            }
            _ => Sweep::Rounds(DEFAULT_ROUNDS_SWEEP.to_vec()),
        });
        let base = SignalParams::default();
        let mut cfg = ExperimentConfig::new(
            scenario,
            sweep,
            self.trials.unwrap_or(DEFAULT_TRIALS),
            master_seed,
        );
        cfg.params = SignalParams {
            alpha: self.alpha.unwrap_or(base.alpha),
            p0: self.p0.unwrap_or(base.p0),
            sigma_db: self.sigma_db.unwrap_or(base.sigma_db),
            rounds: self.rounds.unwrap_or(base.rounds),
        };
        if let Some(e) = self.estimators {
            cfg.estimators = e;
        }
        if let Some(n) = self.random_sensors {
            cfg.random_sensors = n;
        }
        cfg.fixed_geometry = self.fixed_geometry.unwrap_or(false);
        cfg.record_timing = self.record_timing.unwrap_or(false);
        cfg.threads = self.threads;
        if let Some(ml) = self.ml {
            cfg.ml = ml;
        }
        Ok(cfg)
    }
}
