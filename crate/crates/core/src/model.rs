//! Log-distance path-loss measurement model.
//!
//! A sensor at distance `d` from the source reads (in dB)
//!
//! ```text
//! raw = 10 log10(P0) - 10 alpha log10(d) + eps,   eps ~ N(0, sigma^2)
//! ```
//!
//! which is rewritten as the equivalent measurement
//! `y = -(raw/10 - log10 P0)/alpha = log10(d) + omega` with
//! `omega = -eps/(10 alpha)`. Exponentiating gives `10^(2y) = d^2 10^(2 omega)`,
//! whose lognormal factor has mean `b` and variance `b^2 (b^2 - 1)`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::point::Point;

/// Sensors closer than this to the source are rejected.
pub const MIN_SOURCE_DISTANCE: f64 = 1e-9;

/// One localization problem: geometry plus signal parameters.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(try_from = "ScenarioFields", into = "ScenarioFields")
)]
pub struct Scenario {
    sensors: Vec<Point>,
    source: Point,
    alpha: f64,
    p0: f64,
    sigma_db: f64,
    rounds: u32,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFields {
    dimension: usize,
    sensors: Vec<Point>,
    source: Point,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_p0")]
    p0: f64,
    sigma_db: f64,
    #[serde(default = "default_rounds")]
    rounds: u32,
}

#[cfg(feature = "serde")]
fn default_alpha() -> f64 {
    crate::scenarios::DEFAULT_ALPHA
}

#[cfg(feature = "serde")]
fn default_p0() -> f64 {
    crate::scenarios::DEFAULT_P0
}

#[cfg(feature = "serde")]
fn default_rounds() -> u32 {
    1
}

#[cfg(feature = "serde")]
impl TryFrom<ScenarioFields> for Scenario {
    type Error = Error;

    fn try_from(f: ScenarioFields) -> Result<Self> {
        if f.source.dim() != f.dimension {
            return Err(Error::DimensionMismatch {
                expected: f.dimension,
                got: f.source.dim(),
            });
        }
        Scenario::new(f.sensors, f.source, f.alpha, f.p0, f.sigma_db, f.rounds)
    }
}

#[cfg(feature = "serde")]
impl From<Scenario> for ScenarioFields {
    fn from(s: Scenario) -> Self {
        ScenarioFields {
            dimension: s.dim(),
            sensors: s.sensors,
            source: s.source,
            alpha: s.alpha,
            p0: s.p0,
            sigma_db: s.sigma_db,
            rounds: s.rounds,
        }
    }
}

impl Scenario {
    pub fn new(
        sensors: Vec<Point>,
        source: Point,
        alpha: f64,
        p0: f64,
        sigma_db: f64,
        rounds: u32,
    ) -> Result<Self> {
        let dim = source.dim();
        if dim != 2 && dim != 3 {
            return Err(invalid("dimension must be 2 or 3"));
        }
        if !source.is_finite() {
            return Err(invalid("non-finite source coordinate"));
        }
        if sensors.is_empty() {
            return Err(invalid("sensor list is empty"));
        }
        for (i, s) in sensors.iter().enumerate() {
            s.check_dim(dim)?;
            if !s.is_finite() {
                return Err(invalid("non-finite sensor coordinate"));
            }
            if s.distance(&source) < MIN_SOURCE_DISTANCE {
                return Err(Error::DegenerateGeometry(alloc::format!(
                    "sensor {i} coincides with the source"
                )));
            }
        }
        check_signal_params(alpha, p0)?;
        if !(sigma_db >= 0.0 && sigma_db.is_finite()) {
            return Err(invalid("sigma must be finite and >= 0"));
        }
        if rounds == 0 {
            return Err(invalid("rounds must be positive"));
        }
        Ok(Self {
            sensors,
            source,
            alpha,
            p0,
            sigma_db,
            rounds,
        })
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn sensors(&self) -> &[Point] {
        &self.sensors
    }

    pub fn source(&self) -> Point {
        self.source
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn sigma_db(&self) -> f64 {
        self.sigma_db
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    /// Total number of measurements, `sensors * rounds`.
    pub fn n_measurements(&self) -> usize {
        self.sensors.len() * self.rounds as usize
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            sigma_db: self.sigma_db,
            alpha: self.alpha,
        }
    }

    pub fn with_sigma(&self, sigma_db: f64) -> Result<Self> {
        Self::new(
            self.sensors.clone(),
            self.source,
            self.alpha,
            self.p0,
            sigma_db,
            self.rounds,
        )
    }

    pub fn with_rounds(&self, rounds: u32) -> Result<Self> {
        Self::new(
            self.sensors.clone(),
            self.source,
            self.alpha,
            self.p0,
            self.sigma_db,
            rounds,
        )
    }

    /// Shifts every sensor and the source by `t`.
    pub fn translated(&self, t: Point) -> Result<Self> {
        Self::new(
            self.sensors.iter().map(|s| *s + t).collect(),
            self.source + t,
            self.alpha,
            self.p0,
            self.sigma_db,
            self.rounds,
        )
    }
}

fn check_signal_params(alpha: f64, p0: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("path-loss exponent must be finite and positive"));
    }
    if !(p0 > 0.0 && p0.is_finite()) {
        return Err(invalid("signal constant P0 must be finite and positive"));
    }
    Ok(())
}

/// Sensor coordinates paired with equivalent measurements (log10 meters).
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    sensors: Vec<Point>,
    y: Vec<f64>,
    raw_db: Option<Vec<f64>>,
}

impl MeasurementSet {
    /// Builds a set from equivalent measurements `y_i`.
    pub fn from_equivalent(sensors: Vec<Point>, y: Vec<f64>) -> Result<Self> {
        Self::validate(&sensors, &y)?;
        Ok(Self {
            sensors,
            y,
            raw_db: None,
        })
    }

    /// Builds a set from raw dB readings, converting each one with
    /// [`equivalent_measurement`].
    pub fn from_raw_db(sensors: Vec<Point>, raw_db: Vec<f64>, p0: f64, alpha: f64) -> Result<Self> {
        let y = raw_db
            .iter()
            .map(|&r| equivalent_measurement(r, p0, alpha))
            .collect::<Result<Vec<_>>>()?;
        Self::validate(&sensors, &y)?;
        Ok(Self {
            sensors,
            y,
            raw_db: Some(raw_db),
        })
    }

    fn validate(sensors: &[Point], y: &[f64]) -> Result<()> {
        if sensors.len() != y.len() {
            return Err(invalid(alloc::format!(
                "{} sensors but {} measurements",
                sensors.len(),
                y.len()
            )));
        }
        let dim = sensors.first().map_or(2, Point::dim);
        if dim != 2 && dim != 3 {
            return Err(invalid("dimension must be 2 or 3"));
        }
        if y.len() < dim + 1 {
            return Err(Error::InsufficientSensors {
                needed: dim + 1,
                got: y.len(),
            });
        }
        for s in sensors {
            s.check_dim(dim)?;
            if !s.is_finite() {
                return Err(invalid("non-finite sensor coordinate"));
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite measurement"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.sensors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn sensors(&self) -> &[Point] {
        &self.sensors
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn raw_db(&self) -> Option<&[f64]> {
        self.raw_db.as_deref()
    }

    /// Same measurements with every sensor shifted by `t`.
    pub fn translated(&self, t: Point) -> Self {
        Self {
            sensors: self.sensors.iter().map(|s| *s + t).collect(),
            y: self.y.clone(),
            raw_db: self.raw_db.clone(),
        }
    }
}

/// Distributional parameters of the measurement noise.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseModel {
    pub sigma_db: f64,
    pub alpha: f64,
}

impl NoiseModel {
    pub fn new(sigma_db: f64, alpha: f64) -> Result<Self> {
        if !(sigma_db >= 0.0 && sigma_db.is_finite()) {
            return Err(invalid("sigma must be finite and >= 0"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("path-loss exponent must be finite and positive"));
        }
        Ok(Self { sigma_db, alpha })
    }

    /// Standard deviation of the equivalent noise `omega`, `sigma/(10 alpha)`.
    pub fn omega_std(&self) -> f64 {
        self.sigma_db / (10.0 * self.alpha)
    }

    /// Mean of `10^(2 omega)`.
    pub fn bias_b(&self) -> f64 {
        bias_formula(self.sigma_db, self.alpha)
    }

    /// Variance of `10^(2 omega)`, `b^2 (b^2 - 1)`.
    pub fn lognormal_variance(&self) -> f64 {
        let b = self.bias_b();
        b * b * (b * b - 1.0)
    }
}

fn bias_formula(sigma_db: f64, alpha: f64) -> f64 {
    math::exp(math::LN_10 * math::LN_10 * sigma_db * sigma_db / (50.0 * alpha * alpha))
}

/// Converts a dB reading into the equivalent log-distance measurement
/// `y = -(raw/10 - log10 P0)/alpha`.
pub fn equivalent_measurement(raw_db: f64, p0: f64, alpha: f64) -> Result<f64> {
    if !raw_db.is_finite() {
        return Err(invalid("non-finite dB reading"));
    }
    check_signal_params(alpha, p0)?;
    Ok(-(raw_db / 10.0 - math::log10(p0)) / alpha)
}

/// Noise-free dB reading at distance `d`.
pub fn noise_free_raw_db(d: f64, p0: f64, alpha: f64) -> f64 {
    10.0 * math::log10(p0) - 10.0 * alpha * math::log10(d)
}

/// Mean `b = E[10^(2 omega)] = exp((ln 10)^2 sigma^2 / (50 alpha^2))`.
pub fn lognormal_bias(sigma_db: f64, alpha: f64) -> Result<f64> {
    Ok(NoiseModel::new(sigma_db, alpha)?.bias_b())
}

/// Draws `rounds` i.i.d. readings per sensor. Measurement `t * n_sensors + i`
/// belongs to sensor `i` in round `t`.
pub fn generate_measurements_with_rng<R: Rng + ?Sized>(
    scenario: &Scenario,
    rng: &mut R,
) -> Result<MeasurementSet> {
    let ns = scenario.sensors.len();
    let n = scenario.n_measurements();
    let clean: Vec<f64> = scenario
        .sensors
        .iter()
        .map(|s| {
            let d = s.distance(&scenario.source);
            if d == 0.0 {
                return Err(Error::DegenerateGeometry("sensor at the source".into()));
            }
            Ok(noise_free_raw_db(d, scenario.p0, scenario.alpha))
        })
        .collect::<Result<_>>()?;
    let mut sensors = Vec::with_capacity(n);
    let mut raw = Vec::with_capacity(n);
    for _ in 0..scenario.rounds {
        for i in 0..ns {
            let z: f64 = rng.sample(StandardNormal);
            sensors.push(scenario.sensors[i]);
            raw.push(clean[i] + scenario.sigma_db * z);
        }
    }
    MeasurementSet::from_raw_db(sensors, raw, scenario.p0, scenario.alpha)
}

/// Deterministic measurement draw: same `(scenario, seed)`, same output.
pub fn generate_measurements(scenario: &Scenario, seed: u64) -> Result<MeasurementSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_measurements_with_rng(scenario, &mut rng)
}
