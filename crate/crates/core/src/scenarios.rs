//! Benchmark scenario families: a fixed 10-sensor 2-D layout, uniformly
//! random 2-D sensors in a 100 m square, and a fixed 10-sensor 3-D layout.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::model::Scenario;
use crate::point::Point;

pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_P0: f64 = 1.0;

pub const FIXED_2D_SENSORS: [Point; 10] = [
    Point::new2(0.0, 20.0),
    Point::new2(0.0, 50.0),
    Point::new2(50.0, 50.0),
    Point::new2(50.0, 0.0),
    Point::new2(50.0, -50.0),
    Point::new2(0.0, -50.0),
    Point::new2(0.0, -20.0),
    Point::new2(-50.0, -50.0),
    Point::new2(-50.0, 0.0),
    Point::new2(-50.0, 50.0),
];
pub const FIXED_2D_SOURCE: Point = Point::new2(70.0, 30.0);

pub const FIXED_3D_SENSORS: [Point; 10] = [
    Point::new3(0.0, 20.0, 50.0),
    Point::new3(0.0, 50.0, 0.0),
    Point::new3(50.0, 50.0, -50.0),
    Point::new3(50.0, 0.0, 0.0),
    Point::new3(50.0, -50.0, 50.0),
    Point::new3(0.0, -50.0, 0.0),
    Point::new3(0.0, -20.0, -50.0),
    Point::new3(-50.0, -50.0, 0.0),
    Point::new3(-50.0, 0.0, 50.0),
    Point::new3(-50.0, 50.0, -50.0),
];
pub const FIXED_3D_SOURCE: Point = Point::new3(70.0, 30.0, 10.0);

pub const RANDOM_2D_SOURCE: Point = Point::new2(120.0, 20.0);
/// Side length of the square the random sensors are drawn from.
pub const RANDOM_REGION_SIDE: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    TwoDFixed,
    TwoDRandom,
    ThreeDFixed,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 3] = [
        ScenarioId::TwoDFixed,
        ScenarioId::TwoDRandom,
        ScenarioId::ThreeDFixed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioId::TwoDFixed => "2d-fixed",
            ScenarioId::TwoDRandom => "2d-random",
            ScenarioId::ThreeDFixed => "3d-fixed",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ScenarioId::ThreeDFixed => 3,
            _ => 2,
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, ScenarioId::TwoDRandom)
    }

    pub fn source(&self) -> Point {
        match self {
            ScenarioId::TwoDFixed => FIXED_2D_SOURCE,
            ScenarioId::TwoDRandom => RANDOM_2D_SOURCE,
            ScenarioId::ThreeDFixed => FIXED_3D_SOURCE,
        }
    }

    /// Sensor layout of the fixed families; `None` for the random one.
    pub fn fixed_sensors(&self) -> Option<&'static [Point]> {
        match self {
            ScenarioId::TwoDFixed => Some(&FIXED_2D_SENSORS),
            ScenarioId::ThreeDFixed => Some(&FIXED_3D_SENSORS),
            ScenarioId::TwoDRandom => None,
        }
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

impl core::fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Registered scenario families.
pub fn scenario_registry() -> &'static [ScenarioId] {
    &ScenarioId::ALL
}

/// Signal parameters shared by every family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignalParams {
    pub alpha: f64,
    pub p0: f64,
    pub sigma_db: f64,
    pub rounds: u32,
}

impl Default for SignalParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            p0: DEFAULT_P0,
            sigma_db: 2.0,
            rounds: 1,
        }
    }
}

/// `n` sensors i.i.d. uniform on `[0, 100]^dim`.
pub fn random_sensors<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let mut p = Point::zero(dim);
            for k in 0..dim {
                p.set(k, rng.random_range(0.0..=RANDOM_REGION_SIDE));
            }
            p
        })
        .collect()
}

/// Instantiates a family. The random family needs `(n, seed)`.
pub fn build(
    id: ScenarioId,
    params: &SignalParams,
    random: Option<(usize, u64)>,
) -> Result<Scenario> {
    let sensors = match (id.fixed_sensors(), random) {
        (Some(fixed), _) => fixed.to_vec(),
        (None, Some((n, seed))) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_sensors(n, id.dim(), &mut rng)
        }
        (None, None) => return Err(invalid("the random scenario needs a sensor count and seed")),
    };
    build_with_sensors(id, params, sensors)
}

pub fn build_with_sensors(
    id: ScenarioId,
    params: &SignalParams,
    sensors: Vec<Point>,
) -> Result<Scenario> {
    Scenario::new(
        sensors,
        id.source(),
        params.alpha,
        params.p0,
        params.sigma_db,
        params.rounds,
    )
}
