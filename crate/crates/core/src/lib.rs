//! Source localization from received-signal-strength (RSS) readings.
//!
//! The crate implements a two-step estimator for the log-distance path-loss
//! model: a closed-form linear least-squares estimate on an exponentiated
//! form of the measurements, refined by a single Gauss-Newton step on the
//! maximum-likelihood objective. It also provides Fisher information and
//! Cramér-Rao bounds, sensor-geometry rank diagnostics, and the benchmark
//! scenario layouts.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is pure:
//! given the same inputs (and seed, where randomness is involved) every
//! function returns bit-identical results.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod estimators;
pub mod geometry;
pub mod inference;
pub mod linalg;
pub mod model;
pub mod point;
pub mod rng;
pub mod scenarios;
pub mod stats;

pub use error::{Error, GeometricCondition, Result};
pub use estimators::{
    estimate_sigma_from_b, gn_step, ls_known_variance, ls_unknown_variance, ml_objective,
    ml_reference, ml_reference_with_trace, two_step, Estimate, GnConfig, Stage,
};
pub use geometry::{
    check_hyperplane, check_hypersphere, localizability, LocalizabilityReport, Verdict,
};
pub use inference::{fisher_information, rcrlb_curve, CurveSweep, FisherSummary};
pub use model::{
    equivalent_measurement, generate_measurements, generate_measurements_with_rng, lognormal_bias,
    MeasurementSet, NoiseModel, Scenario,
};
pub use point::Point;
pub use scenarios::{ScenarioId, SignalParams};
