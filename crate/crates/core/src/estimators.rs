//! Closed-form least-squares estimators and Gauss-Newton refinement.
//!
//! Squaring and exponentiating `y_i = log10 d_i + omega_i` gives
//! `10^(2 y_i) = d_i^2 10^(2 omega_i)`. Writing `10^(2 omega_i) = b + eta_i`
//! with `b` the lognormal mean turns the model into a linear regression:
//!
//! * known noise variance: `10^(2y) - b|p_i|^2 = b [-2 p_i^T, 1] theta + v`,
//!   with `theta = [p, |p|^2]`;
//! * unknown variance: `10^(2y) = [-2 p_i^T, 1, |p_i|^2] beta + v`, with
//!   `beta = b [p, |p|^2, 1]`.
//!
//! Both are solved without the quadratic constraint linking the entries;
//! the result is root-n consistent and one Gauss-Newton step on the
//! likelihood objective makes it asymptotically efficient.

use alloc::vec::Vec;

use crate::error::{invalid, Error, GeometricCondition, Result};
use crate::geometry::{known_design_row, unknown_design_row};
use crate::linalg::{solve_least_squares, ColMatrix};
use crate::math;
use crate::model::{MeasurementSet, NoiseModel};
use crate::point::Point;

/// Design matrices with a larger condition estimate are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Evaluation points closer than this to a sensor are rejected.
pub const MIN_SENSOR_DISTANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Stage {
    LsKnownVar,
    LsUnknownVar,
    TwoStep,
    MlReference,
}

/// A source estimate together with the intermediate quantities that
/// produced it.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Estimate {
    pub p_hat: Point,
    pub stage: Stage,
    /// Regression coefficients `[p, |p|^2]` of the known-variance model.
    pub theta_hat: Option<Vec<f64>>,
    /// Regression coefficients `b [p, |p|^2, 1]` of the unknown-variance model.
    pub beta_hat: Option<Vec<f64>>,
    /// Lognormal mean used (known variance) or estimated (unknown variance).
    pub b_hat: Option<f64>,
    /// Closed-form estimate a refinement started from.
    pub initial: Option<Point>,
    pub gn_iterations: u32,
    /// `||y - f(p_hat)||`, i.e. `sqrt(n * ml_objective(p_hat))`. Infinite if
    /// `p_hat` sits on a sensor.
    pub residual_norm: f64,
    /// The refinement step failed and `p_hat` is the closed-form estimate.
    pub degraded_refinement: bool,
    /// Iterative solvers: stopping rule met. Always true otherwise.
    pub converged: bool,
}

impl Estimate {
    fn closed_form(p_hat: Point, stage: Stage, ms: &MeasurementSet) -> Self {
        Self {
            p_hat,
            stage,
            theta_hat: None,
            beta_hat: None,
            b_hat: None,
            initial: None,
            gn_iterations: 0,
            residual_norm: residual_norm(&p_hat, ms),
            degraded_refinement: false,
            converged: true,
        }
    }
}

fn residual_norm(p: &Point, ms: &MeasurementSet) -> f64 {
    match ml_objective(p, ms) {
        Ok(v) => math::sqrt(v * ms.len() as f64),
        Err(_) => f64::INFINITY,
    }
}

/// Stopping rules for iterated Gauss-Newton.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GnConfig {
    pub max_iterations: u32,
    /// Stop once a step is shorter than this (meters).
    pub step_tolerance: f64,
    /// Levenberg damping added to `J^T J`; zero disables it.
    pub damping_floor: f64,
}

impl Default for GnConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            step_tolerance: 1e-10,
            damping_floor: 0.0,
        }
    }
}

impl GnConfig {
    pub fn one_step() -> Self {
        Self {
            max_iterations: 1,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(invalid("max_iterations must be at least 1"));
        }
        if !(self.step_tolerance > 0.0) {
            return Err(invalid("step_tolerance must be positive"));
        }
        if !(self.damping_floor >= 0.0 && self.damping_floor.is_finite()) {
            return Err(invalid("damping_floor must be finite and >= 0"));
        }
        Ok(())
    }
}

fn check_point_dim(p: &Point, ms: &MeasurementSet) -> Result<()> {
    p.check_dim(ms.dim())
}

/// Known-variance LS: regress `10^(2y_i) - b|p_i|^2` on `b[-2p_i^T, 1]`
/// and read the source off the first `m` coefficients.
pub fn ls_known_variance(ms: &MeasurementSet, b: f64) -> Result<Estimate> {
    if !(b >= 1.0 && b.is_finite()) {
        return Err(invalid("lognormal mean b must be finite and >= 1"));
    }
    let m = ms.dim();
    let n = ms.len();
    let sensors = ms.sensors();
    let x = ColMatrix::from_rows(n, m + 1, |i, row| known_design_row(&sensors[i], b, row));
    let rhs: Vec<f64> = sensors
        .iter()
        .zip(ms.y())
        .map(|(p, &y)| math::exp10_2x(y) - b * p.norm_sq())
        .collect();
    let ls = solve_least_squares(x, rhs, MAX_CONDITION).map_err(|e| Error::SingularGram {
        condition_failed: GeometricCondition::NonCohyperplanar,
        condition: e.condition,
    })?;
    let p_hat = Point::from_slice(&ls.x[..m]).map_err(|_| Error::Numeric("known-variance LS"))?;
    Ok(Estimate {
        theta_hat: Some(ls.x),
        b_hat: Some(b),
        ..Estimate::closed_form(p_hat, Stage::LsKnownVar, ms)
    })
}

/// Recovers the source from `beta = b[p, |p|^2, 1]` as
/// `beta[..m] / max(1, beta[m+1])`.
pub fn source_from_beta(beta: &[f64], m: usize) -> Result<Point> {
    if beta.len() != m + 2 {
        return Err(invalid("beta must have m + 2 entries"));
    }
    let denom = beta[m + 1].max(1.0);
    let mut p = Point::zero(m);
    for k in 0..m {
        p.set(k, beta[k] / denom);
    }
    if !p.is_finite() {
        return Err(Error::Numeric("unknown-variance LS"));
    }
    Ok(p)
}

/// Unknown-variance LS: regress `10^(2y_i)` on `[-2p_i^T, 1, |p_i|^2]`.
pub fn ls_unknown_variance(ms: &MeasurementSet) -> Result<Estimate> {
    let m = ms.dim();
    let n = ms.len();
    if n < m + 2 {
        return Err(Error::InsufficientSensors {
            needed: m + 2,
            got: n,
        });
    }
    let sensors = ms.sensors();
    let phi = ColMatrix::from_rows(n, m + 2, |i, row| unknown_design_row(&sensors[i], row));
    let rhs: Vec<f64> = ms.y().iter().map(|&y| math::exp10_2x(y)).collect();
    let ls = solve_least_squares(phi, rhs, MAX_CONDITION).map_err(|e| Error::SingularGram {
        condition_failed: GeometricCondition::NonCohyperspherical,
        condition: e.condition,
    })?;
    let p_hat = source_from_beta(&ls.x, m)?;
    Ok(Estimate {
        b_hat: Some(ls.x[m + 1]),
        beta_hat: Some(ls.x),
        ..Estimate::closed_form(p_hat, Stage::LsUnknownVar, ms)
    })
}

/// Noise level implied by a lognormal mean: inverts
/// `b = exp((ln 10)^2 sigma^2 / (50 alpha^2))`. Returns 0 for `b <= 1`.
pub fn estimate_sigma_from_b(b_hat: f64, alpha: f64) -> f64 {
    if !(b_hat > 1.0) {
        return 0.0;
    }
    alpha / math::LN_10 * math::sqrt(50.0 * math::ln(b_hat))
}

/// Mean squared log-distance residual `(1/n) sum (y_i - log10|p_i - p|)^2`.
pub fn ml_objective(p: &Point, ms: &MeasurementSet) -> Result<f64> {
    check_point_dim(p, ms)?;
    let mut acc = 0.0;
    for (i, (s, y)) in ms.sensors().iter().zip(ms.y()).enumerate() {
        let d = s.distance(p);
        if d < MIN_SENSOR_DISTANCE {
            return Err(Error::SingularPoint { sensor: i });
        }
        let r = y - math::log10(d);
        acc += r * r;
    }
    Ok(acc / ms.len() as f64)
}

/// Residual vector `y - f(p)` and Jacobian rows `(p - p_i)/(|p - p_i|^2 ln 10)`.
pub fn residuals_and_jacobian(p: &Point, ms: &MeasurementSet) -> Result<(Vec<f64>, ColMatrix)> {
    check_point_dim(p, ms)?;
    let m = ms.dim();
    let sensors = ms.sensors();
    let mut r = Vec::with_capacity(ms.len());
    for (i, (s, y)) in sensors.iter().zip(ms.y()).enumerate() {
        let d = s.distance(p);
        if d < MIN_SENSOR_DISTANCE {
            return Err(Error::SingularPoint { sensor: i });
        }
        r.push(y - math::log10(d));
    }
    let j = ColMatrix::from_rows(ms.len(), m, |i, row| {
        let diff = *p - sensors[i];
        let scale = 1.0 / (diff.norm_sq() * math::LN_10);
        for k in 0..m {
            row[k] = diff[k] * scale;
        }
    });
    Ok((r, j))
}

fn gn_increment(p: &Point, ms: &MeasurementSet, damping: f64) -> Result<Point> {
    let (mut r, mut j) = residuals_and_jacobian(p, ms)?;
    if damping > 0.0 {
        j = j.with_ridge(math::sqrt(damping));
        r.resize(j.rows(), 0.0);
    }
    let ls = solve_least_squares(j, r, MAX_CONDITION).map_err(|e| Error::DegenerateJacobian {
        condition: e.condition,
    })?;
    let step = Point::from_slice(&ls.x).map_err(|_| Error::Numeric("Gauss-Newton step"))?;
    Ok(step)
}

/// One Gauss-Newton iteration `p + (J^T J)^{-1} J^T (y - f(p))` on the
/// likelihood objective, solved by QR on `J`.
pub fn gn_step(p: &Point, ms: &MeasurementSet) -> Result<Point> {
    let next = *p + gn_increment(p, ms, 0.0)?;
    if !next.is_finite() {
        return Err(Error::Numeric("Gauss-Newton step"));
    }
    Ok(next)
}

/// Closed-form estimate followed by exactly one Gauss-Newton step. The
/// known-variance path is used when `noise` is given, the unknown-variance
/// path otherwise. If the refinement fails, the closed-form estimate is
/// returned with `degraded_refinement` set.
pub fn two_step(ms: &MeasurementSet, noise: Option<&NoiseModel>) -> Result<Estimate> {
    let first = match noise {
        Some(nm) => ls_known_variance(ms, nm.bias_b())?,
        None => ls_unknown_variance(ms)?,
    };
    let initial = first.p_hat;
    Ok(match gn_step(&initial, ms) {
        Ok(p_hat) => Estimate {
            p_hat,
            stage: Stage::TwoStep,
            initial: Some(initial),
            gn_iterations: 1,
            residual_norm: residual_norm(&p_hat, ms),
            ..first
        },
        Err(_) => Estimate {
            stage: Stage::TwoStep,
            initial: Some(initial),
            degraded_refinement: true,
            ..first
        },
    })
}

/// Iterated Gauss-Newton from `init`, used as a numerical stand-in for the
/// maximum-likelihood estimate.
pub fn ml_reference(ms: &MeasurementSet, init: &Point, cfg: &GnConfig) -> Result<Estimate> {
    ml_reference_with_trace(ms, init, cfg).map(|(e, _)| e)
}

/// As [`ml_reference`], also returning the objective at `init` and after
/// every accepted iteration.
pub fn ml_reference_with_trace(
    ms: &MeasurementSet,
    init: &Point,
    cfg: &GnConfig,
) -> Result<(Estimate, Vec<f64>)> {
    cfg.validate()?;
    let mut current = *init;
    let mut trace = alloc::vec![ml_objective(init, ms)?];
    let (mut best, mut best_obj) = (current, trace[0]);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        let step = match gn_increment(&current, ms, cfg.damping_floor) {
            Ok(s) => s,
            Err(e) if iterations == 0 => return Err(e),
            Err(_) => break,
        };
        let next = current + step;
        let obj = match ml_objective(&next, ms) {
            Ok(v) if v.is_finite() => v,
            Err(e) if iterations == 0 => return Err(e),
            _ => break,
        };
        iterations += 1;
        current = next;
        trace.push(obj);
        if obj < best_obj {
            best = next;
            best_obj = obj;
        }
        if step.norm() < cfg.step_tolerance {
            converged = true;
            break;
        }
    }
    let p_hat = if converged { current } else { best };
    let est = Estimate {
        p_hat,
        stage: Stage::MlReference,
        theta_hat: None,
        beta_hat: None,
        b_hat: None,
        initial: Some(*init),
        gn_iterations: iterations,
        residual_norm: residual_norm(&p_hat, ms),
        degraded_refinement: false,
        converged,
    };
    Ok((est, trace))
}
