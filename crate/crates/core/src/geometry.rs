//! Sensor-geometry rank tests.
//!
//! The known-variance least-squares path needs sensors that do not all lie
//! on one line (2-D) or plane (3-D); the unknown-variance path additionally
//! needs them off any common circle or sphere. Both conditions are checked
//! here as finite-sample rank tests. Asymptotic clauses about the limiting
//! sensor distribution have no finite-sample analogue and are not tested.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{condition_from_singular_values, singular_values, ColMatrix};
use crate::math;
use crate::point::Point;

/// Relative singular-value threshold for the rank tests.
pub const TOL_RANK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    /// Only the known-variance estimator is identifiable.
    KnownVarianceOnly,
    FullyLocalizable,
    NotLocalizable,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalizabilityReport {
    pub hyperplane_ok: bool,
    pub hypersphere_ok: bool,
    /// Condition number of `X^T X / n` with rows `[-2 p_i^T, 1]`.
    pub gram_condition_known: f64,
    /// Condition number of `Phi^T Phi / n` with rows `[-2 p_i^T, 1, |p_i|^2]`.
    /// Infinite when there are fewer than `m + 2` sensors.
    pub gram_condition_unknown: f64,
    pub verdict: Verdict,
}

fn common_dim(sensors: &[Point]) -> Result<usize> {
    let dim = sensors.first().map_or(2, Point::dim);
    for s in sensors {
        s.check_dim(dim)?;
    }
    Ok(dim)
}

fn require(sensors: &[Point], needed: usize) -> Result<()> {
    if sensors.len() < needed {
        return Err(Error::InsufficientSensors {
            needed,
            got: sensors.len(),
        });
    }
    Ok(())
}

/// Centers the sensors and scales them to unit RMS radius. Rank of both
/// test matrices is invariant under this map.
fn normalized(sensors: &[Point], dim: usize) -> Vec<Point> {
    let n = sensors.len() as f64;
    let mean = sensors.iter().fold(Point::zero(dim), |acc, p| acc + *p) * (1.0 / n);
    let centered: Vec<Point> = sensors.iter().map(|p| *p - mean).collect();
    let rms = math::sqrt(centered.iter().map(Point::norm_sq).sum::<f64>() / n);
    if rms == 0.0 {
        return centered;
    }
    centered.into_iter().map(|p| p * (1.0 / rms)).collect()
}

fn full_rank(a: &ColMatrix) -> bool {
    let sv = singular_values(a);
    sv[0] > 0.0 && sv[sv.len() - 1] > TOL_RANK * sv[0]
}

fn hyperplane_matrix(sensors: &[Point], dim: usize) -> ColMatrix {
    ColMatrix::from_rows(sensors.len(), dim, |i, row| {
        row.copy_from_slice(sensors[i].as_slice())
    })
}

pub(crate) fn known_design_row(p: &Point, scale: f64, row: &mut [f64]) {
    let m = p.dim();
    for k in 0..m {
        row[k] = -2.0 * p[k] * scale;
    }
    row[m] = scale;
}

pub(crate) fn unknown_design_row(p: &Point, row: &mut [f64]) {
    known_design_row(p, 1.0, row);
    row[p.dim() + 1] = p.norm_sq();
}

/// True iff the sensors span an affine subspace of full dimension.
pub fn check_hyperplane(sensors: &[Point]) -> Result<bool> {
    let dim = common_dim(sensors)?;
    require(sensors, dim + 1)?;
    let pts = normalized(sensors, dim);
    Ok(full_rank(&hyperplane_matrix(&pts, dim)))
}

/// True iff the matrix with rows `[-2 p_i^T, 1, |p_i|^2]` has full column
/// rank, i.e. the sensors do not share a circle/sphere (nor a line/plane).
pub fn check_hypersphere(sensors: &[Point]) -> Result<bool> {
    let dim = common_dim(sensors)?;
    require(sensors, dim + 2)?;
    let pts = normalized(sensors, dim);
    let phi = ColMatrix::from_rows(pts.len(), dim + 2, |i, row| {
        unknown_design_row(&pts[i], row)
    });
    Ok(full_rank(&phi))
}

fn gram_condition(a: &ColMatrix) -> f64 {
    let c = condition_from_singular_values(&singular_values(a));
    c * c
}

/// Combines both rank tests with the Gram condition numbers of the raw
/// design matrices. When `needs_unknown_variance` is false, too few sensors
/// for the sphere test yields `hypersphere_ok = false` instead of an error.
pub fn localizability(
    sensors: &[Point],
    needs_unknown_variance: bool,
) -> Result<LocalizabilityReport> {
    let dim = common_dim(sensors)?;
    let hyperplane_ok = check_hyperplane(sensors)?;
    let hypersphere_ok = match check_hypersphere(sensors) {
        Ok(v) => v,
        Err(Error::InsufficientSensors { .. }) if !needs_unknown_variance => false,
        Err(e) => return Err(e),
    };
    let x = ColMatrix::from_rows(sensors.len(), dim + 1, |i, row| {
        known_design_row(&sensors[i], 1.0, row)
    });
    let gram_condition_unknown = if sensors.len() >= dim + 2 {
        let phi = ColMatrix::from_rows(sensors.len(), dim + 2, |i, row| {
            unknown_design_row(&sensors[i], row)
        });
        gram_condition(&phi)
    } else {
        f64::INFINITY
    };
    let verdict = match (hyperplane_ok, hypersphere_ok) {
        (false, _) => Verdict::NotLocalizable,
        (true, false) => Verdict::KnownVarianceOnly,
        (true, true) => Verdict::FullyLocalizable,
    };
    Ok(LocalizabilityReport {
        hyperplane_ok,
        hypersphere_ok,
        gram_condition_known: gram_condition(&x),
        gram_condition_unknown,
        verdict,
    })
}
