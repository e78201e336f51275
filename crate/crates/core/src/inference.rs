//! Fisher information and Cramér-Rao bounds for the source position.
//!
//! With `g_i = (p - p_i) / (|p - p_i|^2 ln 10)` the gradient of
//! `log10 |p - p_i|`, the information over `n` measurements is
//! `F = (100 alpha^2 / sigma^2) sum g_i g_i^T = (100 alpha^2 / sigma^2) n M_n`.
//! The bounds are benchmark quantities evaluated at the true source.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::SmallMatrix;
use crate::math;
use crate::model::Scenario;
use crate::point::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct FisherSummary {
    pub fisher: SmallMatrix,
    /// `tr(F^-1)`, square meters.
    pub crlb: f64,
    /// `sqrt(crlb)`, meters.
    pub rcrlb: f64,
    /// `(1/n) sum g_i g_i^T`.
    pub m_n: SmallMatrix,
    pub eval_point: Point,
    pub n: usize,
}

impl FisherSummary {
    pub fn covariance_bound(&self) -> SmallMatrix {
        self.fisher
            .inverse()
            .expect("FisherSummary holds a nonsingular matrix")
    }
}

/// Information at `eval_point` for `rounds` observations of each sensor.
pub fn fisher_for_sensors(
    sensors: &[Point],
    rounds: u32,
    alpha: f64,
    sigma_db: f64,
    eval_point: &Point,
) -> Result<FisherSummary> {
    if sigma_db == 0.0 {
        return Err(Error::InfiniteInformation);
    }
    if !(sigma_db > 0.0 && sigma_db.is_finite()) || !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("sigma and alpha must be finite and positive"));
    }
    if rounds == 0 || sensors.is_empty() {
        return Err(invalid("need at least one measurement"));
    }
    let dim = eval_point.dim();
    let mut sum = SmallMatrix::zeros(dim);
    for (i, s) in sensors.iter().enumerate() {
        s.check_dim(dim)?;
        let g = *eval_point - *s;
        let d2 = g.norm_sq();
        if math::sqrt(d2) < crate::estimators::MIN_SENSOR_DISTANCE {
            return Err(Error::SingularPoint { sensor: i });
        }
        sum.add_outer(g.as_slice(), 1.0 / (d2 * d2 * math::LN_10 * math::LN_10));
    }
    let n = sensors.len() * rounds as usize;
    let fisher = sum.scaled(100.0 * alpha * alpha / (sigma_db * sigma_db) * rounds as f64);
    let m_n = sum.scaled(1.0 / sensors.len() as f64);
    let inv = fisher
        .inverse()
        .filter(|inv| inv.trace() > 0.0 && inv.trace().is_finite())
        .ok_or_else(|| Error::DegenerateGeometry("singular Fisher information".into()))?;
    let crlb = inv.trace();
    Ok(FisherSummary {
        fisher,
        crlb,
        rcrlb: math::sqrt(crlb),
        m_n,
        eval_point: *eval_point,
        n,
    })
}

pub fn fisher_information(scenario: &Scenario, eval_point: &Point) -> Result<FisherSummary> {
    fisher_for_sensors(
        scenario.sensors(),
        scenario.rounds(),
        scenario.alpha(),
        scenario.sigma_db(),
        eval_point,
    )
}

/// Parameter swept by [`rcrlb_curve`].
#[derive(Clone, Debug, PartialEq)]
pub enum CurveSweep {
    Rounds(Vec<u32>),
    Sigma(Vec<f64>),
}

/// RCRLB at the true source for each sweep value, as `(value, rcrlb)`.
pub fn rcrlb_curve(scenario: &Scenario, sweep: &CurveSweep) -> Result<Vec<(f64, f64)>> {
    let src = scenario.source();
    match sweep {
        CurveSweep::Rounds(ts) => ts
            .iter()
            .map(|&t| {
                let f = fisher_information(&scenario.with_rounds(t)?, &src)?;
                Ok((t as f64, f.rcrlb))
            })
            .collect(),
        CurveSweep::Sigma(ss) => ss
            .iter()
            .map(|&s| {
                let f = fisher_information(&scenario.with_sigma(s)?, &src)?;
                Ok((s, f.rcrlb))
            })
            .collect(),
    }
}
