//! Bias/RMSE accumulation and small regression helpers.

use crate::math;
use crate::point::Point;

/// Running sums for bias `sum_k |mean_j(p_j) - p0|_k` and
/// RMSE `sqrt(mean_j |p_j - p0|^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorStats {
    truth: Point,
    sum_err: Point,
    sum_sq: f64,
    count: usize,
}

impl ErrorStats {
    pub fn new(truth: Point) -> Self {
        Self {
            truth,
            sum_err: Point::zero(truth.dim()),
            sum_sq: 0.0,
            count: 0,
        }
    }

    pub fn push(&mut self, estimate: &Point) {
        let e = *estimate - self.truth;
        self.sum_err = self.sum_err + e;
        self.sum_sq += e.norm_sq();
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `None` when no estimate was recorded.
    pub fn bias(&self) -> Option<f64> {
        (self.count > 0).then(|| (self.sum_err * (1.0 / self.count as f64)).l1_norm())
    }

    pub fn rmse(&self) -> Option<f64> {
        (self.count > 0).then(|| math::sqrt(self.sum_sq / self.count as f64))
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (math::ln(x), math::ln(y));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Median of a slice (sorted copy). `NaN` for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = alloc::vec::Vec::from(values);
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}
