//! Small dense linear algebra: Householder least squares for tall `n x k`
//! systems (k <= 5), Jacobi singular values, and closed-form inverses of
//! 2x2/3x3 symmetric matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Column-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ColMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from a row generator writing `cols` entries per row.
    pub fn from_rows<F>(rows: usize, cols: usize, mut row: F) -> Self
    where
        F: FnMut(usize, &mut [f64]),
    {
        let mut m = Self::zeros(rows, cols);
        let mut buf = [0.0; 8];
        assert!(cols <= buf.len());
        for i in 0..rows {
            row(i, &mut buf[..cols]);
            for (j, v) in buf[..cols].iter().enumerate() {
                m.data[j * rows + i] = *v;
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Appends `k` rows holding `scale * I`, turning a least-squares solve
    /// into a ridge-regularized one.
    pub fn with_ridge(&self, scale: f64) -> Self {
        let rows = self.rows + self.cols;
        let mut m = Self::zeros(rows, self.cols);
        for j in 0..self.cols {
            m.data[j * rows..j * rows + self.rows].copy_from_slice(self.col(j));
            m.data[j * rows + self.rows + j] = scale;
        }
        m
    }
}

/// Condition estimate exceeded the caller's limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankDeficient {
    pub condition: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares {
    pub x: Vec<f64>,
    /// Ratio of extreme singular values of the design matrix.
    pub condition: f64,
    pub residual_norm: f64,
}

/// In-place Householder triangularization. Returns the upper-triangular
/// factor `R` (k x k, column-major) and applies the same reflections to
/// every right-hand side in `rhs`.
fn householder(a: &mut ColMatrix, rhs: &mut [&mut [f64]]) -> ColMatrix {
    let (n, k) = (a.rows, a.cols);
    let mut r = ColMatrix::zeros(k, k);
    for j in 0..k.min(n) {
        let (_, tail) = a.data.split_at_mut(j * n);
        let (colj, rest) = tail.split_at_mut(n);
        let x = &mut colj[j..];
        let norm = math::sqrt(x.iter().map(|v| v * v).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        x[0] -= alpha;
        let vtv = x.iter().map(|v| v * v).sum::<f64>();
        let reflect = |y: &mut [f64]| {
            let s = 2.0 * x.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>() / vtv;
            for (yi, vi) in y.iter_mut().zip(x.iter()) {
                *yi -= s * vi;
            }
        };
        for c in 0..(k - j - 1) {
            reflect(&mut rest[c * n + j..(c + 1) * n]);
        }
        for b in rhs.iter_mut() {
            reflect(&mut b[j..]);
        }
        r.set(j, j, alpha);
        for c in (j + 1)..k {
            r.set(j, c, a.data[c * n + j]);
        }
    }
    r
}

/// Singular values of a small matrix by one-sided Jacobi rotations,
/// sorted in decreasing order.
pub fn jacobi_singular_values(m: &ColMatrix) -> Vec<f64> {
    let mut a = m.clone();
    let (n, k) = (a.rows, a.cols);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    let (ap, aq) = (a.get(i, p), a.get(i, q));
                    alpha += ap * ap;
                    beta += aq * aq;
                    gamma += ap * aq;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * math::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + math::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..n {
                    let (ap, aq) = (a.get(i, p), a.get(i, q));
                    a.set(i, p, c * ap - s * aq);
                    a.set(i, q, s * ap + c * aq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..k)
        .map(|j| math::sqrt(a.col(j).iter().map(|v| v * v).sum()))
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Singular values of a tall matrix (QR first, then Jacobi on `R`).
pub fn singular_values(a: &ColMatrix) -> Vec<f64> {
    let mut work = a.clone();
    let r = householder(&mut work, &mut []);
    jacobi_singular_values(&r)
}

pub fn condition_from_singular_values(sv: &[f64]) -> f64 {
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Solves `min ||a x - b||` by Householder QR. `a` and `b` are consumed as
/// workspace. Fails when the condition estimate of `a` exceeds
/// `max_condition`.
pub fn solve_least_squares(
    mut a: ColMatrix,
    mut b: Vec<f64>,
    max_condition: f64,
) -> Result<LeastSquares, RankDeficient> {
    assert_eq!(a.rows, b.len());
    let k = a.cols;
    if a.rows < k {
        return Err(RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let r = householder(&mut a, &mut [&mut b[..]]);
    let condition = condition_from_singular_values(&jacobi_singular_values(&r));
    if !(condition <= max_condition) {
        return Err(RankDeficient { condition });
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = b[i];
        for j in (i + 1)..k {
            s -= r.get(i, j) * x[j];
        }
        x[i] = s / r.get(i, i);
    }
    let residual_norm = math::sqrt(b[k..].iter().map(|v| v * v).sum());
    Ok(LeastSquares {
        x,
        condition,
        residual_norm,
    })
}

/// Symmetric 2x2 or 3x3 matrix, row-major, unused entries zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallMatrix {
    pub dim: usize,
    pub a: [[f64; 3]; 3],
}

impl SmallMatrix {
    pub const fn zeros(dim: usize) -> Self {
        Self {
            dim,
            a: [[0.0; 3]; 3],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.a[i][i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    /// Adds `s * v v^T`.
    pub fn add_outer(&mut self, v: &[f64], s: f64) {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.a[i][j] += s * v[i] * v[j];
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = *self;
        for row in m.a.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    pub fn determinant(&self) -> f64 {
        let a = &self.a;
        match self.dim {
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            3 => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
            _ => unreachable!("dimension is 2 or 3"),
        }
    }

    /// Closed-form inverse via the adjugate. `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let a = &self.a;
        let mut inv = Self::zeros(self.dim);
        match self.dim {
            2 => {
                inv.a[0][0] = a[1][1] / det;
                inv.a[0][1] = -a[0][1] / det;
                inv.a[1][0] = -a[1][0] / det;
                inv.a[1][1] = a[0][0] / det;
            }
            3 => {
                for i in 0..3 {
                    for j in 0..3 {
                        // cofactor of (j, i)
                        let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                        let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                        inv.a[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / det;
                    }
                }
            }
            _ => unreachable!("dimension is 2 or 3"),
        }
        Some(inv)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] = (0..self.dim).map(|k| self.a[i][k] * other.a[k][j]).sum();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] = self.a[j][i];
            }
        }
        m
    }

    /// Eigenvalues of a symmetric matrix, increasing.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        // For symmetric matrices the singular values of A + cI shifted back
        // give the eigenvalues when A + cI is positive definite.
        let shift = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.a[i][j].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut m = ColMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(i, j, self.a[i][j] + if i == j { shift } else { 0.0 });
            }
        }
        let mut ev: Vec<f64> = jacobi_singular_values(&m)
            .into_iter()
            .map(|s| s - shift)
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.a[i][..self.dim].to_vec())
            .collect()
    }
}
