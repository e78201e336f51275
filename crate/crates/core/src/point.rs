//! Fixed-capacity coordinates for 2-D and 3-D positions.

use core::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{invalid, Error, Result};
use crate::math;

/// A position in 2-D or 3-D space, in meters.
///
/// Unused trailing coordinates are kept at zero so that arithmetic between
/// points of the same dimension never has to branch on the dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; 3],
    dim: usize,
}

impl Point {
    pub const fn new2(x: f64, y: f64) -> Self {
        Self {
            coords: [x, y, 0.0],
            dim: 2,
        }
    }

    pub const fn new3(x: f64, y: f64, z: f64) -> Self {
        Self {
            coords: [x, y, z],
            dim: 3,
        }
    }

    pub const fn zero(dim: usize) -> Self {
        Self {
            coords: [0.0; 3],
            dim,
        }
    }

    /// Builds a point from 2 or 3 finite coordinates.
    pub fn from_slice(c: &[f64]) -> Result<Self> {
        let p = match *c {
            [x, y] => Self::new2(x, y),
            [x, y, z] => Self::new3(x, y, z),
            _ => return Err(invalid("points must have 2 or 3 coordinates")),
        };
        if !p.is_finite() {
            return Err(invalid("non-finite coordinate"));
        }
        Ok(p)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        self.coords[0] * other.coords[0]
            + self.coords[1] * other.coords[1]
            + self.coords[2] * other.coords[2]
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sq())
    }

    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    /// Sum of absolute coordinates.
    pub fn l1_norm(&self) -> f64 {
        self.as_slice().iter().map(|v| v.abs()).sum()
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim,
            });
        }
        Ok(())
    }

    pub(crate) fn set(&mut self, i: usize, v: f64) {
        debug_assert!(i < self.dim);
        self.coords[i] = v;
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl Add for Point {
    type Output = Point;

    fn add(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        Point {
            coords: [
                self.coords[0] + rhs.coords[0],
                self.coords[1] + rhs.coords[1],
                self.coords[2] + rhs.coords[2],
            ],
            dim: self.dim,
        }
    }
}

impl Sub for Point {
    type Output = Point;

    fn sub(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        Point {
            coords: [
                self.coords[0] - rhs.coords[0],
                self.coords[1] - rhs.coords[1],
                self.coords[2] - rhs.coords[2],
            ],
            dim: self.dim,
        }
    }
}

impl Mul<f64> for Point {
    type Output = Point;

    fn mul(self, s: f64) -> Point {
        Point {
            coords: [self.coords[0] * s, self.coords[1] * s, self.coords[2] * s],
            dim: self.dim,
        }
    }
}

impl Neg for Point {
    type Output = Point;

    fn neg(self) -> Point {
        self * -1.0
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let v = alloc::vec::Vec::<f64>::deserialize(d)?;
        Point::from_slice(&v).map_err(serde::de::Error::custom)
    }
}
