//! Points of the Riemann sphere and the chordal metric.
//!
//! Distances use the chordal convention
//! `d(z, w) = 2|z - w| / sqrt((1 + |z|^2)(1 + |w|^2))`, i.e. Euclidean
//! chord length on the unit sphere after stereographic projection. The
//! diameter of the sphere is 2 in this metric.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub const ZERO: SpherePoint = SpherePoint::Finite(Complex64 { re: 0.0, im: 0.0 });

    /// Builds a point, sending non-finite values to infinity.
    pub fn new(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn from_re_im(re: f64, im: f64) -> Self {
        Self::new(Complex64::new(re, im))
    }

    /// Point with homogeneous coordinates `(x : y)`.
    pub fn from_homogeneous(x: Complex64, y: Complex64) -> Self {
        if y == Complex64::new(0.0, 0.0) {
            return SpherePoint::Infinity;
        }
        Self::new(x / y)
    }

    /// Homogeneous coordinates scaled so that the larger component has modulus 1.
    pub fn homogeneous(&self) -> (Complex64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            SpherePoint::Infinity => (one, Complex64::new(0.0, 0.0)),
            SpherePoint::Finite(z) if z.norm() <= 1.0 => (z, one),
            SpherePoint::Finite(z) => (one, z.inv()),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// `1/z` with `1/0 = inf` and `1/inf = 0`.
    pub fn recip(&self) -> Self {
        match *self {
            SpherePoint::Infinity => SpherePoint::ZERO,
            SpherePoint::Finite(z) if z == Complex64::new(0.0, 0.0) => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::new(z.inv()),
        }
    }

    /// Image on the unit sphere in R^3 under inverse stereographic projection.
    pub fn to_unit_vector(&self) -> [f64; 3] {
        match *self {
            SpherePoint::Infinity => [0.0, 0.0, 1.0],
            SpherePoint::Finite(z) => {
                let r2 = z.norm_sqr();
                if !r2.is_finite() || r2 > 1e300 {
                    return [0.0, 0.0, 1.0];
                }
                let d = 1.0 + r2;
                [2.0 * z.re / d, 2.0 * z.im / d, (r2 - 1.0) / d]
            }
        }
    }

    /// Chordal distance, in `[0, 2]`.
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        let d = match (*self, *other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(z), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 2.0 / 1.0f64.hypot(z.norm()),
            (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
                let (nz, nw) = (z.norm(), w.norm());
                if nz > 1.0 && nw > 1.0 {
                    // compare 1/z and 1/w to avoid overflow near infinity
                    let (a, b) = (z.inv(), w.inv());
                    2.0 * (a - b).norm() / (1.0f64.hypot(a.norm()) * 1.0f64.hypot(b.norm()))
                } else {
                    2.0 * (z - w).norm() / (1.0f64.hypot(nz) * 1.0f64.hypot(nw))
                }
            }
        };
        d.clamp(0.0, 2.0)
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::new(z)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Infinity => write!(f, "inf"),
            SpherePoint::Finite(z) => write!(f, "{} {}", z.re, z.im),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chordal_known_values() {
        let zero = SpherePoint::ZERO;
        let one = SpherePoint::from_re_im(1.0, 0.0);
        assert!((zero.chordal_distance(&SpherePoint::Infinity) - 2.0).abs() < 1e-15);
        assert!((zero.chordal_distance(&one) - 2.0f64.sqrt()).abs() < 1e-15);
        let m1 = SpherePoint::from_re_im(-1.0, 0.0);
        assert!((one.chordal_distance(&m1) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn chordal_matches_unit_vectors() {
        let pts = [
            SpherePoint::from_re_im(0.3, -2.0),
            SpherePoint::from_re_im(5e7, 1.0),
            SpherePoint::Infinity,
            SpherePoint::from_re_im(-0.01, 0.02),
        ];
        for a in &pts {
            for b in &pts {
                let (u, v) = (a.to_unit_vector(), b.to_unit_vector());
                let e = ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt();
                assert!((a.chordal_distance(b) - e).abs() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn nan_becomes_infinity() {
        assert!(SpherePoint::new(Complex64::new(f64::NAN, 0.0)).is_infinite());
        assert!(SpherePoint::from_homogeneous(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).is_infinite());
    }
}
