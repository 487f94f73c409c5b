use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::{Error, Result};

/// A point `[h0 : h1]` of the Riemann sphere; the affine coordinate is
/// `h0 / h1`. The pair is kept at unit Euclidean norm, and infinity is the
/// ordinary point `[1 : 0]`.
#[derive(Debug, Clone, Copy)]
pub struct SpherePoint {
    h0: Complex64,
    h1: Complex64,
}

impl SpherePoint {
    pub const INFINITY: SpherePoint = SpherePoint { h0: Complex64::new(1.0, 0.0), h1: Complex64::new(0.0, 0.0) };
    pub const ZERO: SpherePoint = SpherePoint { h0: Complex64::new(0.0, 0.0), h1: Complex64::new(1.0, 0.0) };

    /// Normalizes `(h0, h1)`; rejects the zero pair and non-finite input.
    pub fn new(h0: Complex64, h1: Complex64) -> Result<Self> {
        let norm = h0.norm().hypot(h1.norm());
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("homogeneous pair must be finite and nonzero"));
        }
        Ok(SpherePoint { h0: h0 / norm, h1: h1 / norm })
    }

    pub fn from_complex(z: Complex64) -> Self {
        if !z.is_finite() {
            return Self::INFINITY;
        }
        let n = 1.0.hypot(z.norm());
        SpherePoint { h0: z / n, h1: Complex64::new(1.0 / n, 0.0) }
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_complex(Complex64::new(x, 0.0))
    }

    pub fn h0(&self) -> Complex64 {
        self.h0
    }

    pub fn h1(&self) -> Complex64 {
        self.h1
    }

    /// Affine coordinate, `None` at infinity.
    pub fn to_complex(&self) -> Option<Complex64> {
        if self.h1.is_zero() {
            None
        } else {
            Some(self.h0 / self.h1)
        }
    }

    /// Coordinate in the chart where it has modulus at most one:
    /// `(false, h0/h1)` near zero, `(true, h1/h0)` near infinity.
    pub fn chart(&self) -> (bool, Complex64) {
        if self.h0.norm() <= self.h1.norm() {
            (false, self.h0 / self.h1)
        } else {
            (true, self.h1 / self.h0)
        }
    }

    /// Projective equality: `|h0·g1 − h1·g0| < tol`.
    pub fn approx_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        (self.h0 * other.h1 - self.h1 * other.h0).norm() < tol
    }

    /// Chordal distance `2|z − w| / √((1+|z|²)(1+|w|²))`, with values in `[0, 2]`.
    pub fn distance(&self, other: &SpherePoint) -> f64 {
        (2.0 * (self.h0 * other.h1 - self.h1 * other.h0).norm()).min(2.0)
    }

    /// Image on the unit sphere of ℝ³ under inverse stereographic projection
    /// (infinity is the north pole).
    pub fn to_unit_vector(&self) -> [f64; 3] {
        let a = self.h0.norm_sqr();
        let b = self.h1.norm_sqr();
        let s = a + b;
        let c = self.h0 * self.h1.conj();
        [2.0 * c.re / s, 2.0 * c.im / s, (a - b) / s]
    }

    /// Stereographic projection of a unit vector.
    pub fn from_unit_vector(v: [f64; 3]) -> Result<Self> {
        let [x, y, z] = v;
        // [x + iy : 1 − z] and [1 + z : x − iy] name the same point; use the
        // better-conditioned one.
        if z <= 0.0 {
            SpherePoint::new(Complex64::new(x, y), Complex64::new(1.0 - z, 0.0))
        } else {
            SpherePoint::new(Complex64::new(1.0 + z, 0.0), Complex64::new(x, -y))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_pair_is_rejected() {
        assert!(SpherePoint::new(c(0.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(SpherePoint::new(c(f64::NAN, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn normalized_after_construction() {
        let p = SpherePoint::new(c(3.0, 4.0), c(1e-3, -2.0)).unwrap();
        let n = p.h0().norm_sqr() + p.h1().norm_sqr();
        assert!((n - 1.0).abs() < 1e-12);
        let q = SpherePoint::from_complex(c(1e200, 1e200));
        assert!(((q.h0().norm_sqr() + q.h1().norm_sqr()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let zero = SpherePoint::ZERO;
        let inf = SpherePoint::INFINITY;
        assert!((zero.distance(&inf) - 2.0).abs() < 1e-15);
        assert_eq!(zero.distance(&zero), 0.0);
        let one = SpherePoint::from_real(1.0);
        let minus_one = SpherePoint::from_real(-1.0);
        assert!((one.distance(&minus_one) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn distance_matches_stereographic_oracle() {
        // The chordal metric is the Euclidean distance of the stereographic lifts.
        let pts = [c(0.3, -0.7), c(5.0, 2.0), c(-0.01, 0.0), c(1e4, -3e3)];
        for a in pts {
            for b in pts {
                let pa = SpherePoint::from_complex(a);
                let pb = SpherePoint::from_complex(b);
                let va = pa.to_unit_vector();
                let vb = pb.to_unit_vector();
                let e = ((va[0] - vb[0]).powi(2) + (va[1] - vb[1]).powi(2) + (va[2] - vb[2]).powi(2)).sqrt();
                assert!((pa.distance(&pb) - e).abs() < 1e-12);
                let back = SpherePoint::from_unit_vector(va).unwrap();
                assert!(back.approx_eq(&pa, 1e-12));
            }
        }
    }

    #[test]
    fn projective_equality_ignores_scaling() {
        let p = SpherePoint::new(c(1.0, 2.0), c(3.0, 0.0)).unwrap();
        let r = SpherePoint::new(c(1.0, 2.0) * c(0.0, 1.0), c(3.0, 0.0) * c(0.0, 1.0)).unwrap();
        assert!(p.approx_eq(&r, 1e-14));
        assert!(!p.approx_eq(&SpherePoint::INFINITY, 1e-3));
    }
}
