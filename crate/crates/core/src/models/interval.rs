#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;

use super::{Dynamics, SymbolicMap, SymbolicModel};
use crate::sphere::{RationalMap, SpherePoint};
use crate::{Error, Result};

/// A real quadratic `f(x) = ax² + bx + c` affinely conjugate to `z² − 2`,
/// restricted to its Julia set, a real segment.
///
/// With `x = offset + scale·u` the map becomes `u ↦ 4u(1 − u)` on `[0, 1]`,
/// and `u = sin²(πθ/2)` turns that into the tent map on `θ`. Distances and
/// derivatives are Euclidean in `x`; spherical ones differ by the coboundary
/// `log(1 + x²) − log(1 + f(x)²)`, which leaves every orbit average unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalModel {
    a: f64,
    b: f64,
    c: f64,
    offset: f64,
    scale: f64,
}

impl IntervalModel {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if a == 0.0 || !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidArgument("not a real quadratic"));
        }
        // a·x + b/2 conjugates f to y² + (ac + b/2 − b²/4).
        let normal = a * c + 0.5 * b - 0.25 * b * b;
        if (normal + 2.0).abs() > 1e-12 * (1.0 + (a * c).abs() + b * b) {
            return Err(Error::InvalidArgument("quadratic is not conjugate to z^2 - 2"));
        }
        Ok(IntervalModel { a, b, c, offset: (2.0 - 0.5 * b) / a, scale: -4.0 / a })
    }

    /// The Chebyshev map `4x(1 − x)`.
    pub fn chebyshev() -> Self {
        Self::new(-4.0, 4.0, 0.0).expect("normal form of 4x(1-x) is -2")
    }

    /// Recognizes a real-coefficient quadratic polynomial of the right kind.
    pub fn from_map(f: &RationalMap) -> Result<Self> {
        let den = f.den();
        let num = f.num();
        if f.degree() != 2 || !den[1].is_zero() || !den[2].is_zero() {
            return Err(Error::InvalidArgument("not a quadratic polynomial"));
        }
        if num.iter().chain(den.iter()).any(|z| z.im != 0.0) {
            return Err(Error::InvalidArgument("coefficients are not real"));
        }
        let d0 = den[0].re;
        Self::new(num[2].re / d0, num[1].re / d0, num[0].re / d0)
    }

    pub fn to_map(&self) -> RationalMap {
        RationalMap::real_polynomial(&[self.c, self.b, self.a]).expect("quadratic with a != 0")
    }

    pub fn critical_point(&self) -> f64 {
        -0.5 * self.b / self.a
    }

    /// Endpoints of the Julia segment, in increasing order.
    pub fn segment(&self) -> (f64, f64) {
        let e = self.offset + self.scale;
        (self.offset.min(e), self.offset.max(e))
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        self.offset + self.scale * u
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.offset) / self.scale
    }

    /// Symbolic (tent) coordinate of a point of the segment.
    pub fn to_theta(&self, x: f64) -> f64 {
        let u = self.to_unit(x).clamp(0.0, 1.0);
        2.0 / PI * u.sqrt().asin()
    }

    /// Invariant density of the acip with respect to Lebesgue measure on the
    /// segment: the arcsine law.
    pub fn acip_density(&self, x: f64) -> f64 {
        let u = self.to_unit(x);
        1.0 / (PI * (u * (1.0 - u)).sqrt() * self.scale.abs())
    }

    /// Acip mass of `[x0, x1]`.
    pub fn acip_mass(&self, x0: f64, x1: f64) -> f64 {
        let cdf = |x: f64| {
            let u = self.to_unit(x).clamp(0.0, 1.0);
            2.0 / PI * u.sqrt().asin()
        };
        (cdf(x1) - cdf(x0)).abs()
    }
}

impl Dynamics for IntervalModel {
    type Point = f64;

    fn degree(&self) -> usize {
        2
    }

    fn image(&self, x: &f64) -> Result<f64> {
        Ok((self.a * x + self.b) * x + self.c)
    }

    fn log_deriv(&self, x: &f64) -> f64 {
        (2.0 * self.a * x + self.b).abs().ln()
    }

    fn preimages(&self, y: &f64) -> Result<Vec<(f64, usize)>> {
        let u = self.to_unit(*y);
        if !(-1e-12..=1.0 + 1e-12).contains(&u) {
            return Err(Error::InvalidArgument("point is off the Julia segment"));
        }
        let s = (1.0 - u).max(0.0).sqrt();
        if s == 0.0 {
            return Ok(alloc::vec![(self.critical_point(), 2)]);
        }
        Ok(alloc::vec![(self.from_unit(0.5 * (1.0 - s)), 1), (self.from_unit(0.5 * (1.0 + s)), 1)])
    }

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    fn critical_distance(&self, x: &f64) -> f64 {
        (x - self.critical_point()).abs()
    }

    fn to_sphere(&self, x: &f64) -> SpherePoint {
        SpherePoint::from_real(*x)
    }

    fn nudge(&self, x: &f64, delta: Complex64) -> f64 {
        let (lo, hi) = self.segment();
        (x + delta.re).clamp(lo, hi)
    }
}

impl SymbolicModel for IntervalModel {
    type Dyn = IntervalModel;

    fn dynamics(&self) -> &IntervalModel {
        self
    }

    fn symbolic(&self) -> SymbolicMap {
        SymbolicMap::Tent
    }

    fn realize(&self, theta: f64) -> f64 {
        let s = (0.5 * PI * theta).sin();
        self.from_unit(s * s)
    }

    /// Normalized Lebesgue measure on the segment, in the `θ` coordinate.
    fn reference_cdf(&self, theta: f64) -> f64 {
        let s = (0.5 * PI * theta).sin();
        s * s
    }

    fn reference_quantile(&self, s: f64) -> f64 {
        2.0 / PI * s.clamp(0.0, 1.0).sqrt().asin()
    }

    /// Lebesgue measure: `m(f(A)) = ∫_A |f′| dm`.
    fn reference_pair(&self) -> (f64, f64) {
        (1.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_normalization() {
        let m = IntervalModel::chebyshev();
        assert_eq!(m.segment(), (0.0, 1.0));
        assert_eq!(m.critical_point(), 0.5);
        let g = IntervalModel::new(1.0, 0.0, -2.0).unwrap();
        assert_eq!(g.segment(), (-2.0, 2.0));
        assert!(IntervalModel::new(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn hand_iteration() {
        // Exact rational iterates of 3/10.
        let m = IntervalModel::chebyshev();
        let mut x = 0.3;
        let expected = [0.84, 0.5376, 0.994_344_96, 0.022_492_242_090_393_6, 0.087_945_364_544_562_9];
        for e in expected {
            x = m.image(&x).unwrap();
            assert!((x - e).abs() < 1e-12, "{x} vs {e}");
        }
    }

    #[test]
    fn tent_conjugacy() {
        for m in [IntervalModel::chebyshev(), IntervalModel::new(1.0, 0.0, -2.0).unwrap()] {
            let tent = m.symbolic();
            for k in 1..40 {
                let theta = k as f64 / 41.0;
                let lhs = m.image(&m.realize(theta)).unwrap();
                let rhs = m.realize(tent.forward_f64(theta));
                assert!((lhs - rhs).abs() < 1e-12);
                assert!((m.to_theta(m.realize(theta)) - theta).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn preimages_and_recognition() {
        let f = RationalMap::real_polynomial(&[-2.0, 0.0, 1.0]).unwrap();
        let m = IntervalModel::from_map(&f).unwrap();
        let pre = m.preimages(&1.0).unwrap();
        for (p, k) in &pre {
            assert_eq!(*k, 1);
            assert!((p * p - 2.0 - 1.0).abs() < 1e-14);
        }
        assert_eq!(m.preimages(&-2.0).unwrap(), alloc::vec![(0.0, 2)]);
        assert!(m.preimages(&3.0).is_err());
        assert!(IntervalModel::from_map(&RationalMap::real_polynomial(&[0.1, 0.0, 1.0]).unwrap()).is_err());
        let acip_total = IntervalModel::chebyshev().acip_mass(0.0, 1.0);
        assert!((acip_total - 1.0).abs() < 1e-15);
    }
}
