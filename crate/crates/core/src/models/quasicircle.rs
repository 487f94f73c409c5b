#[allow(unused_imports)]
use num_traits::Float as _;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::{symbolic::coordinate_distance, SymbolicMap, SymbolicModel};
use crate::sphere::{RationalMap, SpherePoint};
use crate::{Error, Result};

/// `z^d + c` for small `|c|`, whose Julia set is a quasicircle conjugate to
/// the unit circle under `z^d`.
///
/// The conjugacy `h(θ)` is computed by backward tracking: start at
/// `e^{2πi d^K θ}` and apply `K` inverse branches, each time taking the
/// preimage whose argument is closest to the angle it should carry. Inverse
/// branches contract, so the starting error is forgotten. The reference
/// measure is the measure of maximal entropy, which `h` carries from
/// Lebesgue measure in `θ`.
#[derive(Debug, Clone)]
pub struct QuasicircleModel {
    map: RationalMap,
    c: Complex64,
    degree: u32,
    depth: u32,
}

impl QuasicircleModel {
    /// Largest `|c|` accepted.
    pub const MAX_PARAMETER: f64 = 0.25;

    pub fn new(degree: u32, c: Complex64) -> Result<Self> {
        if degree < 2 {
            return Err(Error::DegreeTooLow(degree as usize));
        }
        if !(c.norm() <= Self::MAX_PARAMETER) {
            return Err(Error::InvalidArgument("|c| too large for the quasicircle model"));
        }
        let mut coeffs = alloc::vec![Complex64::new(0.0, 0.0); degree as usize + 1];
        coeffs[0] = c;
        coeffs[degree as usize] = Complex64::new(1.0, 0.0);
        let map = RationalMap::polynomial(coeffs)?;
        // Keep about six bits of d^K·θ after the f64 mantissa is shifted out.
        let depth = (46.0 / (degree as f64).log2()).floor() as u32;
        let model = QuasicircleModel { map, c, degree, depth };
        for k in 0..16 {
            let theta = (k as f64 + 0.37) / 16.0;
            let lhs = model.map.eval(&model.realize(theta))?;
            let rhs = model.realize(model.symbolic().forward_f64(theta));
            if !(lhs.distance(&rhs) < 1e-9) {
                return Err(Error::InvalidArgument("backward tracking does not conjugate"));
            }
        }
        Ok(model)
    }

    pub fn map(&self) -> &RationalMap {
        &self.map
    }

    pub fn parameter(&self) -> Complex64 {
        self.c
    }

    /// `h(θ)` as a complex number.
    pub fn point(&self, theta: f64) -> Complex64 {
        let d = self.degree as f64;
        let symbolic = self.symbolic();
        let mut angles = alloc::vec![0.0; self.depth as usize + 1];
        let mut a = theta - theta.floor();
        for slot in angles.iter_mut() {
            *slot = a;
            a = symbolic.forward_f64(a);
        }
        let mut w = Complex64::from_polar(1.0, 2.0 * PI * angles[self.depth as usize]);
        for k in (0..self.depth as usize).rev() {
            let root = (w - self.c).powf(1.0 / d);
            let mut best = root;
            let mut best_gap = f64::INFINITY;
            for j in 0..self.degree {
                let cand = root * Complex64::from_polar(1.0, 2.0 * PI * j as f64 / d);
                let arg = cand.arg() / (2.0 * PI);
                let gap = coordinate_distance(arg - arg.floor(), angles[k], true);
                if gap < best_gap {
                    best_gap = gap;
                    best = cand;
                }
            }
            w = best;
        }
        w
    }
}

impl SymbolicModel for QuasicircleModel {
    type Dyn = RationalMap;

    fn dynamics(&self) -> &RationalMap {
        &self.map
    }

    fn symbolic(&self) -> SymbolicMap {
        SymbolicMap::Multiply(self.degree)
    }

    fn realize(&self, theta: f64) -> SpherePoint {
        SpherePoint::from_complex(self.point(theta))
    }

    fn reference_cdf(&self, theta: f64) -> f64 {
        theta
    }

    fn reference_quantile(&self, s: f64) -> f64 {
        s
    }

    /// Maximal entropy: constant Jacobian `d`, i.e. `(t, φ) = (0, log d)`.
    fn reference_pair(&self) -> (f64, f64) {
        (0.0, (self.degree as f64).ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameter_is_the_circle() {
        let m = QuasicircleModel::new(2, Complex64::new(0.0, 0.0)).unwrap();
        for k in 0..10 {
            let theta = k as f64 / 10.0 + 0.013;
            let z = m.point(theta);
            assert!((z - Complex64::from_polar(1.0, 2.0 * PI * theta)).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugacy_and_invariance() {
        let m = QuasicircleModel::new(2, Complex64::new(0.1, 0.0)).unwrap();
        let f = m.dynamics();
        for k in 0..50 {
            let theta = k as f64 / 50.0 + 0.005;
            let x = m.realize(theta);
            let fx = f.eval(&x).unwrap();
            assert!(fx.distance(&m.realize(2.0 * theta)) < 1e-10);
            // Points of J have bounded orbits: the curve stays near the circle.
            let r = m.point(theta).norm();
            assert!((r - 1.0).abs() < 0.15);
        }
        assert!(QuasicircleModel::new(2, Complex64::new(0.5, 0.0)).is_err());
    }
}
