#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use super::{Dynamics, SymbolicMap, SymbolicModel};
use crate::sphere::SpherePoint;
use crate::{Error, Result};

/// `z ↦ z^d` restricted to its Julia set, the unit circle, in the angle
/// coordinate `θ ∈ [0, 1)` (the point is `e^{2πiθ}`).
///
/// The spherical derivative of `z^d` is exactly `d` on the circle, so
/// `log_deriv` is the constant `ln d`; distances are chordal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleModel {
    degree: u32,
}

impl CircleModel {
    pub fn new(degree: u32) -> Result<Self> {
        if degree < 2 {
            return Err(Error::DegreeTooLow(degree as usize));
        }
        Ok(CircleModel { degree })
    }

    pub fn wrap(theta: f64) -> f64 {
        let t = theta - theta.floor();
        if t >= 1.0 {
            0.0
        } else {
            t
        }
    }
}

impl Dynamics for CircleModel {
    type Point = f64;

    fn degree(&self) -> usize {
        self.degree as usize
    }

    fn image(&self, x: &f64) -> Result<f64> {
        Ok(Self::wrap(x * self.degree as f64))
    }

    fn log_deriv(&self, _x: &f64) -> f64 {
        (self.degree as f64).ln()
    }

    fn preimages(&self, y: &f64) -> Result<Vec<(f64, usize)>> {
        let d = self.degree as f64;
        Ok((0..self.degree).map(|k| ((Self::wrap(*y) + k as f64) / d, 1)).collect())
    }

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        2.0 * (PI * (a - b)).sin().abs()
    }

    /// The critical points 0 and ∞ are both at chordal distance √2 from the circle.
    fn critical_distance(&self, _x: &f64) -> f64 {
        SQRT_2
    }

    fn to_sphere(&self, x: &f64) -> SpherePoint {
        SpherePoint::from_complex(Complex64::from_polar(1.0, 2.0 * PI * x))
    }

    fn nudge(&self, x: &f64, delta: Complex64) -> f64 {
        Self::wrap(x + delta.re / (2.0 * PI))
    }
}

impl SymbolicModel for CircleModel {
    type Dyn = CircleModel;

    fn dynamics(&self) -> &CircleModel {
        self
    }

    fn symbolic(&self) -> SymbolicMap {
        SymbolicMap::Multiply(self.degree)
    }

    fn realize(&self, theta: f64) -> f64 {
        Self::wrap(theta)
    }

    fn reference_cdf(&self, theta: f64) -> f64 {
        theta
    }

    fn reference_quantile(&self, s: f64) -> f64 {
        s
    }

    /// Normalized arc length: `m(f(A)) = d·m(A) = ∫_A |Df| dm`.
    fn reference_pair(&self) -> (f64, f64) {
        (1.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::RationalMap;

    #[test]
    fn agrees_with_the_rational_map() {
        let model = CircleModel::new(3).unwrap();
        let f = RationalMap::real_polynomial(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        for k in 0..17 {
            let theta = k as f64 / 17.0 + 0.01;
            let x = model.to_sphere(&theta);
            let img = f.eval(&x).unwrap();
            assert!(img.distance(&model.to_sphere(&model.image(&theta).unwrap())) < 1e-13);
            assert!((f.log_spherical_derivative(&x) - model.log_deriv(&theta)).abs() < 1e-13);
            assert!((f.critical_distance(&x) - model.critical_distance(&theta)).abs() < 1e-12);
            let other = 0.3;
            let chord = x.distance(&model.to_sphere(&other));
            assert!((chord - model.distance(&theta, &other)).abs() < 1e-13);
        }
    }

    #[test]
    fn preimages_map_back() {
        let model = CircleModel::new(2).unwrap();
        let pre = model.preimages(&0.3).unwrap();
        assert_eq!(pre, alloc::vec![(0.15, 1), (0.65, 1)]);
        for (p, _) in pre {
            assert!((model.image(&p).unwrap() - 0.3).abs() < 1e-15);
        }
        assert!(CircleModel::new(1).is_err());
    }
}
