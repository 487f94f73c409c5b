//! What the algorithms need from a map, and the concrete models behind it.
//!
//! [`Dynamics`] is the forward/backward interface used by orbits, transfer
//! matrices, dimension scans and the cocycle. [`SymbolicModel`] adds an exact
//! piecewise-affine coding (angle multiplication or the tent map) together
//! with its realization in phase space; induced maps and partitions are built
//! on it.

mod circle;
mod interval;
mod quasicircle;
mod symbolic;

use alloc::vec::Vec;

pub use circle::CircleModel;
pub use interval::IntervalModel;
pub use quasicircle::QuasicircleModel;
pub use symbolic::{Angle, Interval, SymbolicMap};
pub(crate) use symbolic::{angle_to_f64, coordinate_distance, merge as merge_intervals};

use num_complex::Complex64;

use crate::sphere::{RationalMap, SpherePoint};
use crate::Result;

/// A map together with the metric its derivative is measured in.
pub trait Dynamics: Sync {
    type Point: Copy + core::fmt::Debug + Send + Sync;

    fn degree(&self) -> usize;

    fn image(&self, x: &Self::Point) -> Result<Self::Point>;

    /// `log |Df(x)|` in the model's metric (`−∞` at critical points).
    fn log_deriv(&self, x: &Self::Point) -> f64;

    /// All `d` preimages with multiplicity.
    fn preimages(&self, y: &Self::Point) -> Result<Vec<(Self::Point, usize)>>;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;

    /// Distance to the nearest critical point.
    fn critical_distance(&self, x: &Self::Point) -> f64;

    /// Where the point sits on the Riemann sphere.
    fn to_sphere(&self, x: &Self::Point) -> SpherePoint;

    /// A point at distance about `|delta|` from `x`, displaced in the
    /// direction of `delta` in local coordinates (one-dimensional models use
    /// the real part only).
    fn nudge(&self, x: &Self::Point, delta: Complex64) -> Self::Point;
}

impl Dynamics for RationalMap {
    type Point = SpherePoint;

    fn degree(&self) -> usize {
        RationalMap::degree(self)
    }

    fn image(&self, x: &SpherePoint) -> Result<SpherePoint> {
        self.eval(x)
    }

    fn log_deriv(&self, x: &SpherePoint) -> f64 {
        self.log_spherical_derivative(x)
    }

    fn preimages(&self, y: &SpherePoint) -> Result<Vec<(SpherePoint, usize)>> {
        RationalMap::preimages(self, y)
    }

    fn distance(&self, a: &SpherePoint, b: &SpherePoint) -> f64 {
        a.distance(b)
    }

    fn critical_distance(&self, x: &SpherePoint) -> f64 {
        RationalMap::critical_distance(self, x)
    }

    fn to_sphere(&self, x: &SpherePoint) -> SpherePoint {
        *x
    }

    fn nudge(&self, x: &SpherePoint, delta: Complex64) -> SpherePoint {
        // Chordal length element is 2|dz|/(1 + |z|²) in either chart.
        let (at_inf, z) = x.chart();
        let w = z + delta * (0.5 * (1.0 + z.norm_sqr()));
        if at_inf {
            SpherePoint::new(Complex64::new(1.0, 0.0), w).unwrap_or(*x)
        } else {
            SpherePoint::from_complex(w)
        }
    }
}

/// An exact symbolic coding of the dynamics on its Julia set.
///
/// Symbolic coordinates `θ ∈ [0, 1]` evolve under [`SymbolicMap`];
/// [`realize`](SymbolicModel::realize) carries them to phase space and
/// conjugates the symbolic map to the model's dynamics. The reference
/// measure is a conformal probability measure described through its
/// distribution function in `θ`.
pub trait SymbolicModel: Sync {
    type Dyn: Dynamics;

    fn dynamics(&self) -> &Self::Dyn;

    fn symbolic(&self) -> SymbolicMap;

    fn realize(&self, theta: f64) -> <Self::Dyn as Dynamics>::Point;

    /// Reference measure of `[0, θ]`.
    fn reference_cdf(&self, theta: f64) -> f64;

    /// Inverse of [`reference_cdf`](SymbolicModel::reference_cdf).
    fn reference_quantile(&self, s: f64) -> f64;

    /// `(t, φ)` for which the reference measure is conformal.
    fn reference_pair(&self) -> (f64, f64);

    fn reference_mass(&self, iv: &Interval) -> f64 {
        (self.reference_cdf(iv.hi_f64()) - self.reference_cdf(iv.lo_f64())).abs()
    }

    /// Log-derivative of the physical map at the realization of `θ`.
    fn log_deriv_at(&self, theta: f64) -> f64 {
        self.dynamics().log_deriv(&self.realize(theta))
    }
}
