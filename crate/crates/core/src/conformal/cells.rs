#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::models::Interval;
use crate::sphere::SpherePoint;
use crate::{quadrature, Error, Result};

/// A two-chart grid on the sphere: the closed unit disk in `z` and in
/// `w = 1/z`, each covered by `n × n` boxes of the square `[−1, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereGrid {
    pub resolution: usize,
}

impl SphereGrid {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidArgument("grid resolution must be positive"));
        }
        Ok(SphereGrid { resolution })
    }

    pub fn cell_count(&self) -> usize {
        2 * self.resolution * self.resolution
    }

    pub fn locate(&self, p: &SpherePoint) -> usize {
        let (at_inf, z) = p.chart();
        let n = self.resolution;
        let idx = |x: f64| (((x + 1.0) * 0.5 * n as f64).floor() as isize).clamp(0, n as isize - 1) as usize;
        (at_inf as usize) * n * n + idx(z.im) * n + idx(z.re)
    }

    /// Center of a cell, as a point of the sphere.
    pub fn center(&self, cell: usize) -> SpherePoint {
        let n = self.resolution;
        let chart = cell / (n * n);
        let row = (cell % (n * n)) / n;
        let col = cell % n;
        let h = 2.0 / n as f64;
        let z = Complex64::new(-1.0 + (col as f64 + 0.5) * h, -1.0 + (row as f64 + 0.5) * h);
        if chart == 0 {
            SpherePoint::from_complex(z)
        } else {
            SpherePoint::new(Complex64::new(1.0, 0.0), z).unwrap_or(SpherePoint::INFINITY)
        }
    }
}

/// The cells a measure lives on.
#[derive(Debug, Clone, PartialEq)]
pub enum CellPartition {
    /// `resolution` equal intervals `[i/n, (i+1)/n)` of the symbolic
    /// coordinate, on the circle or on the interval.
    Symbolic { resolution: usize, circle: bool },
    /// The active boxes (global indices, ascending) of a sphere grid.
    Sphere { grid: SphereGrid, active: Vec<usize> },
}

impl CellPartition {
    pub fn len(&self) -> usize {
        match self {
            CellPartition::Symbolic { resolution, .. } => *resolution,
            CellPartition::Sphere { active, .. } => active.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn resolution(&self) -> usize {
        match self {
            CellPartition::Symbolic { resolution, .. } => *resolution,
            CellPartition::Sphere { grid, .. } => grid.resolution,
        }
    }

    pub fn region(&self) -> &'static str {
        match self {
            CellPartition::Symbolic { circle: true, .. } => "circle",
            CellPartition::Symbolic { circle: false, .. } => "segment",
            CellPartition::Sphere { .. } => "sphere",
        }
    }

    /// Cell `i` of a symbolic partition as an exact interval.
    pub fn symbolic_cell(&self, i: usize) -> Option<Interval> {
        match self {
            CellPartition::Symbolic { resolution, .. } => {
                let n = *resolution as i128;
                Some(Interval::from_ratios((i as i128, n), (i as i128 + 1, n)))
            }
            CellPartition::Sphere { .. } => None,
        }
    }
}

/// A probability vector on the cells of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMeasure {
    pub partition: CellPartition,
    pub weights: Vec<f64>,
}

impl CellMeasure {
    /// Normalizes nonnegative weights to total mass one.
    pub fn new(partition: CellPartition, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != partition.len() {
            return Err(Error::InvalidArgument("one weight per cell"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("weights must not all vanish"));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(CellMeasure { partition, weights })
    }

    pub fn uniform(partition: CellPartition) -> Self {
        let n = partition.len();
        CellMeasure { partition, weights: alloc::vec![1.0 / n as f64; n] }
    }

    /// Total variation distance `½ Σ |wᵢ − vᵢ|`.
    pub fn total_variation(&self, other: &CellMeasure) -> f64 {
        0.5 * self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// For symbolic partitions, `∫_a^b g dm` with `m` uniform inside each cell.
    pub(crate) fn integrate_symbolic<G: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut g: G) -> f64 {
        let n = self.partition.len();
        let h = 1.0 / n as f64;
        let first = ((a * n as f64).floor() as usize).min(n - 1);
        let mut total = 0.0;
        for i in first..n {
            let lo = (i as f64 * h).max(a);
            let hi = ((i + 1) as f64 * h).min(b);
            if lo >= b {
                break;
            }
            if hi <= lo || self.weights[i] == 0.0 {
                continue;
            }
            total += self.weights[i] / h * quadrature::integrate(lo, hi, &mut g);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_locates_both_charts() {
        let g = SphereGrid::new(8).unwrap();
        for z in [Complex64::new(0.1, -0.3), Complex64::new(5.0, 2.0), Complex64::new(-0.99, 0.99)] {
            let p = SpherePoint::from_complex(z);
            let c = g.locate(&p);
            assert!(c < g.cell_count());
            assert!(g.center(c).distance(&p) < 0.6);
        }
        assert_eq!(g.locate(&SpherePoint::INFINITY), g.locate(&g.center(g.locate(&SpherePoint::INFINITY))));
    }

    #[test]
    fn measures_normalize() {
        let part = CellPartition::Symbolic { resolution: 4, circle: true };
        let m = CellMeasure::new(part.clone(), alloc::vec![1.0, 1.0, 2.0, 0.0]).unwrap();
        assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(CellMeasure::new(part.clone(), alloc::vec![1.0, -1.0, 2.0, 0.0]).is_err());
        let u = CellMeasure::uniform(part);
        assert!((u.integrate_symbolic(0.1, 0.6, |_| 1.0) - 0.5).abs() < 1e-14);
        assert!((m.integrate_symbolic(0.5, 1.0, |_| 1.0) - 0.5).abs() < 1e-14);
    }
}
