#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;

use num_rational::Ratio;
use num_traits::{One, Zero};

/// Exact symbolic coordinate.
pub type Angle = Ratio<i128>;

pub(crate) fn angle_to_f64(a: &Angle) -> f64 {
    *a.numer() as f64 / *a.denom() as f64
}

/// A half-open interval `[lo, hi)` of symbolic coordinates with exact
/// rational endpoints. Endpoints carry zero reference mass, so intervals are
/// compared by their interiors: two intervals meet only if they overlap in a
/// set of positive length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Angle,
    pub hi: Angle,
}

impl Interval {
    pub fn new(lo: Angle, hi: Angle) -> Self {
        if lo <= hi {
            Interval { lo, hi }
        } else {
            Interval { lo: hi, hi: lo }
        }
    }

    pub fn from_ratios(lo: (i128, i128), hi: (i128, i128)) -> Self {
        Self::new(Angle::new(lo.0, lo.1), Angle::new(hi.0, hi.1))
    }

    pub fn unit() -> Self {
        Interval { lo: Angle::zero(), hi: Angle::one() }
    }

    pub fn len(&self) -> Angle {
        self.hi - self.lo
    }

    pub fn lo_f64(&self) -> f64 {
        angle_to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        angle_to_f64(&self.hi)
    }

    pub fn len_f64(&self) -> f64 {
        angle_to_f64(&self.len())
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn meets(&self, other: &Interval) -> bool {
        self.lo.max(other.lo) < self.hi.min(other.hi)
    }

    pub fn nested_or_disjoint(&self, other: &Interval) -> bool {
        self.contains(other) || other.contains(self) || !self.meets(other)
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo_f64() <= x && x < self.hi_f64()
    }

    /// Distance from `x` to the nearer endpoint.
    pub fn boundary_distance(&self, x: f64) -> f64 {
        (x - self.lo_f64()).abs().min((x - self.hi_f64()).abs())
    }

    /// The point a fraction `s ∈ [0, 1]` of the way across, exactly.
    pub fn lerp(&self, s: Angle) -> Angle {
        self.lo + self.len() * s
    }
}

/// The piecewise-affine symbolic dynamics: `θ ↦ dθ mod 1` on the circle, or
/// the full tent map on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolicMap {
    Multiply(u32),
    Tent,
}

impl SymbolicMap {
    pub fn branches(&self) -> usize {
        match self {
            SymbolicMap::Multiply(d) => *d as usize,
            SymbolicMap::Tent => 2,
        }
    }

    /// Absolute slope of every affine piece.
    pub fn slope(&self) -> f64 {
        self.branches() as f64
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, SymbolicMap::Multiply(_))
    }

    pub fn forward(&self, theta: &Angle) -> Angle {
        match self {
            SymbolicMap::Multiply(d) => {
                let x = *theta * Angle::from_integer(*d as i128);
                x - x.floor()
            }
            SymbolicMap::Tent => {
                let two = Angle::from_integer(2);
                let one = Angle::one();
                if *theta * two <= one {
                    *theta * two
                } else {
                    two - *theta * two
                }
            }
        }
    }

    pub fn forward_f64(&self, theta: f64) -> f64 {
        match self {
            SymbolicMap::Multiply(d) => {
                let x = theta * *d as f64;
                x - x.floor()
            }
            SymbolicMap::Tent => {
                if theta <= 0.5 {
                    2.0 * theta
                } else {
                    2.0 - 2.0 * theta
                }
            }
        }
    }

    /// Inverse branch `k` (onto lap `k`).
    pub fn inverse(&self, k: usize, theta: &Angle) -> Angle {
        match self {
            SymbolicMap::Multiply(d) => (*theta + Angle::from_integer(k as i128)) / Angle::from_integer(*d as i128),
            SymbolicMap::Tent => {
                let half = *theta / Angle::from_integer(2);
                if k == 0 {
                    half
                } else {
                    Angle::one() - half
                }
            }
        }
    }

    pub fn inverse_f64(&self, k: usize, theta: f64) -> f64 {
        match self {
            SymbolicMap::Multiply(d) => (theta + k as f64) / *d as f64,
            SymbolicMap::Tent => {
                if k == 0 {
                    0.5 * theta
                } else {
                    1.0 - 0.5 * theta
                }
            }
        }
    }

    pub fn inverse_interval(&self, k: usize, iv: &Interval) -> Interval {
        Interval::new(self.inverse(k, &iv.lo), self.inverse(k, &iv.hi))
    }

    /// Maximal intervals on which the map is affine and injective.
    pub fn laps(&self) -> Vec<Interval> {
        let d = self.branches() as i128;
        (0..d).map(|k| Interval::from_ratios((k, d), (k + 1, d))).collect()
    }

    /// Index of the lap containing `θ` (the affine piece used to map it).
    pub fn lap_of(&self, theta: f64) -> usize {
        let d = self.branches();
        ((theta * d as f64).floor() as usize).min(d - 1)
    }

    /// Exact image of an interval: the union of the images of its pieces in
    /// each lap, merged where they overlap or touch.
    pub fn image(&self, iv: &Interval) -> Vec<Interval> {
        let mut pieces: Vec<Interval> = Vec::new();
        for (k, lap) in self.laps().iter().enumerate() {
            let lo = iv.lo.max(lap.lo);
            let hi = iv.hi.min(lap.hi);
            if lo >= hi {
                continue;
            }
            pieces.push(Interval::new(self.affine_piece(k, &lo), self.affine_piece(k, &hi)));
        }
        merge(pieces)
    }

    /// Lap `k`'s affine formula, extended to the lap's right endpoint.
    fn affine_piece(&self, k: usize, theta: &Angle) -> Angle {
        match self {
            SymbolicMap::Multiply(d) => *theta * Angle::from_integer(*d as i128) - Angle::from_integer(k as i128),
            SymbolicMap::Tent => {
                let two = Angle::from_integer(2);
                if k == 0 {
                    *theta * two
                } else {
                    two - *theta * two
                }
            }
        }
    }
}

/// Sorted union of intervals.
pub(crate) fn merge(mut pieces: Vec<Interval>) -> Vec<Interval> {
    pieces.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::new();
    for p in pieces {
        if let Some(last) = out.last_mut() {
            if p.lo <= last.hi {
                if p.hi > last.hi {
                    last.hi = p.hi;
                }
                continue;
            }
        }
        out.push(p);
    }
    out
}

/// Distance between two symbolic coordinates, on the circle or the interval.
pub(crate) fn coordinate_distance(a: f64, b: f64, circle: bool) -> f64 {
    let d = (a - b).abs();
    if circle {
        d.min(1.0 - d)
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn q(n: i128, d: i128) -> Angle {
        Angle::new(n, d)
    }

    #[test]
    fn inverse_branches_invert_forward() {
        for map in [SymbolicMap::Multiply(2), SymbolicMap::Multiply(3), SymbolicMap::Tent] {
            for k in 0..map.branches() {
                for x in [q(0, 1), q(1, 3), q(5, 7), q(1, 2)] {
                    let y = map.inverse(k, &x);
                    assert_eq!(map.lap_of(angle_to_f64(&y)), k);
                    assert_eq!(map.forward(&y), x);
                }
            }
        }
    }

    #[test]
    fn images_of_intervals() {
        let doubling = SymbolicMap::Multiply(2);
        assert_eq!(doubling.image(&Interval::from_ratios((0, 1), (1, 2))), vec![Interval::unit()]);
        assert_eq!(
            doubling.image(&Interval::from_ratios((1, 4), (3, 4))),
            vec![Interval::unit()]
        );
        assert_eq!(
            doubling.image(&Interval::from_ratios((3, 8), (5, 8))),
            vec![Interval::from_ratios((0, 1), (1, 4)), Interval::from_ratios((3, 4), (1, 1))]
        );
        let tent = SymbolicMap::Tent;
        assert_eq!(tent.image(&Interval::from_ratios((1, 4), (1, 2))), vec![Interval::from_ratios((1, 2), (1, 1))]);
        assert_eq!(tent.image(&Interval::from_ratios((3, 8), (3, 4))), vec![Interval::from_ratios((1, 2), (1, 1))]);
    }

    #[test]
    fn interval_relations() {
        let a = Interval::from_ratios((0, 1), (1, 2));
        let b = Interval::from_ratios((1, 4), (3, 8));
        let c = Interval::from_ratios((1, 2), (1, 1));
        assert!(a.contains(&b) && a.nested_or_disjoint(&b));
        assert!(!a.meets(&c) && a.nested_or_disjoint(&c));
        let e = Interval::from_ratios((3, 8), (5, 8));
        assert!(!a.nested_or_disjoint(&e));
    }
}
