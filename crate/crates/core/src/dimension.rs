//! Local dimension of measures: log-log slopes of ball masses, and the two
//! identities `HD(μ) = h/χ` and `HD(μ) = t + ∫φ dμ / χ`.

#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;

use crate::conformal::{CellMeasure, CellPartition};
use crate::models::{Dynamics, Interval, SymbolicModel};
use crate::potential::Potential;
use crate::sphere::RationalMap;
use crate::{rng, stats, Error, Result};

/// Fewest hits a sampled ball needs before its mass is trusted.
pub const MIN_HITS: usize = 100;
/// Ratio of the smallest trusted radius to the largest cell diameter.
pub const CELL_MARGIN: f64 = 4.0;
/// Fraction of centers dropped at each end before aggregating slopes.
pub const TRIM: f64 = 0.05;
const BOOTSTRAP_RESAMPLES: usize = 200;

/// Geometric radii `r₀·ρ^k`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusGrid {
    pub r0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl RadiusGrid {
    /// Ratio 0.8 with 12 radii.
    pub fn new(r0: f64) -> Self {
        RadiusGrid { r0, ratio: 0.8, count: 12 }
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.r0 * self.ratio.powi(k as i32)).collect()
    }

    pub fn smallest(&self) -> f64 {
        self.r0 * self.ratio.powi(self.count as i32 - 1)
    }
}

/// A measure as weighted atoms in phase space, with the smallest radius at
/// which ball masses still mean something.
pub struct WeightedCloud<'a, D: Dynamics> {
    pub f: &'a D,
    pub atoms: Vec<(D::Point, f64)>,
    /// Radii below this are outside the resolution window.
    pub floor: f64,
    /// For sampled clouds, the fewest hits a trusted ball needs.
    pub min_hits: Option<usize>,
}

impl<'a, D: Dynamics> WeightedCloud<'a, D> {
    /// Equal-weight samples; balls need [`MIN_HITS`] hits.
    pub fn from_samples(f: &'a D, points: Vec<D::Point>) -> Self {
        let w = 1.0 / points.len().max(1) as f64;
        WeightedCloud { f, atoms: points.into_iter().map(|p| (p, w)).collect(), floor: 0.0, min_hits: Some(MIN_HITS) }
    }

    pub fn mass(&self, center: &D::Point, r: f64) -> f64 {
        self.atoms.iter().filter(|(p, _)| self.f.distance(p, center) < r).map(|(_, w)| w).sum()
    }

    fn hits(&self, center: &D::Point, r: f64) -> usize {
        self.atoms.iter().filter(|(p, _)| self.f.distance(p, center) < r).count()
    }

    /// Log ball masses over decreasing radii, checked against the window.
    pub fn log_masses(&self, center: &D::Point, radii: &[f64]) -> Result<Vec<f64>> {
        let r_min = radii.iter().copied().fold(f64::INFINITY, f64::min);
        if r_min < self.floor {
            return Err(Error::ResolutionExceeded { radius: r_min, floor: self.floor });
        }
        if let Some(need) = self.min_hits {
            if self.hits(center, r_min) < need {
                return Err(Error::ResolutionExceeded { radius: r_min, floor: self.hit_radius(center, need) });
            }
        }
        Ok(radii.iter().map(|&r| self.mass(center, r).ln()).collect())
    }

    /// Distance to the `k`-th nearest atom.
    fn hit_radius(&self, center: &D::Point, k: usize) -> f64 {
        let mut d: Vec<f64> = self.atoms.iter().map(|(p, _)| self.f.distance(p, center)).collect();
        d.sort_by(f64::total_cmp);
        d.get(k.saturating_sub(1)).copied().unwrap_or(f64::INFINITY)
    }
}

impl<'a, D: Dynamics> WeightedCloud<'a, D> {
    /// A cell measure on a symbolic partition, each cell split into
    /// `subsamples` equal pieces realized at their midpoints.
    pub fn from_symbolic_cells<M: SymbolicModel<Dyn = D>>(model: &'a M, m: &CellMeasure, subsamples: usize) -> Result<Self> {
        if !matches!(m.partition, CellPartition::Symbolic { .. }) || subsamples == 0 {
            return Err(Error::InvalidArgument("needs a symbolic partition and at least one subsample"));
        }
        let f = model.dynamics();
        let n = m.weights.len();
        let h = 1.0 / n as f64;
        let mut atoms = Vec::with_capacity(n * subsamples);
        let mut diameter = 0.0f64;
        for (i, &w) in m.weights.iter().enumerate() {
            let lo = i as f64 * h;
            diameter = diameter.max(f.distance(&model.realize(lo), &model.realize(lo + h)));
            if w == 0.0 {
                continue;
            }
            for j in 0..subsamples {
                let theta = lo + (j as f64 + 0.5) * h / subsamples as f64;
                atoms.push((model.realize(theta), w / subsamples as f64));
            }
        }
        Ok(WeightedCloud { f, atoms, floor: CELL_MARGIN * diameter, min_hits: None })
    }
}

impl<'a> WeightedCloud<'a, RationalMap> {
    /// A cell measure on a sphere grid, each cell an atom at its center.
    pub fn from_sphere_cells(f: &'a RationalMap, m: &CellMeasure) -> Result<Self> {
        let CellPartition::Sphere { grid, active } = &m.partition else {
            return Err(Error::InvalidArgument("needs a sphere partition"));
        };
        // Chordal length is at most twice the chart length; boxes have diagonal 2√2/n.
        let diameter = 4.0 * core::f64::consts::SQRT_2 / grid.resolution as f64;
        let atoms = active.iter().zip(&m.weights).filter(|(_, w)| **w > 0.0).map(|(&c, &w)| (grid.center(c), w)).collect();
        Ok(WeightedCloud { f, atoms, floor: CELL_MARGIN * diameter, min_hits: None })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalDimensionScan<P> {
    pub centers: Vec<P>,
    pub radii: Vec<f64>,
    /// `log μ(B(x, r_k))`, one row per center.
    pub log_masses: Vec<Vec<f64>>,
    pub slopes: Vec<f64>,
    /// Bootstrap 95% half-widths of the slopes.
    pub slope_ci: Vec<f64>,
}

/// Slope of `log μ(B(x, r))` against `log r` at one center, with its
/// bootstrap half-width.
pub fn scan_center<D: Dynamics>(
    cloud: &WeightedCloud<'_, D>,
    center: &D::Point,
    radii: &[f64],
    seed: u64,
) -> Result<(Vec<f64>, f64, f64)> {
    if radii.len() < 8 || radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("need at least 8 strictly decreasing radii"));
    }
    let log_masses = cloud.log_masses(center, radii)?;
    let log_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let fit = stats::linear_fit(&log_r, &log_masses).ok_or(Error::InvalidArgument("degenerate radii"))?;
    let ci = stats::bootstrap_slope_halfwidth(&log_r, &log_masses, BOOTSTRAP_RESAMPLES, seed);
    Ok((log_masses, fit.slope, ci))
}

pub fn local_dimension<D: Dynamics>(
    cloud: &WeightedCloud<'_, D>,
    centers: &[D::Point],
    grid: &RadiusGrid,
    seed: u64,
) -> Result<LocalDimensionScan<D::Point>> {
    let radii = grid.radii();
    let mut scan = LocalDimensionScan {
        centers: centers.to_vec(),
        radii: radii.clone(),
        log_masses: Vec::with_capacity(centers.len()),
        slopes: Vec::with_capacity(centers.len()),
        slope_ci: Vec::with_capacity(centers.len()),
    };
    for (i, c) in centers.iter().enumerate() {
        let (lm, slope, ci) = scan_center(cloud, c, &radii, rng::derive_seed(seed, i as u64))?;
        scan.log_masses.push(lm);
        scan.slopes.push(slope);
        scan.slope_ci.push(ci);
    }
    Ok(scan)
}

/// A scan summarized against a target dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionReport {
    pub target: f64,
    /// Median of the trimmed slopes.
    pub median: f64,
    /// Standard deviation of the trimmed slopes.
    pub spread: f64,
    pub pass: bool,
}

impl DimensionReport {
    pub fn from_slopes(slopes: &[f64], target: f64, tol: f64) -> Self {
        let kept = stats::trimmed(slopes, TRIM);
        let median = stats::median(&kept);
        DimensionReport { target, median, spread: stats::std_dev(&kept), pass: (median - target).abs() <= tol }
    }
}

/// Compares the scan with `h / χ`.
pub fn dvl_check<P>(scan: &LocalDimensionScan<P>, entropy: f64, chi: f64, tol: f64) -> Result<DimensionReport> {
    if !(chi > 0.0) {
        return Err(Error::InvalidArgument("the Lyapunov exponent must be positive"));
    }
    Ok(DimensionReport::from_slopes(&scan.slopes, entropy / chi, tol))
}

/// `log m(U_j) + S_{n_j}ψ(x)` along the nested pullbacks `U_j ∋ x` of a base
/// interval, `ψ = φ + t log|Df|`. For a conformal pair these stay constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderBand {
    pub times: Vec<usize>,
    pub values: Vec<f64>,
    /// Least-squares slope of the values against the times.
    pub drift: f64,
    /// `max − min` of the values.
    pub spread: f64,
}

/// The band along the orbit of `θ`, for return times up to `max_depth`,
/// stopping once pullbacks are thinner than `min_cells` cells of `m`.
pub fn cylinder_band<M: SymbolicModel>(
    model: &M,
    m: &CellMeasure,
    t: f64,
    phi: &dyn Potential<<M::Dyn as Dynamics>::Point>,
    base: &Interval,
    theta: f64,
    max_depth: usize,
    min_cells: f64,
) -> Result<CylinderBand> {
    if !matches!(m.partition, CellPartition::Symbolic { .. }) {
        return Err(Error::InvalidArgument("needs a symbolic partition"));
    }
    let sym = model.symbolic();
    let cell = 1.0 / m.weights.len() as f64;
    let mut orbit = Vec::with_capacity(max_depth + 1);
    let mut x = theta;
    for _ in 0..=max_depth {
        orbit.push(x);
        x = sym.forward_f64(x);
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut birkhoff = 0.0;
    for n in 0..=max_depth {
        if n > 0 {
            let p = model.realize(orbit[n - 1]);
            birkhoff += phi.value(&p) + t * model.dynamics().log_deriv(&p);
        }
        if !base.contains_f64(orbit[n]) {
            continue;
        }
        let mut piece = base.clone();
        for i in (0..n).rev() {
            piece = sym.inverse_interval(sym.lap_of(orbit[i]), &piece);
        }
        if piece.len_f64() < min_cells * cell {
            break;
        }
        let mass = m.integrate_symbolic(piece.lo_f64(), piece.hi_f64(), |_| 1.0);
        times.push(n);
        values.push(mass.ln() + birkhoff);
    }
    if times.len() < 2 {
        return Err(Error::InvalidArgument("fewer than two returns to the base within the resolution"));
    }
    let xs: Vec<f64> = times.iter().map(|&n| n as f64).collect();
    let drift = stats::linear_fit(&xs, &values).map_or(0.0, |f| f.slope);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CylinderBand { times, values, drift, spread: hi - lo })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalDimensionReport {
    pub dimension: DimensionReport,
    /// Largest absolute band drift over the supplied bands.
    pub band_drift: f64,
    /// Largest band spread.
    pub band_spread: f64,
    /// Every band drifts by at most the tolerance per step.
    pub consistent: bool,
}

/// Compares a scan of the conformal measure at `μ`-typical centers with
/// `t + φ̄ / χ`, and checks that the bands stay flat.
pub fn conformal_dimension_check<P>(
    scan: &LocalDimensionScan<P>,
    t: f64,
    phi_mean: f64,
    chi: f64,
    tol: f64,
    bands: &[CylinderBand],
    band_tol: f64,
) -> Result<ConformalDimensionReport> {
    if !(chi > 0.0) {
        return Err(Error::InvalidArgument("the Lyapunov exponent must be positive"));
    }
    let dimension = DimensionReport::from_slopes(&scan.slopes, t + phi_mean / chi, tol);
    let band_drift = bands.iter().map(|b| b.drift.abs()).fold(0.0, f64::max);
    let band_spread = bands.iter().map(|b| b.spread).fold(0.0, f64::max);
    Ok(ConformalDimensionReport { dimension, band_drift, band_spread, consistent: band_drift <= band_tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CircleModel, IntervalModel};
    use crate::orbits::{Sampler, SymbolicSampler};
    use crate::potential::ConstPotential;
    use core::f64::consts::LN_2;

    fn circle_arc(res: usize) -> CellMeasure {
        CellMeasure::uniform(CellPartition::Symbolic { resolution: res, circle: true })
    }

    fn centers<M: SymbolicModel>(model: &M, n: usize, seed: u64) -> Vec<<M::Dyn as Dynamics>::Point> {
        let s = SymbolicSampler { model };
        let mut r = rng::rng(seed);
        (0..n).map(|_| s.sample(&mut r).unwrap()).collect()
    }

    #[test]
    fn arc_length_has_dimension_one() {
        let m = CircleModel::new(2).unwrap();
        let cloud = WeightedCloud::from_symbolic_cells(&m, &circle_arc(4096), 8).unwrap();
        let scan = local_dimension(&cloud, &centers(&m, 50, 3), &RadiusGrid::new(0.2), 1).unwrap();
        let rep = dvl_check(&scan, LN_2, LN_2, 0.03).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(scan.log_masses.iter().all(|row| row.windows(2).all(|w| w[1] <= w[0])));
        assert!(dvl_check(&scan, LN_2, 0.0, 0.03).is_err());
    }

    #[test]
    fn point_mass_has_dimension_zero() {
        let m = CircleModel::new(2).unwrap();
        let cloud = WeightedCloud::from_samples(&m, alloc::vec![0.3; 500]);
        let (_, slope, ci) = scan_center(&cloud, &0.3, &RadiusGrid::new(0.1).radii(), 1).unwrap();
        assert!(slope.abs() < 1e-12 && ci < 1e-12);
    }

    #[test]
    fn resolution_window_is_enforced() {
        let m = CircleModel::new(2).unwrap();
        let cloud = WeightedCloud::from_symbolic_cells(&m, &circle_arc(64), 4).unwrap();
        let err = scan_center(&cloud, &0.3, &RadiusGrid::new(0.05).radii(), 1).unwrap_err();
        assert!(matches!(err, Error::ResolutionExceeded { .. }));
        let sparse = WeightedCloud::from_samples(&m, (0..200).map(|i| i as f64 / 200.0).collect());
        assert!(matches!(scan_center(&sparse, &0.3, &RadiusGrid::new(0.1).radii(), 1), Err(Error::ResolutionExceeded { .. })));
    }

    #[test]
    fn chebyshev_acip_interior_and_endpoint() {
        let m = IntervalModel::chebyshev();
        let acip = CellMeasure::uniform(CellPartition::Symbolic { resolution: 8192, circle: false });
        let cloud = WeightedCloud::from_symbolic_cells(&m, &acip, 8).unwrap();
        let interior: Vec<f64> = centers(&m, 60, 5).into_iter().filter(|x| (0.1..0.9).contains(x)).collect();
        let scan = local_dimension(&cloud, &interior, &RadiusGrid::new(0.02), 2).unwrap();
        assert!(dvl_check(&scan, LN_2, LN_2, 0.05).unwrap().pass);
        let (_, slope, _) = scan_center(&cloud, &0.0, &RadiusGrid::new(0.05).radii(), 1).unwrap();
        assert!((slope - 0.5).abs() < 0.05, "{slope}");
    }

    #[test]
    fn bands_flag_the_wrong_pair() {
        let m = CircleModel::new(2).unwrap();
        let arc = circle_arc(1 << 14);
        let unit = Interval::unit();
        let band = |t: f64, phi: f64, theta: f64| cylinder_band(&m, &arc, t, &ConstPotential(phi), &unit, theta, 30, 4.0).unwrap();
        let cloud = WeightedCloud::from_symbolic_cells(&m, &arc, 2).unwrap();
        let scan = local_dimension(&cloud, &centers(&m, 50, 9), &RadiusGrid::new(0.1), 4).unwrap();
        for (t, phi) in [(1.0, 0.0), (0.0, LN_2)] {
            let bands = [band(t, phi, 0.123), band(t, phi, 0.71)];
            assert!(bands[0].spread < 1e-9);
            let rep = conformal_dimension_check(&scan, t, phi, LN_2, 0.05, &bands, 0.05).unwrap();
            assert!(rep.dimension.pass && rep.consistent, "{rep:?}");
        }
        let bands = [band(0.0, 0.0, 0.123)];
        let rep = conformal_dimension_check(&scan, 0.0, 0.0, LN_2, 0.05, &bands, 0.05).unwrap();
        assert!(!rep.consistent && (rep.band_drift - LN_2).abs() < 1e-9);
    }
}
