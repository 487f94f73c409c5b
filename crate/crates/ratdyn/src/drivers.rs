//! Parallel versions of the core loops. Every unit of work draws from its
//! own seeded stream and results are gathered in index order, so outputs
//! do not depend on the number of worker threads.

use rayon::prelude::*;

use ratdyn_core::conformal::{
    julia_point, pressure_at, EigenConfig, PressureCurve, SphereGrid, SphereTransfer, TransferModel, MIN_JULIA_POINTS,
};
use ratdyn_core::dimension::{scan_center, LocalDimensionScan, RadiusGrid, WeightedCloud};
use ratdyn_core::models::Dynamics;
use ratdyn_core::models::SymbolicModel;
use ratdyn_core::orbits::{lyapunov_from_samples, lyapunov_sample, symbolic_lyapunov_sample, LyapunovEstimate, Sampler};
use ratdyn_core::{rng, ConstPotential, Error, RationalMap, Result, SpherePoint};

/// Pressure over an ascending grid, one eigenproblem per worker.
pub fn pressure_curve<T>(model: &T, ts: &[f64], phi: f64, config: &EigenConfig) -> Result<PressureCurve>
where
    T: TransferModel + Sync,
{
    if ts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("t grid must be strictly ascending"));
    }
    let phi = ConstPotential(phi);
    let points = ts.par_iter().map(|&t| pressure_at(model, t, &phi, config)).collect::<Result<Vec<_>>>()?;
    Ok(PressureCurve::from_points(&points))
}

pub fn lyapunov<D, S>(f: &D, sampler: &S, n_steps: usize, n_samples: usize, seed: u64) -> Result<LyapunovEstimate>
where
    D: Dynamics,
    S: Sampler<D::Point>,
{
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1"));
    }
    let per = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| lyapunov_sample(f, sampler, n_steps, seed, i))
        .collect::<Result<Vec<f64>>>()?;
    Ok(lyapunov_from_samples(&per, n_steps))
}

/// Shadowed symbolic orbits, one per worker.
pub fn symbolic_lyapunov<M: SymbolicModel>(model: &M, n_steps: usize, n_samples: usize, seed: u64) -> Result<LyapunovEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1"));
    }
    let per = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| symbolic_lyapunov_sample(model, n_steps, seed, i))
        .collect::<Result<Vec<f64>>>()?;
    Ok(lyapunov_from_samples(&per, n_steps))
}

/// `n` draws, the `i`-th from stream `i` of `seed`.
pub fn sample_points<P: Send, S: Sampler<P>>(sampler: &S, n: usize, seed: u64) -> Result<Vec<P>> {
    (0..n as u64).into_par_iter().map(|i| sampler.sample(&mut rng::stream(seed, i))).collect()
}

pub fn local_dimension<D: Dynamics>(
    cloud: &WeightedCloud<'_, D>,
    centers: &[D::Point],
    grid: &RadiusGrid,
    seed: u64,
) -> Result<LocalDimensionScan<D::Point>> {
    let radii = grid.radii();
    let rows = centers
        .par_iter()
        .enumerate()
        .map(|(i, c)| scan_center(cloud, c, &radii, rng::derive_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut scan = LocalDimensionScan { centers: centers.to_vec(), radii, log_masses: vec![], slopes: vec![], slope_ci: vec![] };
    for (lm, slope, ci) in rows {
        scan.log_masses.push(lm);
        scan.slopes.push(slope);
        scan.slope_ci.push(ci);
    }
    Ok(scan)
}

/// Same points as the core's `julia_support`.
pub fn julia_support(f: &RationalMap, n_points: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    if n_points < MIN_JULIA_POINTS {
        return Err(Error::InvalidArgument("julia_support needs at least 1000 points"));
    }
    let anchor = f.repelling_fixed_point()?;
    (0..n_points as u64).into_par_iter().map(|i| julia_point(f, anchor, seed, i)).collect()
}

/// Sphere transfer operator with preimages computed in parallel batches.
pub fn sphere_transfer(f: &RationalMap, grid: SphereGrid, cloud: &[SpherePoint], samples_per_cell: usize) -> Result<SphereTransfer> {
    SphereTransfer::build_with(f, grid, cloud, samples_per_cell, |batch| batch.par_iter().map(|y| f.preimages(y)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ratdyn_core::conformal::{pressure_curve as serial_curve, SymbolicTransfer};
    use ratdyn_core::models::{CircleModel, IntervalModel};
    use ratdyn_core::orbits::{lyapunov as serial_lyapunov, SymbolicSampler};

    #[test]
    fn parallel_matches_serial() {
        let m = CircleModel::new(2).unwrap();
        let tm = SymbolicTransfer::new(&m, 256).unwrap();
        let cfg = EigenConfig::default();
        let ts = [0.0, 0.5, 1.0];
        assert_eq!(pressure_curve(&tm, &ts, 0.0, &cfg).unwrap(), serial_curve(&tm, &ts, &ConstPotential(0.0), &cfg).unwrap());
        let cheb = IntervalModel::chebyshev();
        let s = SymbolicSampler { model: &cheb };
        assert_eq!(lyapunov(&cheb, &s, 500, 16, 3).unwrap(), serial_lyapunov(&cheb, &s, 500, 16, 3).unwrap());
        assert_eq!(symbolic_lyapunov(&cheb, 500, 16, 3).unwrap(), ratdyn_core::orbits::symbolic_lyapunov(&cheb, 500, 16, 3).unwrap());
        let f = RationalMap::real_polynomial(&[-1.0, 0.0, 1.0]).unwrap();
        let par = julia_support(&f, 1000, 2).unwrap();
        let ser = ratdyn_core::conformal::julia_support(&f, 1000, 2).unwrap();
        assert_eq!(format!("{par:?}"), format!("{ser:?}"));
    }
}
