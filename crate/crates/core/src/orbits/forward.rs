#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng as _;

use super::backward::{backward_walk, WalkMode};
use crate::models::{Dynamics, SymbolicModel};
use crate::sphere::{RationalMap, SpherePoint};
use crate::{rng, stats, Error, Result};

/// `log |Df|` below this means the orbit has hit a critical point to machine
/// precision.
pub const CRITICAL_LOG_FLOOR: f64 = -32.236_191_301_916_64; // ln 1e-14

/// `x, f(x), …, fⁿ(x)` with `log |Df|` at each of the first `n` points.
#[derive(Debug, Clone)]
pub struct ForwardOrbit<P> {
    pub start: P,
    pub points: Vec<P>,
    pub log_derivs: Vec<f64>,
}

impl<P> ForwardOrbit<P> {
    /// Birkhoff sum of `log |Df|`.
    pub fn log_derivative_sum(&self) -> f64 {
        self.log_derivs.iter().sum()
    }
}

pub fn iterate<D: Dynamics>(f: &D, x: D::Point, n: usize) -> Result<ForwardOrbit<D::Point>> {
    let mut points = Vec::with_capacity(n + 1);
    let mut log_derivs = Vec::with_capacity(n);
    let mut y = x;
    points.push(y);
    for _ in 0..n {
        log_derivs.push(f.log_deriv(&y));
        y = f.image(&y)?;
        points.push(y);
    }
    Ok(ForwardOrbit { start: x, points, log_derivs })
}

/// Draws points from a probability measure. Implementations must be pure
/// functions of the generator state.
pub trait Sampler<P>: Sync {
    fn sample(&self, rng: &mut rng::Rng) -> Result<P>;
}

/// The uniform law in the symbolic coordinate, realized in phase space:
/// arc length for `z^d`, the arcsine acip for Chebyshev maps, the maximal
/// entropy measure on a quasicircle.
pub struct SymbolicSampler<'a, M> {
    pub model: &'a M,
}

impl<'a, M: SymbolicModel> Sampler<<M::Dyn as Dynamics>::Point> for SymbolicSampler<'a, M> {
    fn sample(&self, rng: &mut rng::Rng) -> Result<<M::Dyn as Dynamics>::Point> {
        let theta: f64 = rng.gen();
        Ok(self.model.realize(theta))
    }
}

/// Endpoints of uniform backward walks of fixed length from an anchor; for a
/// rational map these approximate the measure of maximal entropy.
pub struct BackwardSampler<'a, D: Dynamics> {
    pub map: &'a D,
    pub anchor: D::Point,
    pub depth: usize,
}

impl<'a> BackwardSampler<'a, RationalMap> {
    /// Anchored at the most repelling fixed point, walks of length 30.
    pub fn from_fixed_point(map: &'a RationalMap) -> Result<Self> {
        Ok(BackwardSampler { map, anchor: map.repelling_fixed_point()?, depth: 30 })
    }
}

impl<'a, D: Dynamics> Sampler<D::Point> for BackwardSampler<'a, D> {
    fn sample(&self, rng: &mut rng::Rng) -> Result<D::Point> {
        let walk = backward_walk(self.map, self.anchor, self.depth, WalkMode::Uniform, rng.gen())?;
        Ok(walk.branch.last().copied().unwrap_or(self.anchor))
    }
}

/// Uniform (Lebesgue) points of the planar disk `|z| ≤ radius`.
pub struct DiskSampler {
    pub radius: f64,
}

impl Sampler<SpherePoint> for DiskSampler {
    fn sample(&self, rng: &mut rng::Rng) -> Result<SpherePoint> {
        let r = self.radius * rng.gen::<f64>().sqrt();
        let a = 2.0 * PI * rng.gen::<f64>();
        Ok(SpherePoint::from_complex(Complex64::from_polar(r, a)))
    }
}

/// Normalized spherical Lebesgue measure.
pub struct SphericalSampler;

impl Sampler<SpherePoint> for SphericalSampler {
    fn sample(&self, rng: &mut rng::Rng) -> Result<SpherePoint> {
        let z = 2.0 * rng.gen::<f64>() - 1.0;
        let a = 2.0 * PI * rng.gen::<f64>();
        let s = (1.0 - z * z).max(0.0).sqrt();
        SpherePoint::from_unit_vector([s * a.cos(), s * a.sin(), z])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovEstimate {
    pub mean: f64,
    /// Sample standard deviation of the per-sample averages over `√n_samples`.
    pub stderr: f64,
    pub n_samples: usize,
    pub n_steps: usize,
}

/// `(1/n) Σ log |Df(fⁱx)|` for the `index`-th sample point.
pub fn lyapunov_sample<D: Dynamics, S: Sampler<D::Point>>(
    f: &D,
    sampler: &S,
    n_steps: usize,
    seed: u64,
    index: u64,
) -> Result<f64> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1"));
    }
    let mut rng = rng::stream(seed, index);
    let mut x = sampler.sample(&mut rng)?;
    let mut sum = 0.0;
    for step in 0..n_steps {
        let l = f.log_deriv(&x);
        if !(l >= CRITICAL_LOG_FLOOR) {
            return Err(Error::CriticalOrbitHit { step, log_deriv: l });
        }
        sum += l;
        x = f.image(&x)?;
    }
    Ok(sum / n_steps as f64)
}

/// Combines per-sample averages (in index order).
pub fn lyapunov_from_samples(per_sample: &[f64], n_steps: usize) -> LyapunovEstimate {
    let n = per_sample.len();
    LyapunovEstimate {
        mean: stats::mean(per_sample),
        stderr: stats::std_dev(per_sample) / (n as f64).sqrt(),
        n_samples: n,
        n_steps,
    }
}

/// Lyapunov exponent of the measure the sampler draws from. The sampler must
/// draw from an `f`-invariant measure for the result to mean anything.
pub fn lyapunov<D: Dynamics, S: Sampler<D::Point>>(
    f: &D,
    sampler: &S,
    n_steps: usize,
    n_samples: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1"));
    }
    let per: Result<Vec<f64>> = (0..n_samples as u64).map(|i| lyapunov_sample(f, sampler, n_steps, seed, i)).collect();
    Ok(lyapunov_from_samples(&per?, n_steps))
}

/// Symbolic digits kept ahead of the current point of a shadowed orbit.
pub const SHADOW_DIGITS: usize = 48;

/// Birkhoff average of `log |Df|` along an orbit followed in the symbolic
/// coordinate, for the `index`-th sample.
///
/// The orbit of a uniformly random `θ` is its digit sequence read by the
/// shift, and the digits are i.i.d. uniform. Each point is rebuilt from a
/// sliding window of [`SHADOW_DIGITS`] digits through the inverse branches,
/// so the orbit never collapses the way `f64` iteration of an expanding
/// map does after about 53 steps.
pub fn symbolic_lyapunov_sample<M: SymbolicModel>(model: &M, n_steps: usize, seed: u64, index: u64) -> Result<f64> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1"));
    }
    let sym = model.symbolic();
    let d = sym.branches();
    let mut rng = rng::stream(seed, index);
    let mut digits: alloc::collections::VecDeque<usize> = (0..SHADOW_DIGITS).map(|_| rng.gen_range(0..d)).collect();
    let mut sum = 0.0;
    for step in 0..n_steps {
        let theta = digits.iter().rev().fold(rng.gen::<f64>(), |x, &k| sym.inverse_f64(k, x));
        let l = model.log_deriv_at(theta);
        if !(l >= CRITICAL_LOG_FLOOR) {
            return Err(Error::CriticalOrbitHit { step, log_deriv: l });
        }
        sum += l;
        digits.pop_front();
        digits.push_back(rng.gen_range(0..d));
    }
    Ok(sum / n_steps as f64)
}

/// Lyapunov exponent of the measure that is uniform in the symbolic
/// coordinate, from shadowed orbits.
pub fn symbolic_lyapunov<M: SymbolicModel>(model: &M, n_steps: usize, n_samples: usize, seed: u64) -> Result<LyapunovEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1"));
    }
    let per: Result<Vec<f64>> = (0..n_samples as u64).map(|i| symbolic_lyapunov_sample(model, n_steps, seed, i)).collect();
    Ok(lyapunov_from_samples(&per?, n_steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CircleModel, IntervalModel};

    #[test]
    fn orbit_on_the_unit_circle() {
        let f = RationalMap::real_polynomial(&[0.0, 0.0, 1.0]).unwrap();
        let x = SpherePoint::from_complex(Complex64::from_polar(1.0, 0.7));
        let orbit = iterate(&f, x, 10).unwrap();
        assert_eq!(orbit.points.len(), 11);
        for (p, l) in orbit.points.iter().zip(&orbit.log_derivs) {
            assert!((p.to_complex().unwrap().norm() - 1.0).abs() < 1e-12);
            assert!((l - 2f64.ln()).abs() < 1e-12);
        }
        let single = iterate(&f, x, 0).unwrap();
        assert_eq!(single.points.len(), 1);
        assert!(single.log_derivs.is_empty());
    }

    #[test]
    fn lyapunov_of_the_circle_is_exact() {
        let model = CircleModel::new(2).unwrap();
        let est = lyapunov(&model, &SymbolicSampler { model: &model }, 100, 20, 1).unwrap();
        assert!((est.mean - 2f64.ln()).abs() < 1e-12);
        assert!(lyapunov(&model, &SymbolicSampler { model: &model }, 0, 20, 1).is_err());
    }

    #[test]
    fn shadowed_orbits_survive_repelling_julia_sets() {
        use crate::models::QuasicircleModel;
        // Connected Julia set: the maximal-entropy exponent is log d.
        let m = QuasicircleModel::new(2, Complex64::new(0.1, 0.0)).unwrap();
        let est = symbolic_lyapunov(&m, 2000, 40, 5).unwrap();
        assert!((est.mean - 2f64.ln()).abs() < 5e-3, "{est:?}");
        let cheb = IntervalModel::chebyshev();
        let est = symbolic_lyapunov(&cheb, 5000, 40, 5).unwrap();
        assert!((est.mean - 2f64.ln()).abs() < 5e-3, "{est:?}");
        assert_eq!(symbolic_lyapunov(&cheb, 50, 4, 9).unwrap(), symbolic_lyapunov(&cheb, 50, 4, 9).unwrap());
    }

    #[test]
    fn critical_hit_is_reported() {
        struct Fixed(f64);
        impl Sampler<f64> for Fixed {
            fn sample(&self, _: &mut rng::Rng) -> Result<f64> {
                Ok(self.0)
            }
        }
        let m = IntervalModel::chebyshev();
        let err = lyapunov(&m, &Fixed(0.5), 10, 1, 0).unwrap_err();
        assert!(matches!(err, Error::CriticalOrbitHit { step: 0, .. }));
    }

    #[test]
    fn deterministic_per_seed() {
        let m = IntervalModel::chebyshev();
        let s = SymbolicSampler { model: &m };
        let a = lyapunov(&m, &s, 500, 8, 42).unwrap();
        let b = lyapunov(&m, &s, 500, 8, 42).unwrap();
        assert_eq!(a, b);
    }
}
