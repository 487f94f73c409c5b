#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::models::Dynamics;
use crate::{rng, Error, Result};

/// How a backward walk picks among the preimages of its current point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkMode {
    /// Probability proportional to multiplicity. This is exact for the
    /// measure of maximal entropy, whose Jacobian is the constant `d`.
    Uniform,
    /// Probability proportional to `multiplicity · e^{−φ}|Df|^{−t}` over the
    /// fiber, with a constant potential `φ`. For any measure other than the
    /// maximal-entropy one this is importance sampling; see
    /// [`effective_sample_size`].
    JacobianWeighted { t: f64, phi: f64 },
}

/// A finite piece `y₀, y₁, …, yₙ` of a backward orbit, `f(y_{k+1}) = y_k`.
#[derive(Debug, Clone)]
pub struct BackwardWalk<P> {
    pub anchor: P,
    /// `y₁, …, yₙ`.
    pub branch: Vec<P>,
    /// Index of the chosen preimage in each fiber, in the order returned by
    /// [`Dynamics::preimages`].
    pub choices: Vec<usize>,
    /// `log |Df(y_k)|` for `k = 1, …, n`.
    pub log_derivs: Vec<f64>,
    pub mode: WalkMode,
    /// `Σ log(uniform probability / sampling probability)` of the choices made.
    pub log_importance: f64,
    pub seed: u64,
}

impl<P: Copy> BackwardWalk<P> {
    pub fn len(&self) -> usize {
        self.branch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branch.is_empty()
    }

    /// `y_k` (`k = 0` is the anchor).
    pub fn point(&self, k: usize) -> P {
        if k == 0 {
            self.anchor
        } else {
            self.branch[k - 1]
        }
    }

    /// `log |Dfⁿ(yₙ)| = Σ_{k ≤ n} log |Df(y_k)|`.
    pub fn log_derivative_sum(&self, n: usize) -> f64 {
        self.log_derivs[..n].iter().sum()
    }
}

/// Sampling probabilities over a fiber `[(x, multiplicity)]`.
pub fn fiber_probabilities<D: Dynamics>(f: &D, fiber: &[(D::Point, usize)], mode: WalkMode) -> Vec<f64> {
    let total: usize = fiber.iter().map(|(_, m)| m).sum();
    match mode {
        WalkMode::Uniform => fiber.iter().map(|(_, m)| *m as f64 / total as f64).collect(),
        WalkMode::JacobianWeighted { t, phi } => {
            let logw: Vec<f64> = fiber
                .iter()
                .map(|(x, m)| {
                    let l = f.log_deriv(x);
                    let tl = if t == 0.0 { 0.0 } else { t * l };
                    (*m as f64).ln() - phi - tl
                })
                .collect();
            let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if top == f64::INFINITY {
                let n = logw.iter().filter(|w| **w == f64::INFINITY).count() as f64;
                return logw.iter().map(|w| if *w == f64::INFINITY { 1.0 / n } else { 0.0 }).collect();
            }
            let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        }
    }
}

/// Backward walk whose step `k` takes preimage `choose(k, fiber)`.
pub fn walk_by<D, C>(f: &D, anchor: D::Point, n: usize, mut choose: C) -> Result<BackwardWalk<D::Point>>
where
    D: Dynamics,
    C: FnMut(usize, &[(D::Point, usize)]) -> Result<usize>,
{
    let mut walk = BackwardWalk {
        anchor,
        branch: Vec::with_capacity(n),
        choices: Vec::with_capacity(n),
        log_derivs: Vec::with_capacity(n),
        mode: WalkMode::Uniform,
        log_importance: 0.0,
        seed: 0,
    };
    let mut y = anchor;
    for k in 0..n {
        let fiber = f.preimages(&y)?;
        let i = choose(k, &fiber)?;
        y = fiber[i].0;
        walk.branch.push(y);
        walk.choices.push(i);
        walk.log_derivs.push(f.log_deriv(&y));
    }
    Ok(walk)
}

/// Random backward walk of length `n`, reproducible from `seed`.
pub fn backward_walk<D: Dynamics>(
    f: &D,
    anchor: D::Point,
    n: usize,
    mode: WalkMode,
    seed: u64,
) -> Result<BackwardWalk<D::Point>> {
    let mut rng = rng::rng(seed);
    let mut log_importance = 0.0;
    let mut walk = walk_by(f, anchor, n, |_, fiber| {
        let probs = fiber_probabilities(f, fiber, mode);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pick = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                pick = i;
                break;
            }
        }
        if mode != WalkMode::Uniform {
            let total: usize = fiber.iter().map(|(_, m)| m).sum();
            let uniform = fiber[pick].1 as f64 / total as f64;
            log_importance += (uniform / probs[pick]).ln();
        }
        Ok(pick)
    })?;
    walk.mode = mode;
    walk.log_importance = log_importance;
    walk.seed = seed;
    Ok(walk)
}

/// Kish effective sample size `(Σw)² / Σw²` of the importance weights.
pub fn effective_sample_size<P>(walks: &[BackwardWalk<P>]) -> f64 {
    if walks.is_empty() {
        return 0.0;
    }
    let top = walks.iter().map(|w| w.log_importance).fold(f64::NEG_INFINITY, f64::max);
    let (s, s2) = walks.iter().fold((0.0, 0.0), |(s, s2), w| {
        let x = (w.log_importance - top).exp();
        (s + x, s2 + x * x)
    });
    s * s / s2
}

/// The walk from `anchor` that follows the same inverse branches as
/// `reference`: at each step the preimage closest to the reference point.
/// The choice must be unambiguous (closest at most a quarter of the
/// runner-up's distance).
pub fn follow_walk<D: Dynamics>(
    f: &D,
    anchor: D::Point,
    reference: &BackwardWalk<D::Point>,
) -> Result<BackwardWalk<D::Point>> {
    let mut walk = walk_by(f, anchor, reference.len(), |k, fiber| {
        let target = reference.branch[k];
        let mut dists: Vec<(f64, usize)> = fiber.iter().enumerate().map(|(i, (x, _))| (f.distance(x, &target), i)).collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0));
        if dists.len() > 1 && !(dists[0].0 < 0.25 * dists[1].0) {
            return Err(Error::CombinatoricsMismatch(k + 1));
        }
        Ok(dists[0].1)
    })?;
    walk.mode = reference.mode;
    walk.seed = reference.seed;
    Ok(walk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CircleModel;
    use crate::sphere::{RationalMap, SpherePoint};

    fn square() -> RationalMap {
        RationalMap::real_polynomial(&[0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn fiber_probabilities_at_one() {
        let f = square();
        let fiber = f.preimages(&SpherePoint::from_real(1.0)).unwrap();
        for mode in [
            WalkMode::Uniform,
            WalkMode::JacobianWeighted { t: 0.0, phi: 0.0 },
            WalkMode::JacobianWeighted { t: 1.0, phi: 0.0 },
        ] {
            let p = fiber_probabilities(&f, &fiber, mode);
            assert_eq!(p.len(), 2);
            assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_fibers_are_normalized() {
        let f = RationalMap::real_polynomial(&[0.3, 0.1, 1.0]).unwrap();
        let fiber = f.preimages(&SpherePoint::from_real(0.7)).unwrap();
        let p = fiber_probabilities(&f, &fiber, WalkMode::JacobianWeighted { t: 1.7, phi: 0.2 });
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] != p[1]);
    }

    #[test]
    fn walks_push_forward_to_the_anchor() {
        let f = RationalMap::new(
            alloc::vec![num_complex::Complex64::new(0.2, 0.1), num_complex::Complex64::new(0.0, 0.0), num_complex::Complex64::new(1.0, 0.0)],
            alloc::vec![num_complex::Complex64::new(1.0, 0.0), num_complex::Complex64::new(0.3, 0.0)],
        )
        .unwrap();
        let anchor = SpherePoint::from_real(0.4);
        let walk = backward_walk(&f, anchor, 25, WalkMode::JacobianWeighted { t: 1.0, phi: 0.0 }, 9).unwrap();
        for k in 1..=walk.len() {
            let img = f.eval(&walk.point(k)).unwrap();
            assert!(img.distance(&walk.point(k - 1)) < 1e-8);
        }
        let again = backward_walk(&f, anchor, 25, WalkMode::JacobianWeighted { t: 1.0, phi: 0.0 }, 9).unwrap();
        assert_eq!(walk.choices, again.choices);
        for (a, b) in walk.branch.iter().zip(&again.branch) {
            assert_eq!((a.h0(), a.h1()), (b.h0(), b.h1()));
        }
    }

    #[test]
    fn uniform_walks_have_full_effective_size() {
        let m = CircleModel::new(2).unwrap();
        let walks: Vec<_> = (0..10).map(|s| backward_walk(&m, 0.3, 12, WalkMode::Uniform, s).unwrap()).collect();
        assert!((effective_sample_size(&walks) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn followed_walk_keeps_the_combinatorics() {
        let m = CircleModel::new(2).unwrap();
        let base = backward_walk(&m, 0.30, 20, WalkMode::Uniform, 3).unwrap();
        let probe = follow_walk(&m, 0.31, &base).unwrap();
        assert_eq!(probe.choices, base.choices);
        // Both walks start in the same half-circle and follow the same branches.
        assert!(m.distance(&probe.branch[19], &base.branch[19]) < 1e-6);
        let far = follow_walk(&m, 0.80, &base);
        assert!(matches!(far, Err(Error::CombinatoricsMismatch(_))));
    }
}
