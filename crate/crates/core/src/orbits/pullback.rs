#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::Rng as _;

use super::backward::BackwardWalk;
use super::forward::Sampler;
use crate::models::Dynamics;
use crate::stats::linear_fit;
use crate::{rng, Error, Result};

/// Smallest accepted probe count for [`distortion_constant`].
pub const MIN_PROBES: usize = 1000;
/// A radius is regular when its boundary-avoidance statistic is at least `−BOUNDARY_TOL`.
pub const BOUNDARY_TOL: f64 = 0.05;
/// Safety factor between the pulled-back diameter and the distance to the critical set.
const CRITICAL_MARGIN: f64 = 4.0;
/// Lower bound returned when every probe sees a locally constant derivative.
const DISTORTION_FLOOR: f64 = 1e-12;

/// Rates for the stopping rule and the contraction check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub delta: f64,
    pub eta: f64,
    pub chi: f64,
}

impl StopRule {
    /// `δ = η = χ/10`.
    pub fn from_lyapunov(chi: f64) -> Self {
        StopRule { delta: chi / 10.0, eta: chi / 10.0, chi }
    }
}

/// One ball pulled back along a backward walk.
#[derive(Debug, Clone)]
pub struct PullbackRecord<P> {
    pub walk: BackwardWalk<P>,
    pub radius: f64,
    /// Accumulated bound on the log-distortion of the pulled-back branch.
    pub distortion_sum: f64,
    /// `log` of the pulled-back diameter after each step.
    pub contraction_log: Vec<f64>,
    /// First step from which both stopping inequalities hold for the rest of
    /// the walk; 0 if they never settle.
    pub stop_index: usize,
}

impl<P: Copy> PullbackRecord<P> {
    pub fn is_valid(&self) -> bool {
        self.distortion_sum < LN_2
    }

    /// Least-squares slope of `contraction_log` from `from` (a step index,
    /// 1-based) to the end.
    pub fn contraction_slope(&self, from: usize) -> Option<f64> {
        let from = from.max(1);
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .contraction_log
            .iter()
            .enumerate()
            .skip(from - 1)
            .filter(|(_, y)| y.is_finite())
            .map(|(k, y)| ((k + 1) as f64, *y))
            .unzip();
        linear_fit(&xs, &ys).map(|f| f.slope)
    }

    /// Whether the diameters shrink at rate at least `χ − η` past the stop index.
    pub fn contracts_at_rate(&self, rule: &StopRule) -> bool {
        match self.contraction_slope(self.stop_index) {
            Some(s) => s <= -(rule.chi - rule.eta),
            None => false,
        }
    }
}

/// First `n ≥ 1` such that for every `m ≥ n` in the walk
/// `|Df(y_m)| ≥ 2e^{−mδ}` and `e^{m(χ−δ)} ≤ |Dfᵐ(y_m)| ≤ e^{m(χ+δ)}`;
/// 0 when the last step already fails.
pub fn stop_index<P: Copy>(walk: &BackwardWalk<P>, rule: &StopRule) -> usize {
    let n = walk.len();
    let mut cumulative = Vec::with_capacity(n);
    let mut s = 0.0;
    for l in &walk.log_derivs {
        s += l;
        cumulative.push(s);
    }
    let holds = |m: usize| {
        let mf = m as f64;
        let single = walk.log_derivs[m - 1] >= LN_2 - mf * rule.delta;
        let total = cumulative[m - 1];
        single && total >= mf * (rule.chi - rule.delta) && total <= mf * (rule.chi + rule.delta)
    };
    let mut first = 0;
    for m in (1..=n).rev() {
        if holds(m) {
            first = m;
        } else {
            break;
        }
    }
    first
}

/// Empirical Lipschitz constant of `|Df|`: the largest
/// `| |Df(x)| − |Df(x′)| | / dist(x, x′)` over `n_probe` pairs, where `x` is
/// drawn from `sampler` and `x′` is a random nudge of size `10⁻⁴…10⁻²`,
/// inflated by 1.5.
pub fn distortion_constant<D: Dynamics, S: Sampler<D::Point>>(
    f: &D,
    sampler: &S,
    n_probe: usize,
    seed: u64,
) -> Result<f64> {
    if n_probe < MIN_PROBES {
        return Err(Error::InvalidArgument("distortion_constant needs at least 1000 probes"));
    }
    let mut worst: f64 = 0.0;
    for i in 0..n_probe {
        let mut rng = rng::stream(seed, i as u64);
        let x = sampler.sample(&mut rng)?;
        let size = 10f64.powf(-4.0 + 2.0 * rng.gen::<f64>());
        let angle = 2.0 * PI * rng.gen::<f64>();
        let y = f.nudge(&x, Complex64::from_polar(size, angle));
        let dist = f.distance(&x, &y);
        if !(dist > 0.0) {
            continue;
        }
        let (a, b) = (f.log_deriv(&x).exp(), f.log_deriv(&y).exp());
        let ratio = (a - b).abs() / dist;
        if ratio.is_finite() {
            worst = worst.max(ratio);
        }
    }
    Ok((1.5 * worst).max(DISTORTION_FLOOR))
}

/// Pulls the ball of the given radius about the walk's anchor back along the
/// walk.
///
/// With `r_{k−1}` the current radius and `D = |Df(y_k)|`, the pulled-back
/// ball around `y_k` has radius `r_k = r_{k−1}/D · e^{ε_k}` where
/// `ε_k = −log(1 − Ĉ r_k / D)` bounds the log-oscillation of `|Df|` over it.
/// Each step requires `dist(y_k, Crit) > 4 · 2r_k`; the increments `ε_k`
/// must sum to less than `log 2`.
pub fn pullback_ball<D: Dynamics>(
    f: &D,
    walk: &BackwardWalk<D::Point>,
    radius: f64,
    c_hat: f64,
    rule: &StopRule,
) -> Result<PullbackRecord<D::Point>> {
    if walk.is_empty() {
        return Err(Error::InvalidArgument("pullback needs a walk of length at least 1"));
    }
    if !(0.0..=1.0).contains(&radius) {
        return Err(Error::InvalidArgument("pullback radius must lie in [0, 1]"));
    }
    let mut r = radius;
    let mut sum = 0.0;
    let mut contraction_log = Vec::with_capacity(walk.len());
    for k in 1..=walk.len() {
        let y = walk.point(k);
        let deriv = walk.log_derivs[k - 1].exp();
        if r > 0.0 {
            let plain = r / deriv;
            // r_k appears on both sides; solve r_k(1 − Ĉ r_k/D) = plain for the
            // smaller root, which exists iff 4Ĉ·plain < D.
            let disc = 1.0 - 4.0 * c_hat * plain / deriv;
            if !(disc > 0.0) {
                return Err(Error::DistortionBudgetExceeded { step: k, sum: f64::INFINITY });
            }
            let rk = 2.0 * plain / (1.0 + disc.sqrt());
            let inc = (rk / plain).ln();
            sum += inc;
            r = rk;
            if sum >= LN_2 {
                return Err(Error::DistortionBudgetExceeded { step: k, sum });
            }
        }
        if !(f.critical_distance(&y) > CRITICAL_MARGIN * 2.0 * r) {
            return Err(Error::CriticalProximity { step: k });
        }
        contraction_log.push((2.0 * r).ln());
    }
    Ok(PullbackRecord {
        walk: walk.clone(),
        radius,
        distortion_sum: sum,
        contraction_log,
        stop_index: stop_index(walk, rule),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryScanRow {
    pub radius: f64,
    pub statistic: f64,
    pub regular: bool,
}

/// For each radius `γ`, the minimum over walks and late steps `n/2 ≤ k ≤ n`
/// of `(1/k) log |dist(y_k, center) − γ|`. Radii whose boundary is approached
/// at most subexponentially (statistic `≥ −BOUNDARY_TOL`) are regular.
pub fn boundary_avoidance_scan<D: Dynamics>(
    f: &D,
    center: &D::Point,
    radii: &[f64],
    walks: &[BackwardWalk<D::Point>],
) -> Result<Vec<BoundaryScanRow>> {
    if radii.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidArgument("boundary radii must be positive"));
    }
    let n = walks.first().map_or(0, |w| w.len());
    if walks.iter().any(|w| w.len() != n) {
        return Err(Error::InvalidArgument("walks must share a length"));
    }
    let start = (n / 2).max(1);
    let dists: Vec<Vec<f64>> =
        walks.iter().map(|w| (start..=n).map(|k| f.distance(&w.point(k), center)).collect()).collect();
    Ok(radii
        .iter()
        .map(|&gamma| {
            let mut stat = f64::INFINITY;
            for row in &dists {
                for (i, d) in row.iter().enumerate() {
                    let k = (start + i) as f64;
                    stat = stat.min((d - gamma).abs().ln() / k);
                }
            }
            BoundaryScanRow { radius: gamma, statistic: stat, regular: stat >= -BOUNDARY_TOL }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CircleModel;
    use crate::orbits::{backward_walk, walk_by, DiskSampler, WalkMode};
    use crate::sphere::{RationalMap, SpherePoint};

    fn square() -> RationalMap {
        RationalMap::real_polynomial(&[0.0, 0.0, 1.0]).unwrap()
    }

    fn on_circle(theta: f64) -> SpherePoint {
        SpherePoint::from_complex(Complex64::from_polar(1.0, 2.0 * PI * theta))
    }

    #[test]
    fn circle_pullback_halves_each_step() {
        let m = CircleModel::new(2).unwrap();
        let walk = backward_walk(&m, 0.3, 20, WalkMode::Uniform, 1).unwrap();
        let rule = StopRule::from_lyapunov(LN_2);
        let rec = pullback_ball(&m, &walk, 0.1, DISTORTION_FLOOR, &rule).unwrap();
        assert!(rec.is_valid());
        for w in rec.contraction_log.windows(2) {
            assert!((w[1] - w[0] + LN_2).abs() < 1e-6);
        }
        assert!((rec.contraction_slope(1).unwrap() + LN_2).abs() < 1e-6);
        assert!(rec.contracts_at_rate(&rule));
    }

    #[test]
    fn sphere_pullback_on_the_circle() {
        let f = square();
        let c_hat = distortion_constant(&f, &DiskSampler { radius: 2.0 }, MIN_PROBES, 5).unwrap();
        let walk = backward_walk(&f, on_circle(0.3), 20, WalkMode::Uniform, 2).unwrap();
        let rule = StopRule::from_lyapunov(LN_2);
        let rec = pullback_ball(&f, &walk, 0.1, c_hat, &rule).unwrap();
        assert!(rec.is_valid());
        assert!((rec.contraction_slope(5).unwrap() + LN_2).abs() < 1e-3);
        // Shorter walks stay valid and accumulate no more distortion.
        let mut short = walk.clone();
        short.branch.truncate(10);
        short.log_derivs.truncate(10);
        short.choices.truncate(10);
        let rs = pullback_ball(&f, &short, 0.1, c_hat, &rule).unwrap();
        assert!(rs.distortion_sum <= rec.distortion_sum);
    }

    #[test]
    fn zero_radius_is_trivially_valid() {
        let f = square();
        let walk = backward_walk(&f, on_circle(0.1), 5, WalkMode::Uniform, 3).unwrap();
        let rec = pullback_ball(&f, &walk, 0.0, 3.0, &StopRule::from_lyapunov(LN_2)).unwrap();
        assert_eq!(rec.distortion_sum, 0.0);
        assert!(rec.is_valid());
    }

    #[test]
    fn critical_proximity_fires() {
        // z² + 1e-6: the preimage of the anchor 2e-6 sits 1e-3 from the critical point 0.
        let f = RationalMap::real_polynomial(&[1e-6, 0.0, 1.0]).unwrap();
        let walk = backward_walk(&f, SpherePoint::from_real(2e-6), 3, WalkMode::Uniform, 4).unwrap();
        assert!(f.critical_distance(&walk.point(1)) < 3e-3);
        let err = pullback_ball(&f, &walk, 0.5, 1e-12, &StopRule::from_lyapunov(LN_2)).unwrap_err();
        assert!(matches!(err, Error::CriticalProximity { step: 1 } | Error::DistortionBudgetExceeded { .. }));
        let err = pullback_ball(&f, &walk, 0.5, 1e-12, &StopRule::from_lyapunov(LN_2));
        assert_eq!(err.unwrap_err(), Error::CriticalProximity { step: 1 });
    }

    #[test]
    fn stop_index_on_the_circle() {
        let m = CircleModel::new(2).unwrap();
        let walk = backward_walk(&m, 0.3, 30, WalkMode::Uniform, 1).unwrap();
        assert_eq!(stop_index(&walk, &StopRule::from_lyapunov(LN_2)), 1);
        // A Lyapunov guess that is far off never settles.
        assert_eq!(stop_index(&walk, &StopRule { delta: 0.01, eta: 0.01, chi: 2.0 }), 0);
    }

    #[test]
    fn distortion_constants() {
        let id = RationalMap::real_polynomial(&[0.0, 1.0]).unwrap();
        let c = distortion_constant(&id, &DiskSampler { radius: 2.0 }, MIN_PROBES, 1).unwrap();
        assert!(c < 1e-6);
        let f = square();
        let a = distortion_constant(&f, &DiskSampler { radius: 2.0 }, 4000, 1).unwrap();
        let b = distortion_constant(&f, &DiskSampler { radius: 2.0 }, 4000, 2).unwrap();
        assert!(a > 0.0 && (a / b - 1.0).abs() < 0.1);
        assert!(distortion_constant(&f, &DiskSampler { radius: 2.0 }, 10, 1).is_err());
    }

    #[test]
    fn boundary_scan_separates_regular_radii() {
        let f = square();
        let center = SpherePoint::from_real(1.0);
        let walks: Vec<_> =
            (0..8).map(|s| backward_walk(&f, on_circle(0.137), 400, WalkMode::Uniform, s).unwrap()).collect();
        let rows = boundary_avoidance_scan(&f, &center, &[0.7316], &walks).unwrap();
        assert!(rows[0].regular, "{rows:?}");

        // Walks creeping into the fixed point 1 along the branch that fixes it;
        // the boundary of B(i, √2) passes through 1.
        let creep = walk_by(&f, on_circle(0.3), 40, |_, fiber| {
            let d: Vec<f64> = fiber.iter().map(|(x, _)| x.distance(&center)).collect();
            Ok(if d[0] <= d[1] { 0 } else { 1 })
        })
        .unwrap();
        let rows = boundary_avoidance_scan(&f, &on_circle(0.25), &[2f64.sqrt()], &[creep]).unwrap();
        assert!(!rows[0].regular);
        assert!(rows[0].statistic < -0.5);
        assert!(boundary_avoidance_scan(&f, &center, &[0.0], &walks).is_err());
    }
}
