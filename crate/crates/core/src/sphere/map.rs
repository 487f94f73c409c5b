#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use super::{poly, SpherePoint};
use crate::{Error, Result};

/// Leading coefficients below this fraction of the largest one are treated as
/// zero when deciding how many roots sit at infinity.
const TRIM: f64 = 1e-14;
/// Normalized value of one coordinate polynomial at a root of the other below
/// which the two are declared to share a factor.
const COMMON_FACTOR_TOL: f64 = 1e-10;
/// Both homogeneous coordinates smaller than this (relative) means the
/// evaluation is meaningless.
const DEGENERATE_TOL: f64 = 1e-13;
/// Roots closer than this in the chordal metric are one multiple root.
const CLUSTER_TOL: f64 = 1e-6;
/// Every preimage must map back to within this distance of its target.
const PREIMAGE_TOL: f64 = 1e-9;

/// Critical points with multiplicities; the multiplicities add up to `2d − 2`.
#[derive(Debug, Clone)]
pub struct CriticalSet {
    pub points: Vec<SpherePoint>,
    pub multiplicities: Vec<usize>,
}

impl CriticalSet {
    fn new(points: Vec<SpherePoint>, multiplicities: Vec<usize>, degree: usize) -> Result<Self> {
        let total: usize = multiplicities.iter().sum();
        if total != 2 * degree - 2 {
            return Err(Error::RootFindingFailure { residual: f64::NAN, sweeps: poly::MAX_SWEEPS });
        }
        Ok(CriticalSet { points, multiplicities })
    }

    /// Chordal distance from `x` to the nearest critical point (2 if there are none).
    pub fn distance(&self, x: &SpherePoint) -> f64 {
        self.points.iter().map(|c| c.distance(x)).fold(2.0, f64::min)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A rational map `num(z) / den(z)` of degree `d = max(deg num, deg den)`,
/// coefficients in ascending order.
///
/// Evaluation is homogeneous: in the chart `z = h0/h1` when `|z| ≤ 1` and in
/// `w = h1/h0` otherwise, where the coefficient lists are read backwards. No
/// point, including infinity and the poles, is special-cased.
#[derive(Debug, Clone)]
pub struct RationalMap {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
    num_rev: Vec<Complex64>,
    den_rev: Vec<Complex64>,
    degree: usize,
    critical: CriticalSet,
}

impl RationalMap {
    /// Rejects a zero denominator, constant maps, and numerator/denominator
    /// pairs with a common root.
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        if num.iter().chain(den.iter()).any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite"));
        }
        let deg_num = poly::effective_degree(&num, 0.0);
        let Some(deg_den) = poly::effective_degree(&den, 0.0) else {
            return Err(Error::InvalidArgument("denominator is the zero polynomial"));
        };
        let degree = deg_num.unwrap_or(0).max(deg_den);
        if degree == 0 {
            return Err(Error::InvalidArgument("constant map has degree 0"));
        }
        let pad = |c: &[Complex64]| -> Vec<Complex64> {
            (0..=degree).map(|k| c.get(k).copied().unwrap_or_default()).collect()
        };
        let num = pad(&num);
        let den = pad(&den);
        let num_rev: Vec<Complex64> = num.iter().rev().copied().collect();
        let den_rev: Vec<Complex64> = den.iter().rev().copied().collect();
        let placeholder = CriticalSet { points: Vec::new(), multiplicities: Vec::new() };
        let mut map = RationalMap { num, den, num_rev, den_rev, degree, critical: placeholder };
        map.check_common_factor()?;
        map.critical = map.compute_critical_points()?;
        Ok(map)
    }

    /// The polynomial map with the given coefficients.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(coeffs, alloc::vec![Complex64::new(1.0, 0.0)])
    }

    /// Real-coefficient polynomial shorthand.
    pub fn real_polynomial(coeffs: &[f64]) -> Result<Self> {
        Self::polynomial(coeffs.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn num(&self) -> &[Complex64] {
        &self.num
    }

    pub fn den(&self) -> &[Complex64] {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn critical_set(&self) -> &CriticalSet {
        &self.critical
    }

    /// Error unless the map has degree at least 2.
    pub fn require_dynamical(&self) -> Result<()> {
        if self.degree < 2 {
            Err(Error::DegreeTooLow(self.degree))
        } else {
            Ok(())
        }
    }

    /// Coefficients and coordinate of `x` in its well-conditioned chart.
    fn chart_of(&self, x: &SpherePoint, at_infinity: bool) -> (&[Complex64], &[Complex64], Complex64) {
        if at_infinity {
            (&self.num_rev, &self.den_rev, x.h1() / x.h0())
        } else {
            (&self.num, &self.den, x.h0() / x.h1())
        }
    }

    pub fn eval(&self, x: &SpherePoint) -> Result<SpherePoint> {
        let (at_inf, _) = x.chart();
        let (p, q, z) = self.chart_of(x, at_inf);
        let pv = poly::eval(p, z);
        let qv = poly::eval(q, z);
        let scale = poly::abs_eval(p, z.norm()) + poly::abs_eval(q, z.norm());
        let size = pv.norm().hypot(qv.norm());
        if !(size > DEGENERATE_TOL * scale) {
            return Err(Error::DegenerateEvaluation(size));
        }
        SpherePoint::new(pv, qv)
    }

    /// `|f′(z)|(1 + |z|²)/(1 + |f(z)|²)`, computed in whichever chart gives
    /// `|z| ≤ 1`.
    pub fn spherical_derivative(&self, x: &SpherePoint) -> f64 {
        self.spherical_derivative_in_chart(x, x.chart().0)
    }

    /// The spherical derivative computed in a chosen chart (`true` for
    /// `w = 1/z`). Both charts give the same value because `z ↦ 1/z` is a
    /// chordal isometry; the choice only affects rounding.
    pub fn spherical_derivative_in_chart(&self, x: &SpherePoint, at_infinity: bool) -> f64 {
        let (p, q, z) = self.chart_of(x, at_infinity);
        let (pv, dp) = poly::eval_with_derivative(p, z);
        let (qv, dq) = poly::eval_with_derivative(q, z);
        let wronskian = (dp * qv - pv * dq).norm();
        let denom = pv.norm_sqr() + qv.norm_sqr();
        if wronskian == 0.0 {
            return 0.0;
        }
        wronskian * (1.0 + z.norm_sqr()) / denom
    }

    pub fn log_spherical_derivative(&self, x: &SpherePoint) -> f64 {
        self.spherical_derivative(x).ln()
    }

    /// Distance from `x` to the critical set.
    pub fn critical_distance(&self, x: &SpherePoint) -> f64 {
        self.critical.distance(x)
    }

    /// All `d` solutions of `f(w) = z`, with multiplicity.
    pub fn preimages(&self, z: &SpherePoint) -> Result<Vec<(SpherePoint, usize)>> {
        // z1·num(w) − z0·den(w) = 0, homogeneous of degree d in w.
        let coeffs: Vec<Complex64> = self
            .num
            .iter()
            .zip(&self.den)
            .map(|(&a, &b)| z.h1() * a - z.h0() * b)
            .collect();
        let roots = self.homogeneous_roots(&coeffs)?;
        for (r, _) in &roots {
            let img = self.eval(r)?;
            let err = img.distance(z);
            if !(err < PREIMAGE_TOL) {
                return Err(Error::RootFindingFailure { residual: err, sweeps: poly::MAX_SWEEPS });
            }
        }
        Ok(roots)
    }

    /// Fixed points with multiplicity (`d + 1` in total).
    pub fn fixed_points(&self) -> Result<Vec<(SpherePoint, usize)>> {
        // h0·den − h1·num, i.e. w·den(w) − num(w), homogeneous of degree d + 1.
        let n = self.degree + 1;
        let coeffs: Vec<Complex64> = (0..=n)
            .map(|k| {
                let shifted = if k >= 1 { self.den[k - 1] } else { Complex64::zero() };
                let own = self.num.get(k).copied().unwrap_or_default();
                shifted - own
            })
            .collect();
        self.homogeneous_roots(&coeffs)
    }

    /// The fixed point of largest multiplier, provided it repels.
    pub fn repelling_fixed_point(&self) -> Result<SpherePoint> {
        let mut best: Option<(SpherePoint, f64)> = None;
        for (p, _) in self.fixed_points()? {
            let m = self.spherical_derivative(&p);
            if best.map_or(true, |(_, b)| m > b) {
                best = Some((p, m));
            }
        }
        match best {
            Some((p, m)) if m > 1.0 => Ok(p),
            _ => Err(Error::InvalidArgument("map has no repelling fixed point")),
        }
    }

    /// Roots on the sphere of a homogeneous polynomial given by its ascending
    /// coefficient list in `w = h0/h1` (formal degree = `coeffs.len() − 1`).
    /// Roots outside the unit disk are polished in the reversed chart, and
    /// missing degree becomes multiplicity at infinity.
    fn homogeneous_roots(&self, coeffs: &[Complex64]) -> Result<Vec<(SpherePoint, usize)>> {
        let formal = coeffs.len() - 1;
        let deg = poly::effective_degree(coeffs, TRIM)
            .ok_or(Error::DegenerateEvaluation(0.0))?;
        let reversed: Vec<Complex64> = coeffs.iter().rev().copied().collect();
        let mut points = Vec::with_capacity(formal);
        for r in poly::finite_roots(coeffs, TRIM)? {
            if r.norm() <= 1.0 {
                points.push(SpherePoint::from_complex(r));
            } else {
                let u = newton_polish(&reversed, r.inv());
                points.push(SpherePoint::new(Complex64::new(1.0, 0.0), u)?);
            }
        }
        for _ in deg..formal {
            points.push(SpherePoint::INFINITY);
        }
        Ok(cluster_on_sphere(&points))
    }

    fn check_common_factor(&self) -> Result<()> {
        let deg_num = poly::effective_degree(&self.num, 0.0).unwrap_or(0);
        let deg_den = poly::effective_degree(&self.den, 0.0).unwrap_or(0);
        if deg_num == 0 || deg_den == 0 {
            return Ok(());
        }
        let (roots_of, other, other_rev) = if deg_num <= deg_den {
            (&self.num, &self.den, &self.den_rev)
        } else {
            (&self.den, &self.num, &self.num_rev)
        };
        let mut worst = f64::INFINITY;
        for r in poly::finite_roots(roots_of, 0.0)? {
            let v = if r.norm() <= 1.0 {
                poly::eval(other, r).norm() / poly::abs_eval(other, r.norm())
            } else {
                let w = r.inv();
                poly::eval(other_rev, w).norm() / poly::abs_eval(other_rev, w.norm())
            };
            worst = worst.min(v);
        }
        if worst < COMMON_FACTOR_TOL {
            return Err(Error::CommonFactor(worst));
        }
        Ok(())
    }

    fn compute_critical_points(&self) -> Result<CriticalSet> {
        let d = self.degree;
        if d == 1 {
            return CriticalSet::new(Vec::new(), Vec::new(), 1);
        }
        let w = poly::sub(
            &poly::mul(&poly::derivative(&self.num), &self.den),
            &poly::mul(&self.num, &poly::derivative(&self.den)),
        );
        // The z^{2d−1} terms cancel; the Wronskian has formal degree 2d − 2.
        let w: Vec<Complex64> = (0..=2 * d - 2).map(|k| w.get(k).copied().unwrap_or_default()).collect();
        let roots = self.homogeneous_roots(&w)?;
        let (points, mult) = roots.into_iter().unzip();
        CriticalSet::new(points, mult, d)
    }
}

fn newton_polish(coeffs: &[Complex64], mut u: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (p, dp) = poly::eval_with_derivative(coeffs, u);
        if dp.is_zero() {
            break;
        }
        let step = p / dp;
        if !step.is_finite() || step.norm() > 0.1 * u.norm().max(1e-3) {
            break;
        }
        u -= step;
        if step.norm() <= 1e-16 * u.norm().max(1e-300) {
            break;
        }
    }
    u
}

/// Groups points closer than the cluster tolerance, keeping the first
/// representative's chart coordinate averaged over the group.
fn cluster_on_sphere(points: &[SpherePoint]) -> Vec<(SpherePoint, usize)> {
    let mut used = alloc::vec![false; points.len()];
    let mut out = Vec::new();
    for i in 0..points.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (inf, c0) = points[i].chart();
        let mut sum = c0;
        let mut count = 1usize;
        for j in (i + 1)..points.len() {
            if !used[j] && points[j].distance(&points[i]) < CLUSTER_TOL {
                used[j] = true;
                let h = points[j];
                sum += if inf { h.h1() / h.h0() } else { h.h0() / h.h1() };
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let p = if inf {
            SpherePoint::new(Complex64::new(1.0, 0.0), mean)
        } else {
            SpherePoint::new(mean, Complex64::new(1.0, 0.0))
        };
        out.push((p.unwrap_or(points[i]), count));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> RationalMap {
        RationalMap::real_polynomial(&[0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = square();
        assert!(f.eval(&SpherePoint::INFINITY).unwrap().approx_eq(&SpherePoint::INFINITY, 1e-15));
        let i = SpherePoint::from_complex(c(0.0, 1.0));
        assert!(f.eval(&i).unwrap().approx_eq(&SpherePoint::from_real(-1.0), 1e-15));
        let cheb = RationalMap::real_polynomial(&[0.0, 4.0, -4.0]).unwrap();
        assert!(cheb.eval(&SpherePoint::from_real(0.5)).unwrap().approx_eq(&SpherePoint::from_real(1.0), 1e-15));
    }

    #[test]
    fn pole_maps_to_infinity() {
        let f = RationalMap::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let img = f.eval(&SpherePoint::from_real(1.0)).unwrap();
        assert!(img.approx_eq(&SpherePoint::INFINITY, 1e-15));
        assert!(f.eval(&SpherePoint::INFINITY).unwrap().approx_eq(&SpherePoint::from_real(1.0), 1e-15));
    }

    #[test]
    fn common_factor_is_rejected() {
        // (z − 1)(z + 2) / (z − 1)(z − 3)
        let num = poly::mul(&[c(-1.0, 0.0), c(1.0, 0.0)], &[c(2.0, 0.0), c(1.0, 0.0)]);
        let den = poly::mul(&[c(-1.0, 0.0), c(1.0, 0.0)], &[c(-3.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(RationalMap::new(num, den), Err(Error::CommonFactor(_))));
        assert!(RationalMap::new(vec![c(1.0, 0.0)], vec![c(2.0, 0.0)]).is_err());
    }

    #[test]
    fn degree_one_is_constructed_but_not_dynamical() {
        let id = RationalMap::real_polynomial(&[0.0, 1.0]).unwrap();
        assert_eq!(id.degree(), 1);
        assert!(id.critical_set().is_empty());
        assert_eq!(id.require_dynamical(), Err(Error::DegreeTooLow(1)));
    }

    #[test]
    fn spherical_derivative_examples() {
        let f = square();
        for k in 0..12 {
            let x = SpherePoint::from_complex(Complex64::from_polar(1.0, 0.5 * k as f64));
            assert!((f.spherical_derivative(&x) - 2.0).abs() < 1e-14);
        }
        assert_eq!(f.spherical_derivative(&SpherePoint::ZERO), 0.0);
        assert_eq!(f.spherical_derivative(&SpherePoint::INFINITY), 0.0);
    }

    #[test]
    fn spherical_derivative_matches_finite_differences() {
        let f = RationalMap::real_polynomial(&[0.2, 0.0, 1.0]).unwrap();
        let x = SpherePoint::from_real(0.3);
        let exact = f.spherical_derivative(&x);
        // Closed form: |2z|(1 + z²)/(1 + (z² + 0.2)²) at z = 0.3.
        let closed = 0.6 * 1.09 / (1.0 + 0.29f64 * 0.29);
        assert!((exact - closed).abs() < 1e-14);
        for dir in [c(1.0, 0.0), c(0.0, 1.0), c(0.6, -0.8)] {
            let h = 1e-7;
            let y = SpherePoint::from_complex(c(0.3, 0.0) + dir * h);
            let ratio = f.eval(&x).unwrap().distance(&f.eval(&y).unwrap()) / x.distance(&y);
            assert!((ratio - exact).abs() < 1e-6, "{ratio} vs {exact}");
        }
    }

    #[test]
    fn preimage_examples() {
        let f = square();
        let pre = f.preimages(&SpherePoint::from_real(1.0)).unwrap();
        assert_eq!(pre.len(), 2);
        assert!(pre.iter().any(|(p, m)| *m == 1 && p.approx_eq(&SpherePoint::from_real(1.0), 1e-12)));
        assert!(pre.iter().any(|(p, m)| *m == 1 && p.approx_eq(&SpherePoint::from_real(-1.0), 1e-12)));

        let pre = f.preimages(&SpherePoint::ZERO).unwrap();
        assert_eq!(pre.len(), 1);
        assert_eq!(pre[0].1, 2);
        assert!(pre[0].0.distance(&SpherePoint::ZERO) < 1e-7);

        let g = RationalMap::real_polynomial(&[-1.0, 0.0, 1.0]).unwrap();
        let pre = g.preimages(&SpherePoint::ZERO).unwrap();
        // Closed-form roots of w² − 1.
        for e in [1.0, -1.0] {
            assert!(pre.iter().any(|(p, m)| *m == 1 && p.approx_eq(&SpherePoint::from_real(e), 1e-12)));
        }

        let inf = f.preimages(&SpherePoint::INFINITY).unwrap();
        assert_eq!(inf.len(), 1);
        assert_eq!(inf[0].1, 2);
        assert!(inf[0].0.approx_eq(&SpherePoint::INFINITY, 1e-12));
    }

    #[test]
    fn critical_point_examples() {
        let f = square();
        let cs = f.critical_set();
        assert_eq!(cs.multiplicities.iter().sum::<usize>(), 2);
        assert!(cs.distance(&SpherePoint::ZERO) < 1e-12);
        assert!(cs.distance(&SpherePoint::INFINITY) < 1e-12);

        let g = RationalMap::new(vec![c(0.3, -0.1), c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0)]).unwrap();
        assert!(g.critical_set().distance(&SpherePoint::ZERO) < 1e-12);
        assert!(g.critical_set().distance(&SpherePoint::INFINITY) < 1e-12);

        // (z² + 1)/(z² − 1): Wronskian 2z(z² − 1) − (z² + 1)2z = −4z, so the
        // critical points are 0 and (by degree count 2d − 2 = 2) infinity.
        let h = RationalMap::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let cs = h.critical_set();
        assert_eq!(cs.len(), 2);
        assert!(cs.distance(&SpherePoint::ZERO) < 1e-12);
        assert!(cs.distance(&SpherePoint::INFINITY) < 1e-12);
        assert_eq!(h.spherical_derivative(&SpherePoint::ZERO), 0.0);

        let cubic = RationalMap::real_polynomial(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(cubic.critical_set().multiplicities, vec![2, 2]);
    }

    #[test]
    fn fixed_points_of_square() {
        let f = square();
        let fp = f.fixed_points().unwrap();
        assert_eq!(fp.iter().map(|(_, m)| m).sum::<usize>(), 3);
        let rep = f.repelling_fixed_point().unwrap();
        assert!(rep.approx_eq(&SpherePoint::from_real(1.0), 1e-12));
    }

    fn arb_point() -> impl Strategy<Value = Complex64> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| c(a, b))
    }

    fn test_map() -> RationalMap {
        RationalMap::new(
            vec![c(0.3, 0.2), c(-0.5, 0.0), c(1.0, 0.1)],
            vec![c(1.0, 0.0), c(0.2, -0.3), c(0.1, 0.0)],
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn chain_rule(z in arb_point(), n in 1usize..=20) {
            // Oracle: the spherical derivative of fⁿ telescopes to
            // |Π f′(zᵢ)| (1 + |z₀|²)/(1 + |zₙ|²) using the Euclidean derivative.
            let f = RationalMap::real_polynomial(&[0.25, 0.0, 0.6]).unwrap();
            let mut x = SpherePoint::from_complex(z);
            let mut zi = z;
            let mut sum = 0.0;
            let mut euclid = 0.0;
            for _ in 0..n {
                sum += f.log_spherical_derivative(&x);
                euclid += (c(1.2, 0.0) * zi).norm().ln();
                zi = zi * zi * 0.6 + 0.25;
                x = f.eval(&x).unwrap();
            }
            prop_assume!(zi.norm() < 1e6 && euclid.is_finite());
            let oracle = euclid + (1.0 + z.norm_sqr()).ln() - (1.0 + zi.norm_sqr()).ln();
            prop_assert!((sum - oracle).abs() < 1e-8, "{} vs {}", sum, oracle);
        }

        #[test]
        fn metric_axioms(a in arb_point(), b in arb_point(), e in arb_point()) {
            let (p, q, r) = (SpherePoint::from_complex(a), SpherePoint::from_complex(b), SpherePoint::from_complex(e));
            prop_assert_eq!(p.distance(&q), q.distance(&p));
            prop_assert!(p.distance(&r) <= p.distance(&q) + q.distance(&r) + 1e-12);
            prop_assert!(p.distance(&q) <= 2.0);
        }

        #[test]
        fn preimages_contain_the_point(z in arb_point()) {
            let f = test_map();
            let w = SpherePoint::from_complex(z);
            let pre = f.preimages(&f.eval(&w).unwrap()).unwrap();
            prop_assert_eq!(pre.iter().map(|(_, m)| m).sum::<usize>(), 2);
            prop_assert!(pre.iter().any(|(p, _)| p.distance(&w) < 1e-9));
        }

        #[test]
        fn chart_invariance(r in 0.5f64..2.0, ang in 0.0f64..6.3) {
            let f = test_map();
            let x = SpherePoint::from_complex(Complex64::from_polar(r, ang));
            let a = f.spherical_derivative_in_chart(&x, false);
            let b = f.spherical_derivative_in_chart(&x, true);
            prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
        }
    }
}
