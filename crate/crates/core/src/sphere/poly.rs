//! Dense complex polynomials (ascending coefficients) and Aberth–Ehrlich
//! simultaneous root iteration.

#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;

use crate::{Error, Result};

/// Normwise backward-error tolerance: `|p(z)| ≤ tol · max|a_k| · Σ|z|^k`.
pub const ROOT_TOL: f64 = 1e-12;
/// Sweep budget of the Aberth iteration.
pub const MAX_SWEEPS: usize = 200;

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::zero(), |acc, &a| acc * z + a)
}

/// `(p(z), p'(z))` by Horner.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// `Σ |a_k| |z|^k`, the scale against which residuals are measured.
pub fn abs_eval(coeffs: &[Complex64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = alloc::vec![Complex64::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or_default() - b.get(k).copied().unwrap_or_default())
        .collect()
}

/// Degree after dropping leading coefficients below `rel_tol · max|a_k|`;
/// `None` for the zero polynomial.
pub fn effective_degree(coeffs: &[Complex64], rel_tol: f64) -> Option<usize> {
    let scale = coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    coeffs.iter().rposition(|a| a.norm() > rel_tol * scale)
}

fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let size = coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let r = z.norm();
    let powers = (0..coeffs.len()).rev().fold(0.0, |acc, _| acc * r + 1.0);
    if size == 0.0 {
        return 0.0;
    }
    eval(coeffs, z).norm() / (size * powers)
}

/// All roots of `coeffs[0] + coeffs[1] z + … + coeffs[n] z^n` (`coeffs[n] ≠ 0`).
///
/// Initial guesses sit on a circle whose radius is the largest
/// `|a_k / a_n|^{1/(n−k)}`, rotated off the real axis. Updates are applied in
/// place (Gauss–Seidel order), so the result is deterministic.
pub fn aberth(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    if lead.is_zero() {
        return Err(Error::InvalidArgument("leading coefficient must be nonzero"));
    }
    if n == 1 {
        return Ok(alloc::vec![-coeffs[0] / lead]);
    }
    let monic: Vec<Complex64> = coeffs.iter().map(|&a| a / lead).collect();
    let dmonic = derivative(&monic);

    let mut radius: f64 = 0.0;
    for (k, a) in monic.iter().enumerate().take(n) {
        if !a.is_zero() {
            radius = radius.max(a.norm().powf(1.0 / (n - k) as f64));
        }
    }
    if radius == 0.0 {
        radius = 1.0;
    }
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, ang)
        })
        .collect();

    let converged = |z: &[Complex64]| z.iter().all(|&r| relative_residual(&monic, r) <= ROOT_TOL);

    for _ in 0..MAX_SWEEPS {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let p = eval(&monic, z[i]);
            if p.is_zero() {
                continue;
            }
            let dp = eval(&dmonic, z[i]);
            let ratio = p / dp;
            let mut repulsion = Complex64::zero();
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if !diff.is_zero() {
                        repulsion += diff.inv();
                    }
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if converged(&z) || max_step < 1e-15 {
            break;
        }
    }
    let worst = z.iter().map(|&r| relative_residual(&monic, r)).fold(0.0, f64::max);
    if !(worst <= ROOT_TOL) {
        // A stalled multiple root can sit just above the relative tolerance;
        // accept it when the residual is at the level a root of multiplicity
        // ≤ n reaches in double precision.
        if !(worst <= 1e-10) {
            return Err(Error::RootFindingFailure { residual: worst, sweeps: MAX_SWEEPS });
        }
    }
    Ok(z)
}

/// Finite roots of a polynomial whose leading coefficients may be negligible:
/// coefficients below `trim · max|a_k|` at the top are dropped, and exact
/// zeros at the bottom are returned as roots at the origin without iterating.
pub fn finite_roots(coeffs: &[Complex64], trim: f64) -> Result<Vec<Complex64>> {
    let Some(deg) = effective_degree(coeffs, trim) else {
        return Err(Error::InvalidArgument("zero polynomial has no isolated roots"));
    };
    let low = coeffs.iter().take_while(|a| a.is_zero()).count().min(deg);
    let mut out = alloc::vec![Complex64::zero(); low];
    out.extend(aberth(&coeffs[low..=deg])?);
    Ok(out)
}

/// Merge approximations of a multiple root: roots closer than
/// `tol · max(1, |z|)` are averaged and their count becomes the multiplicity.
pub fn cluster(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    let mut used = alloc::vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut sum = roots[i];
        let mut count = 1usize;
        for j in (i + 1)..roots.len() {
            if !used[j] && (roots[j] - roots[i]).norm() < tol * roots[i].norm().max(1.0) {
                used[j] = true;
                sum += roots[j];
                count += 1;
            }
        }
        out.push((sum / count as f64, count));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn cubic_with_known_roots() {
        // (z − 1)(z − 2)(z + 3) = z³ − 7z + 6
        let roots = sorted_re(aberth(&[c(6.0), c(-7.0), c(0.0), c(1.0)]).unwrap());
        for (r, e) in roots.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((r - c(e)).norm() < 1e-12);
        }
    }

    #[test]
    fn double_root_clusters() {
        // z² exactly, and (z − 0.5)²(z + 1)
        let roots = aberth(&[c(0.0), c(0.0), c(1.0)]).unwrap();
        let cl = cluster(&roots, 1e-6);
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].1, 2);
        assert!(cl[0].0.norm() < 1e-7);

        let p = mul(&mul(&[c(-0.5), c(1.0)], &[c(-0.5), c(1.0)]), &[c(1.0), c(1.0)]);
        let cl = cluster(&aberth(&p).unwrap(), 1e-6);
        assert_eq!(cl.len(), 2);
        let double = cl.iter().find(|(_, m)| *m == 2).unwrap();
        assert!((double.0 - c(0.5)).norm() < 1e-7);
    }

    #[test]
    fn roots_of_unity() {
        let mut coeffs = vec![c(0.0); 8];
        coeffs[0] = c(-1.0);
        coeffs[7] = c(1.0);
        let roots = aberth(&coeffs).unwrap();
        for r in roots {
            assert!((r.norm() - 1.0).abs() < 1e-12);
            assert!((r.powi(7) - c(1.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn effective_degree_trims() {
        assert_eq!(effective_degree(&[c(1.0), c(2.0), c(1e-20)], 1e-14), Some(1));
        assert_eq!(effective_degree(&[c(0.0), c(0.0)], 1e-14), None);
    }

    #[test]
    fn horner_derivative() {
        let p = [c(1.0), c(-2.0), c(3.0)];
        let (v, d) = eval_with_derivative(&p, c(2.0));
        assert_eq!(v, c(9.0));
        assert_eq!(d, c(10.0));
    }
}
