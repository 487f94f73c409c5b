#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;

use super::cells::CellMeasure;
use super::transfer::{TransferMatrix, TransferModel};
use crate::potential::Potential;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenConfig {
    /// Target `‖wM − λw‖₁` for the normalized eigenmeasure.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig { tol: 1e-8, max_sweeps: 10_000 }
    }
}

/// The Perron pair of a transfer matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingPair {
    pub eigenvalue: f64,
    pub measure: CellMeasure,
    pub residual: f64,
    pub sweeps: usize,
    /// More than 99% of the mass sits on at most `2d − 2` cells: the
    /// eigenmeasure looks like the atomic measure on an exceptional set.
    pub exceptional_support: bool,
}

/// Power iteration for the left Perron vector. Each sweep averages the
/// current vector with its normalized image, which removes any periodic
/// part of the spectrum without moving the fixed point.
pub fn leading_pair(m: &TransferMatrix, config: &EigenConfig) -> Result<LeadingPair> {
    let n = m.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty transfer matrix"));
    }
    let mut w = alloc::vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for sweep in 1..=config.max_sweeps {
        let image = m.left_apply(&w);
        let lambda = image.iter().sum::<f64>();
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::NoConvergence { sweeps: sweep, residual: f64::NAN });
        }
        residual = image.iter().zip(&w).map(|(a, b)| (a - lambda * b).abs()).sum::<f64>() / lambda;
        if residual < config.tol {
            let measure = CellMeasure::new(m.partition.clone(), w)?;
            let exceptional_support = concentrated(&measure.weights, 2 * m.degree.saturating_sub(1));
            return Ok(LeadingPair { eigenvalue: lambda, measure, residual, sweeps: sweep, exceptional_support });
        }
        for (wi, v) in w.iter_mut().zip(&image) {
            *wi = 0.5 * (*wi + v / lambda);
        }
    }
    Err(Error::NoConvergence { sweeps: config.max_sweeps, residual })
}

fn concentrated(weights: &[f64], k: usize) -> bool {
    let mut sorted: Vec<f64> = weights.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.iter().take(k.max(1)).sum::<f64>() > 0.99
}

/// One point of a pressure curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PressurePoint {
    pub t: f64,
    pub pressure: f64,
    pub residual: f64,
    /// `t < 0`: reported, but outside the range where the pressure has the
    /// intended meaning.
    pub formal: bool,
    pub pair: LeadingPair,
}

/// `P(t) = log λ(t)` for one value of `t`.
pub fn pressure_at<T: TransferModel>(
    model: &T,
    t: f64,
    phi: &dyn Potential<T::Point>,
    config: &EigenConfig,
) -> Result<PressurePoint> {
    let m = model.assemble(t, phi)?;
    let pair = leading_pair(&m, config)?;
    Ok(PressurePoint { t, pressure: pair.eigenvalue.ln(), residual: pair.residual, formal: t < 0.0, pair })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureCurve {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub formal: Vec<bool>,
}

impl PressureCurve {
    pub fn from_points(points: &[PressurePoint]) -> Self {
        PressureCurve {
            ts: points.iter().map(|p| p.t).collect(),
            values: points.iter().map(|p| p.pressure).collect(),
            residuals: points.iter().map(|p| p.residual).collect(),
            formal: points.iter().map(|p| p.formal).collect(),
        }
    }

    /// Midpoint convexity on consecutive triples, up to `slack`, allowing
    /// uneven spacing.
    pub fn is_convex(&self, slack: f64) -> bool {
        self.ts.windows(3).zip(self.values.windows(3)).all(|(t, p)| {
            let s = (t[1] - t[0]) / (t[2] - t[0]);
            p[1] <= (1.0 - s) * p[0] + s * p[2] + slack
        })
    }

    pub fn is_decreasing(&self, slack: f64) -> bool {
        self.values.windows(2).all(|p| p[1] < p[0] + slack)
    }
}

/// Pressure over an ascending grid of `t`.
pub fn pressure_curve<T: TransferModel>(
    model: &T,
    ts: &[f64],
    phi: &dyn Potential<T::Point>,
    config: &EigenConfig,
) -> Result<PressureCurve> {
    if ts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("t grid must be strictly ascending"));
    }
    let points: Vec<PressurePoint> = ts.iter().map(|&t| pressure_at(model, t, phi, config)).collect::<Result<_>>()?;
    Ok(PressureCurve::from_points(&points))
}

/// The zero of `t ↦ P(t)` inside `bracket`, by bisection until
/// `|P(t)| < tol`.
pub fn pressure_zero<T: TransferModel>(
    model: &T,
    phi: &dyn Potential<T::Point>,
    bracket: (f64, f64),
    tol: f64,
    config: &EigenConfig,
) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    let p_lo = pressure_at(model, lo, phi, config)?.pressure;
    let p_hi = pressure_at(model, hi, phi, config)?.pressure;
    if !(p_lo > 0.0 && p_hi < 0.0) {
        return Err(Error::BracketInvalid { lo, hi, p_lo, p_hi });
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..100 {
        mid = 0.5 * (lo + hi);
        let p = pressure_at(model, mid, phi, config)?.pressure;
        if p.abs() < tol || hi - lo < 1e-14 {
            break;
        }
        if p > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::SymbolicTransfer;
    use crate::models::{CircleModel, IntervalModel};
    use crate::potential::ConstPotential;
    use core::f64::consts::LN_2;

    #[test]
    fn doubling_eigenvalues() {
        let m = CircleModel::new(2).unwrap();
        let st = SymbolicTransfer::new(&m, 256).unwrap();
        let cfg = EigenConfig::default();
        for (t, phi, expected) in [(0.0, 0.0, 2.0), (1.0, 0.0, 1.0), (0.0, LN_2, 1.0)] {
            let pair = leading_pair(&st.assemble(t, &ConstPotential(phi)).unwrap(), &cfg).unwrap();
            assert!((pair.eigenvalue - expected).abs() < 1e-6);
            for w in &pair.measure.weights {
                assert!((w - 1.0 / 256.0).abs() < 1e-9);
            }
            assert!(!pair.exceptional_support);
        }
    }

    #[test]
    fn tripling_pressure_line() {
        let m = CircleModel::new(3).unwrap();
        let st = SymbolicTransfer::new(&m, 243).unwrap();
        let curve = pressure_curve(&st, &[-1.0, 0.0, 0.5, 1.0, 2.0], &ConstPotential(0.0), &EigenConfig::default()).unwrap();
        for (t, p) in curve.ts.iter().zip(&curve.values) {
            assert!((p - (1.0 - t) * 3f64.ln()).abs() < 1e-9);
        }
        assert_eq!(curve.formal, [true, false, false, false, false]);
        assert!(curve.is_convex(1e-2) && curve.is_decreasing(0.0));
    }

    #[test]
    fn zeros_of_the_pressure() {
        let cfg = EigenConfig::default();
        let m = CircleModel::new(2).unwrap();
        let st = SymbolicTransfer::new(&m, 64).unwrap();
        let t0 = pressure_zero(&st, &ConstPotential(0.0), (0.5, 1.5), 1e-9, &cfg).unwrap();
        assert!((t0 - 1.0).abs() < 1e-6);
        let err = pressure_zero(&st, &ConstPotential(0.0), (0.0, 0.5), 1e-9, &cfg).unwrap_err();
        assert!(matches!(err, Error::BracketInvalid { .. }));

        let cheb = IntervalModel::chebyshev();
        let it = SymbolicTransfer::new(&cheb, 512).unwrap();
        let t0 = pressure_zero(&it, &ConstPotential(0.0), (0.5, 1.5), 1e-6, &cfg).unwrap();
        assert!((t0 - 1.0).abs() < 3e-2, "{t0}");
    }

    #[test]
    fn concentrated_mass_is_flagged() {
        assert!(concentrated(&[0.995, 0.005, 0.0], 2));
        assert!(!concentrated(&[0.5, 0.3, 0.2], 2));
    }
}
