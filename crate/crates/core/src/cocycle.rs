//! The Jacobian cocycle along paired backward walks, the leaf density it
//! defines, and lower bounds for the density of an invariant measure.
//!
//! With `ψ = φ + t log|Df|` and `S_{-n}ψ(y) = Σ_{i=1}^{n} ψ(y_{-i})`, the
//! cocycle between two points of the same leaf is
//! `Φ(y, y′) = lim e^{S_{-n}ψ(y) − S_{-n}ψ(y′)}`: the ratio of the densities,
//! at `y′` and at `y`, of the conformal measure pushed forward along the
//! common history.

#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;

use crate::conformal::{CellMeasure, CellPartition};
use crate::models::{Dynamics, Interval, SymbolicMap, SymbolicModel};
use crate::orbits::BackwardWalk;
use crate::potential::{HolderData, Potential};
use crate::{rng, stats, Error, Result};

use rand::Rng as _;

/// Default tolerance on `|h − tχ − ∫φ dμ|`.
pub const PESIN_TOL: f64 = 5e-2;

#[derive(Debug, Clone)]
pub struct CocycleTrace<P> {
    pub base_walk: BackwardWalk<P>,
    pub probe_walk: BackwardWalk<P>,
    /// `S_{-k}ψ(y) − S_{-k}ψ(y′)` for `k = 1..=n`.
    pub partial_sums: Vec<f64>,
    /// Running sums of `|ψ(y_{-k}) − ψ(y′_{-k})|`.
    pub abs_sums: Vec<f64>,
    /// `Φ(y, y′)` at depth `n`.
    pub phi_limit: f64,
    /// Bound on the remaining terms from the observed contraction.
    pub tail_bound: f64,
    /// The certified bound on every absolute sum.
    pub budget: f64,
    /// Per-step contraction factor of the distance between the walks.
    pub contraction: f64,
}

/// `|t| log 2 + C (ρ₀|U|)^ε Σ_{i≥1} e^{−i(χ−η)ε}` with `η = χ/10`; `spread`
/// is the largest `σ(y_{-i}, y′_{-i}) e^{i(χ−η)}`, the empirical `ρ₀|U|`.
pub fn cocycle_budget(t: f64, holder: HolderData, spread: f64, chi: f64) -> f64 {
    let rate = 0.9 * chi * holder.exponent;
    let holder_part = if holder.constant == 0.0 {
        0.0
    } else if rate > 0.0 {
        holder.constant * spread.powf(holder.exponent) / rate.exp_m1()
    } else {
        f64::INFINITY
    };
    t.abs() * core::f64::consts::LN_2 + holder_part
}

/// Checks that `probe` takes, at every step, the preimage that `base` takes:
/// its point must be at most a quarter as far from the base point as any
/// other preimage of the base's previous point.
fn check_pairing<D: Dynamics>(f: &D, base: &BackwardWalk<D::Point>, probe: &BackwardWalk<D::Point>, n: usize) -> Result<()> {
    for k in 1..=n {
        let y = base.point(k);
        let fiber = f.preimages(&base.point(k - 1))?;
        let others = fiber
            .iter()
            .map(|(x, _)| f.distance(x, &y))
            .filter(|d| *d > 1e-12)
            .fold(f64::INFINITY, f64::min);
        if !(f.distance(&probe.point(k), &y) < 0.25 * others) {
            return Err(Error::CombinatoricsMismatch(k));
        }
    }
    Ok(())
}

/// The cocycle between the anchors of two walks with the same inverse
/// branches, to depth `n`.
#[allow(clippy::too_many_arguments)]
pub fn cocycle_trace<D: Dynamics>(
    f: &D,
    base: &BackwardWalk<D::Point>,
    probe: &BackwardWalk<D::Point>,
    t: f64,
    phi: &dyn Potential<D::Point>,
    holder: HolderData,
    chi: f64,
    n: usize,
) -> Result<CocycleTrace<D::Point>> {
    if n == 0 || base.len() < n || probe.len() < n {
        return Err(Error::InvalidArgument("walks shorter than the requested depth"));
    }
    if !(chi > 0.0) {
        return Err(Error::InvalidArgument("the Lyapunov exponent must be positive"));
    }
    check_pairing(f, base, probe, n)?;
    let psi = |x: &D::Point| phi.value(x) + t * f.log_deriv(x);
    let mut partial_sums = Vec::with_capacity(n);
    let mut abs_sums = Vec::with_capacity(n);
    let mut increments = Vec::with_capacity(n);
    let (mut s, mut a) = (0.0, 0.0);
    for k in 1..=n {
        let step = psi(&base.point(k)) - psi(&probe.point(k));
        s += step;
        a += step.abs();
        partial_sums.push(s);
        abs_sums.push(a);
        increments.push(step.abs());
    }

    let dists: Vec<f64> = (0..=n).map(|k| f.distance(&base.point(k), &probe.point(k))).collect();
    let spread = dists
        .iter()
        .enumerate()
        .map(|(i, d)| d * (0.9 * chi * i as f64).exp())
        .fold(0.0, f64::max);
    let budget = cocycle_budget(t, holder, spread, chi);
    if a > budget {
        return Err(Error::BudgetExceeded { sum: a, budget });
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) =
        dists.iter().enumerate().filter(|(_, d)| **d > 0.0).map(|(i, d)| (i as f64, d.ln())).unzip();
    let contraction = stats::linear_fit(&xs, &ys).map_or(0.0, |fit| fit.slope.exp());
    let last = increments.iter().rev().take(3).copied().fold(0.0, f64::max);
    let tail_bound = if last == 0.0 {
        0.0
    } else if contraction < 1.0 {
        last * contraction / (1.0 - contraction)
    } else {
        f64::INFINITY
    };
    Ok(CocycleTrace {
        base_walk: base.clone(),
        probe_walk: probe.clone(),
        phi_limit: s.exp(),
        partial_sums,
        abs_sums,
        tail_bound,
        budget,
        contraction,
    })
}

/// Entropy, exponent and mean potential of an invariant measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PesinData {
    pub entropy: f64,
    pub chi: f64,
    pub phi_mean: f64,
}

impl PesinData {
    /// `|h − tχ − ∫φ dμ|`.
    pub fn residual(&self, t: f64) -> f64 {
        (self.entropy - t * self.chi - self.phi_mean).abs()
    }
}

/// The cocycle-weighted density on a cylinder, relative to the normalized
/// conformal measure on it.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    /// Probe positions in the symbolic coordinate, at equal-mass quantiles.
    pub thetas: Vec<f64>,
    pub densities: Vec<f64>,
    /// Largest `|log Φ(y, z)|` over the probes.
    pub log_phi_bound: f64,
    /// Mean of `Φ(y, ·)` over the probes.
    pub normalization: f64,
}

impl DensityProfile {
    /// Quadrature of the density against the normalized conformal measure.
    pub fn integral(&self) -> f64 {
        stats::mean(&self.densities)
    }
}

/// Midpoints of `k` equal-mass strata of `m` restricted to `[a, b]`; the
/// mass is uniform inside each cell.
fn mass_quantiles(m: &CellMeasure, a: f64, b: f64, k: usize) -> Vec<f64> {
    let n = m.weights.len();
    let h = 1.0 / n as f64;
    let mut pieces = Vec::new();
    let first = ((a * n as f64).floor() as usize).min(n - 1);
    for i in first..n {
        let lo = (i as f64 * h).max(a);
        let hi = ((i + 1) as f64 * h).min(b);
        if lo >= b {
            break;
        }
        if hi > lo && m.weights[i] > 0.0 {
            pieces.push((lo, hi, m.weights[i] * (hi - lo) / h));
        }
    }
    let total: f64 = pieces.iter().map(|p| p.2).sum();
    let mut out = Vec::with_capacity(k);
    let (mut idx, mut before) = (0, 0.0);
    for j in 0..k {
        let target = (j as f64 + 0.5) / k as f64 * total;
        while idx + 1 < pieces.len() && before + pieces[idx].2 < target {
            before += pieces[idx].2;
            idx += 1;
        }
        let (lo, hi, w) = pieces[idx];
        out.push(lo + (hi - lo) * ((target - before) / w).clamp(0.0, 1.0));
    }
    out
}

/// Evaluates `Φ(y, z) / ∫ Φ(y, ·) dm_J` at `probes` points of the cylinder
/// `J`, along a random common history of length `depth`.
///
/// Only meaningful when the measure satisfies `h = tχ + ∫φ dμ`; a residual
/// above `tol` is refused.
#[allow(clippy::too_many_arguments)]
pub fn rohlin_density<M: SymbolicModel>(
    model: &M,
    cylinder: &Interval,
    m: &CellMeasure,
    t: f64,
    phi: &dyn Potential<<M::Dyn as Dynamics>::Point>,
    pesin: PesinData,
    tol: f64,
    probes: usize,
    depth: usize,
    seed: u64,
) -> Result<DensityProfile> {
    let residual = pesin.residual(t);
    if !(residual <= tol) {
        return Err(Error::HypothesisFailed { residual, tol });
    }
    if !matches!(m.partition, CellPartition::Symbolic { .. }) || probes == 0 {
        return Err(Error::InvalidArgument("needs a symbolic partition and at least one probe"));
    }
    let sym = model.symbolic();
    if !sym.laps().iter().any(|lap| lap.contains(cylinder)) {
        return Err(Error::InvalidArgument("the cylinder must lie inside one lap"));
    }
    let mut r = rng::rng(seed);
    let history: Vec<usize> = (0..depth).map(|_| r.gen_range(0..sym.branches())).collect();
    let backward_sum = |theta: f64| {
        let mut x = theta;
        let mut s = 0.0;
        for &k in &history {
            x = sym.inverse_f64(k, x);
            let p = model.realize(x);
            s += phi.value(&p) + t * model.dynamics().log_deriv(&p);
        }
        s
    };
    let thetas = mass_quantiles(m, cylinder.lo_f64(), cylinder.hi_f64(), probes);
    let sums: Vec<f64> = thetas.iter().map(|&z| backward_sum(z)).collect();
    let log_phi: Vec<f64> = sums.iter().map(|s| sums[0] - s).collect();
    let phis: Vec<f64> = log_phi.iter().map(|l| l.exp()).collect();
    let normalization = stats::mean(&phis);
    Ok(DensityProfile {
        densities: phis.iter().map(|p| p / normalization).collect(),
        thetas,
        log_phi_bound: log_phi.iter().map(|l| l.abs()).fold(0.0, f64::max),
        normalization,
    })
}

/// Smallest `n` with `f^n(base)` covering everything, computed exactly.
pub fn eventually_onto(sym: SymbolicMap, base: &Interval, max_n: usize) -> Option<usize> {
    let mut pieces = alloc::vec![base.clone()];
    for n in 0..=max_n {
        if pieces.len() == 1 && pieces[0] == Interval::unit() {
            return Some(n);
        }
        let next: Vec<Interval> = pieces.iter().flat_map(|p| sym.image(p)).collect();
        pieces = crate::models::merge_intervals(next);
    }
    None
}

/// Cells of a symbolic partition lying inside an interval.
pub fn cells_inside(m: &CellMeasure, base: &Interval) -> Vec<usize> {
    (0..m.weights.len())
        .filter(|&i| m.partition.symbolic_cell(i).is_some_and(|c| base.contains(&c)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityFloor {
    /// Smallest density ratio over the base cells carrying reference mass.
    pub epsilon: f64,
    /// The floor propagates to the whole space.
    pub global: bool,
}

/// `ε = min μ̂/m̂` over base cells with `m̂` above `mass_floor`. For `t ≥ 0`
/// and a base some iterate of which covers everything (`onto_steps`), a
/// positive floor holds everywhere.
pub fn density_floor(
    m: &CellMeasure,
    mu_hat: &CellMeasure,
    base_cells: &[usize],
    mass_floor: f64,
    t: f64,
    onto_steps: Option<usize>,
) -> Result<DensityFloor> {
    if m.partition != mu_hat.partition {
        return Err(Error::InvalidArgument("measures must share a partition"));
    }
    let epsilon = base_cells
        .iter()
        .filter(|&&i| m.weights[i] > mass_floor)
        .map(|&i| mu_hat.weights[i] / m.weights[i])
        .fold(f64::INFINITY, f64::min);
    let epsilon = if epsilon.is_finite() { epsilon } else { 0.0 };
    Ok(DensityFloor { epsilon, global: epsilon > 0.0 && t >= 0.0 && onto_steps.is_some() })
}
