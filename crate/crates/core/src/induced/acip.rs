#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;

use super::build::InducedMarkovMap;
use crate::conformal::{CellMeasure, CellPartition};
use crate::models::{Angle, Interval, SymbolicModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcipConfig {
    /// Cells of the base.
    pub resolution: usize,
    /// Stop when successive Cesàro averages are this close in total variation.
    pub tv_tol: f64,
    pub max_sweeps: usize,
}

impl Default for AcipConfig {
    fn default() -> Self {
        AcipConfig { resolution: 1 << 10, tv_tol: 1e-8, max_sweeps: 200_000 }
    }
}

/// Invariant density of the induced map on equal cells of the base.
#[derive(Debug, Clone, PartialEq)]
pub struct AcipResult {
    pub base: Interval,
    /// Density with respect to the reference measure normalized on the base.
    pub density: Vec<f64>,
    /// Normalized reference mass of each cell.
    pub cell_masses: Vec<f64>,
    /// `ν(U_i)` for each branch, in branch order.
    pub branch_masses: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    /// The distortion constant `C₃` behind `lower = 1/C₃`, `upper = C₃`.
    pub c3: f64,
    pub sweeps: usize,
    pub last_tv: f64,
}

impl AcipResult {
    pub fn resolution(&self) -> usize {
        self.density.len()
    }

    /// Whether every cell density lies in `[lower, upper]` up to a relative slack.
    pub fn within_bounds(&self, slack: f64) -> bool {
        self.density.iter().all(|d| *d >= self.lower * (1.0 - slack) && *d <= self.upper * (1.0 + slack))
    }
}

fn cells_of(base: &Interval, resolution: usize) -> Vec<Interval> {
    let r = resolution as i128;
    (0..r).map(|k| Interval::new(base.lerp(Angle::new(k, r)), base.lerp(Angle::new(k + 1, r)))).collect()
}

/// Index range of the cells meeting `iv` (cells of equal length across `base`).
fn cell_range(base: &Interval, resolution: usize, iv: &Interval) -> core::ops::Range<usize> {
    let scale = resolution as f64 / base.len_f64();
    let lo = (((iv.lo_f64() - base.lo_f64()) * scale).floor() as isize - 1).max(0) as usize;
    let hi = ((((iv.hi_f64() - base.lo_f64()) * scale).ceil() as usize) + 1).min(resolution);
    lo..hi
}

/// The inverse of a branch as an exact affine map `θ ↦ aθ + b`.
fn inverse_affine(imap: &InducedMarkovMap, address: &[usize]) -> (Angle, Angle) {
    let g = |x: Angle| address.iter().fold(x, |acc, &k| imap.symbolic.inverse(k, &acc));
    let b = g(Angle::from_integer(0));
    (g(Angle::from_integer(1)) - b, b)
}

/// The invariant density of `ψ` as the Cesàro limit of the pushforwards
/// `ψ^i_* m` of the normalized reference measure, discretized on equal
/// cells of the base (mass is spread by reference measure inside each cell).
///
/// The bounds come from `C₃ = exp(D₁ Λ/(Λ − 1))`, with `D₁` the largest
/// sampled oscillation of the log-Jacobian of a branch and `Λ` the smallest
/// branch expansion.
pub fn folklore_acip<M: SymbolicModel>(model: &M, imap: &InducedMarkovMap, config: &AcipConfig) -> Result<AcipResult> {
    let n = config.resolution;
    if n == 0 {
        return Err(Error::InvalidArgument("resolution must be positive"));
    }
    let base = &imap.base;
    let cells = cells_of(base, n);
    let base_mass = model.reference_mass(base);
    let cell_mass: Vec<f64> = cells.iter().map(|c| model.reference_mass(c) / base_mass).collect();

    // rows[t] lists (s, fraction of cell s's mass that ψ sends into cell t).
    let mut rows: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); n];
    for b in &imap.branches {
        let (a, c) = inverse_affine(imap, &b.address);
        for (t, target) in cells.iter().enumerate() {
            let pre = Interval::new(a * target.lo + c, a * target.hi + c);
            for s in cell_range(base, n, &pre) {
                let lo = pre.lo.max(cells[s].lo);
                let hi = pre.hi.min(cells[s].hi);
                if lo < hi {
                    let frac = model.reference_mass(&Interval::new(lo, hi)) / base_mass / cell_mass[s];
                    rows[t].push((s, frac));
                }
            }
        }
    }

    let step = |mu: &[f64]| -> Vec<f64> {
        let mut out: Vec<f64> = rows.iter().map(|row| row.iter().map(|(s, f)| f * mu[*s]).sum()).collect();
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|x| *x /= total);
        out
    };
    let mut mu = cell_mass.clone();
    let mut sum = mu.clone();
    let mut avg = mu.clone();
    let mut sweeps = 1;
    let mut tv = f64::INFINITY;
    while sweeps < config.max_sweeps {
        mu = step(&mu);
        sweeps += 1;
        for (a, m) in sum.iter_mut().zip(&mu) {
            *a += m;
        }
        let next: Vec<f64> = sum.iter().map(|a| a / sweeps as f64).collect();
        tv = 0.5 * next.iter().zip(&avg).map(|(a, b)| (a - b).abs()).sum::<f64>();
        avg = next;
        if tv < config.tv_tol {
            break;
        }
    }
    if !(tv < config.tv_tol) {
        return Err(Error::NoConvergence { sweeps, residual: tv });
    }

    let density: Vec<f64> = avg.iter().zip(&cell_mass).map(|(a, m)| a / m).collect();
    let branch_masses = imap
        .branches
        .iter()
        .map(|b| {
            cell_range(base, n, &b.domain)
                .map(|s| {
                    let lo = b.domain.lo.max(cells[s].lo);
                    let hi = b.domain.hi.min(cells[s].hi);
                    if lo < hi {
                        avg[s] * model.reference_mass(&Interval::new(lo, hi)) / base_mass / cell_mass[s]
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect();
    let d1 = imap.branches.iter().map(|b| b.log_jacobian_oscillation).fold(0.0, f64::max);
    let lambda = imap.min_expansion();
    let c3 = if lambda > 1.0 { (d1 * lambda / (lambda - 1.0)).exp() } else { f64::INFINITY };
    Ok(AcipResult {
        base: base.clone(),
        density,
        cell_masses: cell_mass,
        branch_masses,
        lower: 1.0 / c3,
        upper: c3,
        c3,
        sweeps,
        last_tv: tv,
    })
}

/// The `f`-invariant measure generated by the induced map:
/// `ν̄ = Σ_i Σ_{j < n_i} f^j_* (ν|U_i)`, normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedMeasure {
    /// On `resolution` equal cells of the whole symbolic coordinate.
    pub carrier: CellMeasure,
    /// `Σ_i n_i ν(U_i)`.
    pub normalization: f64,
    /// Total variation between the carrier and its image under the map.
    pub invariance_residual: f64,
}

/// Pushes `ν` along every branch's intermediate images. Inside each base
/// cell, `ν` is spread uniformly in the symbolic coordinate.
pub fn generate_measure<M: SymbolicModel>(
    model: &M,
    imap: &InducedMarkovMap,
    nu: &AcipResult,
    resolution: usize,
) -> Result<GeneratedMeasure> {
    let sym = model.symbolic();
    if resolution == 0 || resolution % sym.branches() != 0 {
        return Err(Error::InvalidArgument("resolution must be a positive multiple of the degree"));
    }
    let base = &imap.base;
    let n = nu.resolution();
    let cells = cells_of(base, n);
    let mut weights = alloc::vec![0.0; resolution];
    let spread = |weights: &mut [f64], iv: &Interval, mass: f64| {
        let (lo, hi) = (iv.lo_f64(), iv.hi_f64());
        let len = hi - lo;
        let first = ((lo * resolution as f64).floor() as usize).min(resolution - 1);
        let mut k = first;
        while k < resolution {
            let a = (k as f64 / resolution as f64).max(lo);
            let b = ((k + 1) as f64 / resolution as f64).min(hi);
            if a >= hi {
                break;
            }
            if b > a {
                weights[k] += mass * (b - a) / len;
            }
            k += 1;
        }
    };
    let mut z = 0.0;
    for b in &imap.branches {
        for s in cell_range(base, n, &b.domain) {
            let lo = b.domain.lo.max(cells[s].lo);
            let hi = b.domain.hi.min(cells[s].hi);
            if lo >= hi {
                continue;
            }
            let mut piece = Interval::new(lo, hi);
            let mass = nu.density[s] * nu.cell_masses[s] * (piece.len_f64() / cells[s].len_f64());
            z += mass * b.return_time as f64;
            for j in 0..b.return_time {
                spread(&mut weights, &piece, mass);
                if j + 1 < b.return_time {
                    piece = sym.image(&piece).swap_remove(0);
                }
            }
        }
    }
    let carrier = CellMeasure::new(CellPartition::Symbolic { resolution, circle: sym.is_circle() }, weights)?;
    let invariance_residual = pushforward_tv(&carrier, sym.branches());
    Ok(GeneratedMeasure { carrier, normalization: z, invariance_residual })
}

/// `TV(f_* w, w)` for a measure on equal symbolic cells: each cell maps
/// affinely onto `d` consecutive cells.
fn pushforward_tv(m: &CellMeasure, d: usize) -> f64 {
    let r = m.weights.len();
    let circle = matches!(m.partition, CellPartition::Symbolic { circle: true, .. });
    let mut out = alloc::vec![0.0; r];
    for (i, w) in m.weights.iter().enumerate() {
        for k in 0..d {
            let target = if circle {
                (d * i + k) % r
            } else if 2 * i < r {
                2 * i + k
            } else {
                2 * (r - 1 - i) + k
            };
            out[target] += w / d as f64;
        }
    }
    0.5 * out.iter().zip(&m.weights).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Entropy of the generated measure by Abramov's formula:
/// `(−Σ ν(U_i) log ν(U_i)) / Σ n_i ν(U_i)`.
pub fn abramov_entropy(imap: &InducedMarkovMap, nu: &AcipResult) -> f64 {
    let mut h = 0.0;
    let mut mean_return = 0.0;
    for (b, m) in imap.branches.iter().zip(&nu.branch_masses) {
        if *m > 0.0 {
            h -= m * m.ln();
        }
        mean_return += b.return_time as f64 * m;
    }
    h / mean_return
}
