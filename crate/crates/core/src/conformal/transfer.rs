#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::cells::{CellPartition, SphereGrid};
use crate::models::{Dynamics, SymbolicModel};
use crate::orbits::{backward_walk, WalkMode, CRITICAL_LOG_FLOOR};
use crate::potential::Potential;
use crate::sphere::{RationalMap, SpherePoint};
use crate::{quadrature, rng, Error, Result};

/// Length of the backward walks producing Julia points.
pub const JULIA_DEPTH: usize = 30;
/// Smallest accepted Julia cloud.
pub const MIN_JULIA_POINTS: usize = 1000;

/// Endpoint of the `index`-th uniform backward walk of length
/// [`JULIA_DEPTH`] from `anchor`.
pub fn julia_point<D: Dynamics>(f: &D, anchor: D::Point, seed: u64, index: u64) -> Result<D::Point> {
    let walk = backward_walk(f, anchor, JULIA_DEPTH, WalkMode::Uniform, rng::derive_seed(seed, index))?;
    Ok(walk.branch.last().copied().unwrap_or(anchor))
}

/// A cloud of points distributed by the measure of maximal entropy, from
/// backward walks anchored at the most repelling fixed point.
pub fn julia_support(f: &RationalMap, n_points: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    if n_points < MIN_JULIA_POINTS {
        return Err(Error::InvalidArgument("julia_support needs at least 1000 points"));
    }
    let anchor = f.repelling_fixed_point()?;
    (0..n_points as u64).map(|i| julia_point(f, anchor, seed, i)).collect()
}

/// Sparse nonnegative matrix of the discretized transfer operator, stored by
/// rows: `rows[i]` lists `(j, M(i, j))` with `j` ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub partition: CellPartition,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub t: f64,
    /// The potential's value when it is constant.
    pub phi_constant: Option<f64>,
    pub degree: usize,
}

impl TransferMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `(w M)_j = Σ_i w_i M(i, j)`, accumulated in row order.
    pub fn left_apply(&self, w: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.rows.len()];
        for (row, wi) in self.rows.iter().zip(w) {
            if *wi == 0.0 {
                continue;
            }
            for (j, v) in row {
                out[*j] += wi * v;
            }
        }
        out
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i].binary_search_by(|(k, _)| k.cmp(&j)).map_or(0.0, |p| self.rows[i][p].1)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|(_, v)| v).sum()
    }
}

/// Anything that can assemble a transfer matrix for given `(t, φ)`.
pub trait TransferModel {
    type Point;

    fn partition(&self) -> CellPartition;

    fn degree(&self) -> usize;

    fn assemble(&self, t: f64, phi: &dyn Potential<Self::Point>) -> Result<TransferMatrix>;
}

fn weight(mult: usize, log_deriv: f64, t: f64, phi: f64) -> f64 {
    let l = if t == 0.0 { 0.0 } else { t * log_deriv.max(CRITICAL_LOG_FLOOR) };
    mult as f64 * (-phi - l).exp()
}

/// Quadrature data for one cell of a symbolic partition: nodes `y`, their
/// weights (summing to one) and, per node, each preimage's target cell,
/// log-derivative and phase-space point.
#[derive(Debug, Clone)]
pub struct CellNodes<P> {
    pub weights: Vec<f64>,
    pub fibers: Vec<Vec<(usize, f64, P)>>,
}

/// Nodes for cell `i` of the `resolution`-cell symbolic partition. The
/// average inside the cell is taken against the model's reference measure,
/// by Gauss–Legendre quadrature in its distribution function.
pub fn symbolic_cell_nodes<M: SymbolicModel>(
    model: &M,
    resolution: usize,
    i: usize,
) -> CellNodes<<M::Dyn as Dynamics>::Point> {
    let sym = model.symbolic();
    let n = resolution as f64;
    let (lo, hi) = (i as f64 / n, (i + 1) as f64 / n);
    let (u0, u1) = (model.reference_cdf(lo), model.reference_cdf(hi));
    let cell = CellPartition::Symbolic { resolution, circle: sym.is_circle() }.symbolic_cell(i).unwrap();
    // Each inverse branch carries the whole cell into a single cell.
    let targets: Vec<usize> = (0..sym.branches())
        .map(|k| {
            let pre = sym.inverse_interval(k, &cell);
            let mid = 0.5 * (pre.lo_f64() + pre.hi_f64());
            ((mid * n).floor() as usize).min(resolution - 1)
        })
        .collect();
    let mut weights = Vec::with_capacity(8);
    let mut fibers = Vec::with_capacity(8);
    let span = u1 - u0;
    for (u, w) in quadrature::nodes(u0.min(u1), u0.max(u1)) {
        let y = model.reference_quantile(u).clamp(lo, hi);
        weights.push(w / span.abs());
        fibers.push(
            (0..sym.branches())
                .map(|k| {
                    let x = sym.inverse_f64(k, y);
                    (targets[k], model.log_deriv_at(x), model.realize(x))
                })
                .collect(),
        );
    }
    CellNodes { weights, fibers }
}

/// Transfer matrices on equal cells of the symbolic coordinate. For `z^d`
/// the entries are exact; for the tent-coded interval maps and the
/// quasicircles they are quadratures of the physical weights.
pub struct SymbolicTransfer<'a, M: SymbolicModel> {
    pub model: &'a M,
    pub resolution: usize,
    cells: Vec<CellNodes<<M::Dyn as Dynamics>::Point>>,
}

impl<'a, M: SymbolicModel> SymbolicTransfer<'a, M> {
    pub fn new(model: &'a M, resolution: usize) -> Result<Self> {
        Self::check_resolution(model, resolution)?;
        let cells = (0..resolution).map(|i| symbolic_cell_nodes(model, resolution, i)).collect();
        Ok(SymbolicTransfer { model, resolution, cells })
    }

    /// From cell data computed elsewhere (for instance in parallel), in cell order.
    pub fn from_cells(model: &'a M, resolution: usize, cells: Vec<CellNodes<<M::Dyn as Dynamics>::Point>>) -> Result<Self> {
        Self::check_resolution(model, resolution)?;
        if cells.len() != resolution {
            return Err(Error::InvalidArgument("one node set per cell"));
        }
        Ok(SymbolicTransfer { model, resolution, cells })
    }

    fn check_resolution(model: &M, resolution: usize) -> Result<()> {
        if resolution == 0 || resolution % model.symbolic().branches() != 0 {
            return Err(Error::InvalidArgument("resolution must be a positive multiple of the degree"));
        }
        Ok(())
    }
}

impl<'a, M: SymbolicModel> TransferModel for SymbolicTransfer<'a, M> {
    type Point = <M::Dyn as Dynamics>::Point;

    fn partition(&self) -> CellPartition {
        CellPartition::Symbolic { resolution: self.resolution, circle: self.model.symbolic().is_circle() }
    }

    fn degree(&self) -> usize {
        self.model.symbolic().branches()
    }

    fn assemble(&self, t: f64, phi: &dyn Potential<Self::Point>) -> Result<TransferMatrix> {
        let constant = phi.as_constant();
        let rows = self
            .cells
            .iter()
            .map(|cell| {
                let mut row: Vec<(usize, f64)> = Vec::with_capacity(self.degree());
                for (w, fiber) in cell.weights.iter().zip(&cell.fibers) {
                    for (j, l, x) in fiber {
                        let p = constant.unwrap_or_else(|| phi.value(x));
                        let v = w * weight(1, *l, t, p);
                        match row.iter_mut().find(|(k, _)| k == j) {
                            Some(e) => e.1 += v,
                            None => row.push((*j, v)),
                        }
                    }
                }
                row.sort_by_key(|e| e.0);
                row
            })
            .collect();
        Ok(TransferMatrix { partition: self.partition(), rows, t, phi_constant: constant, degree: self.degree() })
    }
}

/// One preimage of a sample: target cell (local index), multiplicity,
/// `log |Df|`, the point.
type FiberEntry = (usize, usize, f64, SpherePoint);

/// Transfer matrices on a sphere grid, built from a Julia cloud.
///
/// Cells holding cloud points are active, with up to `samples_per_cell`
/// samples each. Every preimage of a sample must fall in an active cell, so
/// cells first reached by a preimage are activated with that preimage as
/// their sample; this closure keeps each row's mass at exactly `d` when
/// `t = 0, φ = 0`.
#[derive(Debug, Clone)]
pub struct SphereTransfer {
    pub grid: SphereGrid,
    pub degree: usize,
    active: Vec<usize>,
    fibers: Vec<Vec<Vec<FiberEntry>>>,
}

impl SphereTransfer {
    pub fn build(f: &RationalMap, grid: SphereGrid, cloud: &[SpherePoint], samples_per_cell: usize) -> Result<Self> {
        Self::build_with(f, grid, cloud, samples_per_cell, |batch| batch.iter().map(|y| f.preimages(y)).collect())
    }

    /// As [`build`](Self::build), with preimages of each batch of samples
    /// supplied by `preimages` (results in batch order).
    pub fn build_with<B>(
        f: &RationalMap,
        grid: SphereGrid,
        cloud: &[SpherePoint],
        samples_per_cell: usize,
        mut preimages: B,
    ) -> Result<Self>
    where
        B: FnMut(&[SpherePoint]) -> Result<Vec<Vec<(SpherePoint, usize)>>>,
    {
        if samples_per_cell == 0 {
            return Err(Error::InvalidArgument("samples_per_cell must be positive"));
        }
        let mut samples: BTreeMap<usize, Vec<SpherePoint>> = BTreeMap::new();
        let mut pending: Vec<(usize, SpherePoint)> = Vec::new();
        let admit = |samples: &mut BTreeMap<usize, Vec<SpherePoint>>, p: SpherePoint, pending: &mut Vec<(usize, SpherePoint)>| {
            let g = grid.locate(&p);
            let s = samples.entry(g).or_default();
            if s.len() < samples_per_cell {
                s.push(p);
                pending.push((g, p));
            }
        };
        for p in cloud {
            admit(&mut samples, *p, &mut pending);
        }
        let mut raw: BTreeMap<usize, Vec<Vec<(usize, usize, f64, SpherePoint)>>> = BTreeMap::new();
        while !pending.is_empty() {
            let batch: Vec<SpherePoint> = pending.iter().map(|(_, p)| *p).collect();
            let fibers = preimages(&batch)?;
            let owners: Vec<usize> = pending.iter().map(|(g, _)| *g).collect();
            pending.clear();
            for (g, fiber) in owners.into_iter().zip(fibers) {
                let entry: Vec<(usize, usize, f64, SpherePoint)> =
                    fiber.iter().map(|(x, m)| (grid.locate(x), *m, f.log_spherical_derivative(x), *x)).collect();
                for (x, _) in &fiber {
                    if !samples.contains_key(&grid.locate(x)) {
                        admit(&mut samples, *x, &mut pending);
                    }
                }
                raw.entry(g).or_default().push(entry);
            }
        }
        let active: Vec<usize> = samples.keys().copied().collect();
        let local = |g: usize| active.binary_search(&g).expect("closure keeps preimages in active cells");
        let fibers = active
            .iter()
            .map(|g| {
                raw.get(g)
                    .map(|v| v.iter().map(|fib| fib.iter().map(|(h, m, l, x)| (local(*h), *m, *l, *x)).collect()).collect())
                    .unwrap_or_default()
            })
            .collect();
        Ok(SphereTransfer { grid, degree: f.degree(), active, fibers })
    }

    pub fn active_cells(&self) -> &[usize] {
        &self.active
    }
}

impl TransferModel for SphereTransfer {
    type Point = SpherePoint;

    fn partition(&self) -> CellPartition {
        CellPartition::Sphere { grid: self.grid, active: self.active.clone() }
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn assemble(&self, t: f64, phi: &dyn Potential<SpherePoint>) -> Result<TransferMatrix> {
        let constant = phi.as_constant();
        let mut rows = Vec::with_capacity(self.active.len());
        for (i, samples) in self.fibers.iter().enumerate() {
            if samples.is_empty() {
                return Err(Error::EmptyCell(i));
            }
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for fiber in samples {
                for (j, m, l, x) in fiber {
                    let p = constant.unwrap_or_else(|| phi.value(x));
                    *acc.entry(*j).or_insert(0.0) += weight(*m, *l, t, p);
                }
            }
            let n = samples.len() as f64;
            rows.push(acc.into_iter().map(|(j, v)| (j, v / n)).collect());
        }
        Ok(TransferMatrix { partition: self.partition(), rows, t, phi_constant: constant, degree: self.degree })
    }
}
