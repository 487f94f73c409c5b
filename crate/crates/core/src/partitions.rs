//! Cylinder trees of first-entry pullbacks of a base interval, the greedy
//! distribution of cylinders into at most `d + 1` classes on which the map
//! is injective, and coding of orbits by those classes.

#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::Rng as _;

use crate::induced::InducedMarkovMap;

use crate::models::{coordinate_distance, Interval, SymbolicMap, SymbolicModel};
use crate::{rng, Error, Result};

/// Distance in the symbolic coordinate below which a point counts as lying
/// on a cylinder boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// A cylinder: the base (node 0) or a component of `f^{-n}(U)` whose points
/// first enter the base at time `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub interval: Interval,
    /// Inverse branches taking the base to this cylinder, first applied first.
    pub address: Vec<usize>,
    /// `n_Q`: `f^{n_Q}(Q) = U`.
    pub return_time: usize,
    /// The cylinder equal to `f(Q)`; `None` for the base.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderTree {
    pub symbolic: SymbolicMap,
    /// Node 0 is the base; the rest are ordered by (return time, left endpoint).
    pub nodes: Vec<Cylinder>,
    pub depth: usize,
    /// Pullbacks straddling the base boundary, left out of the tree.
    pub straddling: usize,
}

impl CylinderTree {
    pub fn base(&self) -> &Interval {
        &self.nodes[0].interval
    }

    /// The cylinder containing `θ`, if any.
    pub fn locate(&self, theta: f64) -> Option<usize> {
        self.nodes.iter().position(|n| n.interval.contains_f64(theta))
    }

    /// `f(Q)` is exactly the parent cylinder, and distinct cylinders are
    /// disjoint. Exact interval arithmetic.
    pub fn verify(&self) -> bool {
        let images_ok = self.nodes.iter().skip(1).all(|q| {
            let img = self.symbolic.image(&q.interval);
            q.parent.is_some_and(|p| p < self.nodes.len() && img.len() == 1 && img[0] == self.nodes[p].interval)
                && self.nodes[q.parent.unwrap()].return_time + 1 == q.return_time
        });
        let mut ivs: Vec<&Interval> = self.nodes.iter().map(|n| &n.interval).collect();
        ivs.sort_by(|a, b| a.lo.cmp(&b.lo));
        images_ok && ivs.windows(2).all(|w| w[0].hi <= w[1].lo)
    }
}

/// The tree of first-entry pullbacks of the induced map's base, to the given
/// depth.
pub fn build_cylinder_tree(imap: &InducedMarkovMap, depth: usize) -> CylinderTree {
    let sym = imap.symbolic;
    let base = imap.base.clone();
    let mut nodes = alloc::vec![Cylinder { interval: base.clone(), address: Vec::new(), return_time: 0, parent: None }];
    let mut straddling = 0;
    let mut frontier = alloc::vec![0usize];
    for n in 1..=depth {
        let mut level: Vec<Cylinder> = Vec::new();
        for &p in &frontier {
            for k in 0..sym.branches() {
                let w = sym.inverse_interval(k, &nodes[p].interval);
                if base.contains(&w) {
                    continue;
                }
                if base.meets(&w) {
                    straddling += 1;
                    continue;
                }
                let mut address = nodes[p].address.clone();
                address.push(k);
                level.push(Cylinder { interval: w, address, return_time: n, parent: Some(p) });
            }
        }
        level.sort_by(|a, b| a.interval.lo.cmp(&b.interval.lo));
        let start = nodes.len();
        nodes.extend(level);
        frontier = (start..nodes.len()).collect();
        if frontier.is_empty() {
            break;
        }
    }
    CylinderTree { symbolic: sym, nodes, depth, straddling }
}

/// Classes `P_0, …, P_d` of cylinder indices; `P_0 = {base}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePartition {
    pub classes: Vec<Vec<usize>>,
    pub degree: usize,
    /// `class_of[q]` for every cylinder.
    pub class_of: Vec<usize>,
}

/// Outcome of the exact checks of a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionCheck {
    pub at_most_d_plus_one: bool,
    pub base_alone: bool,
    pub injective: bool,
    pub last_avoids_base_image: bool,
    pub each_cylinder_once: bool,
}

impl PartitionCheck {
    pub fn all(&self) -> bool {
        self.at_most_d_plus_one && self.base_alone && self.injective && self.last_avoids_base_image && self.each_cylinder_once
    }
}

/// Distributes the cylinders level by level. For each cylinder `Q` of
/// return time `n` not yet placed, the unplaced cylinders of the same level
/// whose images meet `f(Q)` are taken in tree order and each is put in the
/// lowest class `i ≥ 1`, above the previous one's, whose image is disjoint
/// from its own.
///
/// Distinct cylinders are disjoint and `f(Q)` is the parent cylinder, so two
/// images meet exactly when the parents coincide.
pub fn distribute(tree: &CylinderTree, degree: usize) -> Result<FinitePartition> {
    let mut classes: Vec<Vec<usize>> = alloc::vec![Vec::new(); degree + 1];
    let mut class_of = alloc::vec![usize::MAX; tree.nodes.len()];
    let mut parents_in: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); degree + 1];
    classes[0].push(0);
    class_of[0] = 0;
    for q in 1..tree.nodes.len() {
        if class_of[q] != usize::MAX {
            continue;
        }
        let parent = tree.nodes[q].parent.expect("non-base cylinders have parents");
        let group: Vec<usize> = (q..tree.nodes.len())
            .filter(|&r| {
                class_of[r] == usize::MAX
                    && tree.nodes[r].return_time == tree.nodes[q].return_time
                    && tree.nodes[r].parent == Some(parent)
            })
            .collect();
        let mut floor = 0;
        for r in group {
            let slot = (floor + 1..=degree).find(|&i| !parents_in[i].contains(&parent));
            let Some(i) = slot else {
                return Err(Error::AssignmentOverflow { node: r, degree });
            };
            classes[i].push(r);
            parents_in[i].insert(parent);
            class_of[r] = i;
            floor = i;
        }
    }
    Ok(FinitePartition { classes, degree, class_of })
}

fn pairwise_disjoint(mut pieces: Vec<Interval>) -> bool {
    pieces.sort_by(|a, b| a.lo.cmp(&b.lo));
    pieces.windows(2).all(|w| w[0].hi <= w[1].lo)
}

impl FinitePartition {
    /// Exact verification of the defining properties.
    pub fn verify(&self, tree: &CylinderTree) -> PartitionCheck {
        let sym = tree.symbolic;
        let laps = sym.laps();
        let base_image = sym.image(tree.base());
        let at_most_d_plus_one = self.classes.len() <= self.degree + 1;
        let base_alone = self.classes.first().is_some_and(|c| c.as_slice() == [0]);
        let injective = self.classes.iter().all(|class| {
            class.iter().all(|&q| laps.iter().any(|lap| lap.contains(&tree.nodes[q].interval)))
                && pairwise_disjoint(class.iter().flat_map(|&q| sym.image(&tree.nodes[q].interval)).collect())
        });
        let last_avoids_base_image = self.classes.last().is_some_and(|class| {
            class.iter().all(|&q| {
                let img = sym.image(&tree.nodes[q].interval);
                !img.iter().any(|a| base_image.iter().any(|b| a.meets(b)))
            })
        });
        let mut counts = alloc::vec![0usize; tree.nodes.len()];
        for class in &self.classes {
            for &q in class {
                if q < counts.len() {
                    counts[q] += 1;
                }
            }
        }
        let each_cylinder_once = counts.iter().all(|c| *c == 1);
        PartitionCheck { at_most_d_plus_one, base_alone, injective, last_avoids_base_image, each_cylinder_once }
    }

    /// Class of the cylinder containing `θ`. A point closer than
    /// [`BOUNDARY_TOL`] to a cylinder boundary whose neighbour lies in
    /// another class is ambiguous.
    pub fn classify(&self, tree: &CylinderTree, theta: f64, step: usize) -> Result<usize> {
        let circle = tree.symbolic.is_circle();
        let wrap = |x: f64| if circle { x - x.floor() } else { x };
        let q = tree.locate(theta).ok_or(Error::Unassigned(step))?;
        let class = self.class_of[q];
        let iv = &tree.nodes[q].interval;
        for (edge, side) in [(iv.lo_f64(), -1.0), (iv.hi_f64(), 1.0)] {
            if coordinate_distance(theta, edge, circle) < BOUNDARY_TOL {
                let probe = wrap(edge + side * BOUNDARY_TOL);
                let other = if circle || (0.0..=1.0).contains(&probe) { tree.locate(probe) } else { Some(q) };
                if other.map(|o| self.class_of[o]) != Some(class) {
                    return Err(Error::BoundaryAmbiguity(step));
                }
            }
        }
        Ok(class)
    }
}

/// Codes the orbit `θ, f(θ), …` (symbolic coordinates, `len` points) by
/// partition classes.
pub fn refine_and_code(tree: &CylinderTree, partition: &FinitePartition, theta: f64, len: usize) -> Result<Vec<u8>> {
    let mut x = theta;
    let mut out = Vec::with_capacity(len);
    for step in 0..len {
        out.push(partition.classify(tree, x, step)? as u8);
        x = tree.symbolic.forward_f64(x);
    }
    Ok(out)
}

/// Block entropy difference `H_{k+1} − H_k` of codes of `samples` short
/// orbits started at reference-distributed points; orbits that leave the
/// tree or hit a boundary are skipped.
pub fn code_entropy<M: SymbolicModel>(
    model: &M,
    tree: &CylinderTree,
    partition: &FinitePartition,
    block: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut short: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut long: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut used = 0usize;
    for i in 0..samples as u64 {
        let mut r = rng::stream(seed, i);
        let theta = model.reference_quantile(r.gen::<f64>());
        match refine_and_code(tree, partition, theta, block + 1) {
            Ok(code) => {
                *short.entry(code[..block].to_vec()).or_insert(0) += 1;
                *long.entry(code).or_insert(0) += 1;
                used += 1;
            }
            Err(Error::Unassigned(_)) | Err(Error::BoundaryAmbiguity(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(Error::InvalidArgument("no orbit could be coded"));
    }
    let h = |counts: &BTreeMap<Vec<u8>, usize>| {
        counts.values().map(|&c| {
            let p = c as f64 / used as f64;
            -p * p.ln()
        }).sum::<f64>()
    };
    Ok(h(&long) - h(&short))
}

/// For each depth `k ≤ max_depth`, the largest symbolic distance between two
/// points whose codes agree to depth `k`, over `pairs` random pairs at
/// log-uniform separations.
pub fn separation_check<M: SymbolicModel>(
    model: &M,
    tree: &CylinderTree,
    partition: &FinitePartition,
    max_depth: usize,
    pairs: usize,
    seed: u64,
) -> Vec<f64> {
    let circle = tree.symbolic.is_circle();
    let mut worst = alloc::vec![0.0f64; max_depth + 1];
    for i in 0..pairs as u64 {
        let mut r = rng::stream(seed, i);
        let x = model.reference_quantile(r.gen::<f64>());
        let gap = 10f64.powf(-12.0 + 11.0 * r.gen::<f64>());
        let mut y = x + if r.gen::<bool>() { gap } else { -gap };
        if circle {
            y -= y.floor();
        } else if !(0.0..1.0).contains(&y) {
            continue;
        }
        let (Ok(a), Ok(b)) = (
            refine_and_code(tree, partition, x, max_depth + 1),
            refine_and_code(tree, partition, y, max_depth + 1),
        ) else {
            continue;
        };
        let agree = a.iter().zip(&b).take_while(|(p, q)| p == q).count();
        let d = coordinate_distance(x, y, circle);
        for w in worst.iter_mut().take(agree) {
            *w = w.max(d);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::induced::{build_first_return, InducedConfig};
    use crate::models::{CircleModel, IntervalModel};
    use core::f64::consts::LN_2;

    fn doubling_tree(depth: usize) -> (CircleModel, CylinderTree) {
        let m = CircleModel::new(2).unwrap();
        let imap = build_first_return(&m, &Interval::from_ratios((0, 1), (1, 2)), &InducedConfig::default()).unwrap();
        let tree = build_cylinder_tree(&imap, depth);
        (m, tree)
    }

    #[test]
    fn doubling_tree_is_dyadic() {
        let (_, tree) = doubling_tree(3);
        let times: Vec<usize> = tree.nodes.iter().map(|n| n.return_time).collect();
        assert_eq!(times, [0, 1, 2, 3]);
        assert_eq!(tree.nodes[3].interval, Interval::from_ratios((7, 8), (15, 16)));
        assert!(tree.verify());
        let (_, root) = doubling_tree(0);
        assert_eq!(root.nodes.len(), 1);
        let p = distribute(&root, 2).unwrap();
        assert_eq!(p.classes, [alloc::vec![0], alloc::vec![], alloc::vec![]]);
    }

    #[test]
    fn doubling_partition_and_codes() {
        let (m, tree) = doubling_tree(30);
        let p = distribute(&tree, 2).unwrap();
        assert_eq!(p.classes.len(), 3);
        assert!(p.verify(&tree).all());
        // 1/5 = 0.0011 0011 … in base 2; every point off the base lies in class 1.
        let code = refine_and_code(&tree, &p, 0.2, 12).unwrap();
        assert_eq!(code, [0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1]);
        assert_eq!(refine_and_code(&tree, &p, 0.5, 1), Err(Error::BoundaryAmbiguity(0)));
        let h = code_entropy(&m, &tree, &p, 8, 20_000, 1).unwrap();
        assert!((h - LN_2).abs() < 3e-2 && h <= 3f64.ln());
        let sep = separation_check(&m, &tree, &p, 10, 20_000, 2);
        for (k, d) in sep.iter().enumerate() {
            assert!(*d <= 0.5f64.powi(k as i32), "{k}: {d}");
        }
    }

    #[test]
    fn tripling_fixed_point_codes_constantly() {
        let m = CircleModel::new(3).unwrap();
        let imap = build_first_return(&m, &Interval::from_ratios((1, 3), (2, 3)), &InducedConfig { n_max: 14, fullness_tol: 1e-2, ..InducedConfig::default() }).unwrap();
        let tree = build_cylinder_tree(&imap, 10);
        let p = distribute(&tree, 3).unwrap();
        assert!(p.verify(&tree).all());
        assert_eq!(refine_and_code(&tree, &p, 0.5, 6).unwrap(), [0; 6]);
    }

    #[test]
    fn chebyshev_partition() {
        let m = IntervalModel::chebyshev();
        let imap = build_first_return(&m, &Interval::from_ratios((1, 4), (1, 2)), &InducedConfig::default()).unwrap();
        let tree = build_cylinder_tree(&imap, 4);
        for q in &tree.nodes {
            // Tent cylinders: pullbacks of a quarter have length 2^{-n}/4 and dyadic endpoints.
            assert_eq!(q.interval.len(), crate::models::Angle::new(1, 4 << q.return_time));
            assert!(*q.interval.lo.denom() <= 4 << q.return_time);
        }
        assert!(tree.verify());
        let p = distribute(&tree, 2).unwrap();
        assert!(p.verify(&tree).all());
        let deep = build_cylinder_tree(&imap, 10);
        let p = distribute(&deep, 2).unwrap();
        assert!(p.verify(&deep).all());
    }
}
