#[allow(unused_imports)]
use num_traits::Float as _;
use alloc::vec::Vec;

use crate::models::{angle_to_f64, Angle, Interval, SymbolicMap, SymbolicModel};
use crate::stats::linear_fit;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedConfig {
    /// Deepest return time explored.
    pub n_max: usize,
    /// Largest accepted unassigned fraction of the base.
    pub fullness_tol: f64,
    /// Live nodes lighter than this (relative to the base) are dropped.
    pub prune_mass: f64,
    /// Cap on live nodes per level; exploration stops at the level that exceeds it.
    pub max_live: usize,
    /// Sample points per branch for expansion estimates.
    pub samples: usize,
    /// Factor applied to sampled minima before certifying.
    pub safety: f64,
}

impl Default for InducedConfig {
    fn default() -> Self {
        InducedConfig { n_max: 40, fullness_tol: 1e-3, prune_mass: 1e-12, max_live: 1 << 14, samples: 16, safety: 0.9 }
    }
}

/// One branch `ψ = f^n : U_i → U` of the induced map.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub domain: Interval,
    pub return_time: usize,
    /// Sampled minimum of `|Df^n|` on the domain.
    pub expansion: f64,
    /// `step_derivs[j − 1]`: sampled minimum of `|Df^j|` on `f^{n−j}(U_i)`.
    pub step_derivs: Vec<f64>,
    /// Indices of the inverse branches taking `U` to `U_i`, first applied first.
    pub address: Vec<usize>,
    /// `chain[j] = f^j(U_i)` for `j < n`.
    pub chain: Vec<Interval>,
    /// Return order at which `safety · |Dψ| > 2` was certified (1 or 2).
    pub certified_order: usize,
    /// `V_i`: the pullback of the extension `V` along the same inverse branches.
    pub extension: Interval,
    pub extension_in_base: bool,
    /// Sampled oscillation of `log` of the Jacobian of `ψ` with respect to
    /// the reference measure.
    pub log_jacobian_oscillation: f64,
    /// Reference mass of the domain, as a fraction of the base.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InducedMarkovMap {
    pub base: Interval,
    pub extension: Interval,
    pub symbolic: SymbolicMap,
    pub branches: Vec<Branch>,
    /// `C` and `δ` with `step_derivs[j−1] > C e^{δ j}` for every branch.
    pub c: f64,
    pub delta: f64,
    /// Reference mass of the base not covered by branches, as a fraction.
    pub unassigned: f64,
    pub n_max: usize,
    /// Deepest level actually explored.
    pub depth_reached: usize,
}

fn dilate(base: &Interval, circle: bool) -> Interval {
    let two = Angle::from_integer(2);
    let half = base.len() / two;
    let mid = (base.lo + base.hi) / two;
    let (lo, hi) = (mid - half * two, mid + half * two);
    if circle {
        if base.len() * two >= Angle::from_integer(1) {
            Interval::new(mid - Angle::new(1, 2), mid + Angle::new(1, 2))
        } else {
            Interval::new(lo, hi)
        }
    } else {
        Interval::new(lo.max(Angle::from_integer(0)), hi.min(Angle::from_integer(1)))
    }
}

fn pull_back(sym: &SymbolicMap, iv: &Interval, address: &[usize]) -> Interval {
    address.iter().fold(iv.clone(), |acc, &k| sym.inverse_interval(k, &acc))
}

struct Node {
    interval: Interval,
    address: Vec<usize>,
}

/// Enumerates the first-return branches of the model's map to `base`,
/// breadth first on the tree of inverse images of the base: nodes disjoint
/// from the base are explored further, nodes inside it become branches, and
/// nodes straddling its boundary are left unassigned. Branches are ordered
/// by `(return time, left endpoint)`.
pub fn build_first_return<M: SymbolicModel>(model: &M, base: &Interval, config: &InducedConfig) -> Result<InducedMarkovMap> {
    let sym = model.symbolic();
    let unit = Interval::unit();
    if !unit.contains(base) || base.len() <= Angle::from_integer(0) {
        return Err(Error::InvalidArgument("base must be a nonempty subinterval of [0, 1]"));
    }
    let base_mass = model.reference_mass(base);
    let extension = dilate(base, sym.is_circle());
    let (t_ref, phi_ref) = model.reference_pair();

    let mut raw: Vec<Branch> = Vec::new();
    let mut level: Vec<Node> = alloc::vec![Node { interval: base.clone(), address: Vec::new() }];
    let mut depth_reached = 0;
    for n in 1..=config.n_max {
        let mut next = Vec::new();
        for node in &level {
            for k in 0..sym.branches() {
                let w = sym.inverse_interval(k, &node.interval);
                let mut address = node.address.clone();
                address.push(k);
                if base.contains(&w) {
                    raw.push(describe(model, base, &extension, w, address, n, config, t_ref, phi_ref, base_mass));
                } else if !base.meets(&w) && model.reference_mass(&w) / base_mass > config.prune_mass {
                    next.push(Node { interval: w, address });
                }
            }
        }
        depth_reached = n;
        level = next;
        if level.is_empty() || level.len() > config.max_live {
            break;
        }
    }
    raw.sort_by(|a, b| a.return_time.cmp(&b.return_time).then(a.domain.lo.cmp(&b.domain.lo)));

    let covered: f64 = raw.iter().map(|b| b.mass).sum();
    let unassigned = (1.0 - covered).max(0.0);
    if unassigned > config.fullness_tol {
        return Err(Error::MassDeficit { unassigned, tol: config.fullness_tol });
    }

    let min_expansion = raw.iter().map(|b| config.safety * b.expansion).fold(f64::INFINITY, f64::min);
    for (i, b) in raw.iter_mut().enumerate() {
        let e = config.safety * b.expansion;
        if e > 2.0 {
            b.certified_order = 1;
        } else if e * min_expansion > 2.0 {
            b.certified_order = 2;
        } else {
            return Err(Error::ExpansionUncertified { branch: i, expansion: b.expansion, order: 2 });
        }
    }

    let delta = 0.5
        * raw
            .iter()
            .map(|b| (config.safety * b.expansion).ln() / b.return_time as f64)
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
    let c = config.safety
        * raw
            .iter()
            .flat_map(|b| b.step_derivs.iter().enumerate().map(|(j, s)| s * (-delta * (j + 1) as f64).exp()))
            .fold(f64::INFINITY, f64::min);

    Ok(InducedMarkovMap {
        base: base.clone(),
        extension,
        symbolic: sym,
        branches: raw,
        c,
        delta,
        unassigned,
        n_max: config.n_max,
        depth_reached,
    })
}

#[allow(clippy::too_many_arguments)]
fn describe<M: SymbolicModel>(
    model: &M,
    base: &Interval,
    extension: &Interval,
    domain: Interval,
    address: Vec<usize>,
    n: usize,
    config: &InducedConfig,
    t_ref: f64,
    phi_ref: f64,
    base_mass: f64,
) -> Branch {
    let sym = model.symbolic();
    // chain[j] = f^j(U_i) = pullback of the base along the first n − j inverse branches.
    let chain: Vec<Interval> = (0..n).map(|j| pull_back(&sym, base, &address[..n - j])).collect();
    let samples = config.samples.max(1) as i128;
    let mut logs: Vec<Vec<f64>> = Vec::with_capacity(samples as usize);
    for s in 0..samples {
        let mut theta = domain.lerp(Angle::new(2 * s + 1, 2 * samples));
        let mut row = Vec::with_capacity(n);
        for _ in 0..n {
            row.push(model.log_deriv_at(angle_to_f64(&theta)));
            theta = sym.forward(&theta);
        }
        logs.push(row);
    }
    let expansion = logs.iter().map(|r| r.iter().sum::<f64>()).fold(f64::INFINITY, f64::min).exp();
    let step_derivs = (1..=n)
        .map(|j| logs.iter().map(|r| r[n - j..].iter().sum::<f64>()).fold(f64::INFINITY, f64::min).exp())
        .collect();
    let log_jac: Vec<f64> = logs.iter().map(|r| t_ref * r.iter().sum::<f64>() + phi_ref * n as f64).collect();
    let osc = log_jac.iter().copied().fold(f64::NEG_INFINITY, f64::max) - log_jac.iter().copied().fold(f64::INFINITY, f64::min);
    let ext = pull_back(&sym, extension, &address);
    Branch {
        mass: model.reference_mass(&domain) / base_mass,
        extension_in_base: base.contains(&ext),
        extension: ext,
        domain,
        return_time: n,
        expansion,
        step_derivs,
        address,
        chain,
        certified_order: 0,
        log_jacobian_oscillation: osc,
    }
}

impl InducedMarkovMap {
    /// Branch domains are pairwise disjoint, and all intervals
    /// `f^j(U_i)` together form a nested-or-disjoint family (exact check).
    pub fn nested_or_disjoint(&self) -> bool {
        let mut all: Vec<&Interval> = self.branches.iter().flat_map(|b| b.chain.iter()).collect();
        all.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.hi.cmp(&a.hi)));
        let mut stack: Vec<&Interval> = Vec::new();
        for iv in all {
            while let Some(top) = stack.last() {
                if top.hi <= iv.lo {
                    stack.pop();
                } else {
                    break;
                }
            }
            if let Some(top) = stack.last() {
                if top.hi < iv.hi {
                    return false;
                }
            }
            stack.push(iv);
        }
        let mut doms: Vec<&Interval> = self.branches.iter().map(|b| &b.domain).collect();
        doms.sort_by(|a, b| a.lo.cmp(&b.lo));
        doms.windows(2).all(|w| w[0].hi <= w[1].lo)
    }

    /// `f^{n_i}(U_i) = U` for every branch, by exact images of the domain.
    pub fn markov_onto(&self) -> bool {
        self.branches.iter().all(|b| {
            let mut pieces = alloc::vec![b.domain.clone()];
            for _ in 0..b.return_time {
                if pieces.len() != 1 {
                    return false;
                }
                pieces = self.symbolic.image(&pieces[0]);
            }
            pieces.len() == 1 && pieces[0] == self.base
        })
    }

    /// Smallest certified expansion `|Dψ|` over the branches.
    pub fn min_expansion(&self) -> f64 {
        self.branches.iter().map(|b| b.expansion).fold(f64::INFINITY, f64::min)
    }

    /// Largest return time, and the branch masses grouped by return time.
    pub fn masses_by_return_time(&self) -> Vec<f64> {
        let top = self.branches.iter().map(|b| b.return_time).max().unwrap_or(0);
        let mut out = alloc::vec![0.0; top + 1];
        for b in &self.branches {
            out[b.return_time] += b.mass;
        }
        out
    }

    /// `ψ` on a point of branch `i`, exactly.
    pub fn apply(&self, i: usize, theta: &Angle) -> Angle {
        (0..self.branches[i].return_time).fold(*theta, |x, _| self.symbolic.forward(&x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrability {
    /// `Σ n_i m(U_i)` over enumerated branches (base mass normalized to 1).
    pub sum: f64,
    /// Bound on the contribution of return times beyond the explored depth.
    pub tail_bound: f64,
    pub complete: bool,
}

/// Truncated `Σ n_i m(U_i)` plus `Σ_{n > N} n K e^{−n δ′}`, where
/// `mass_n ≤ K e^{−n δ′}` is fitted to the per-return-time masses of the
/// deeper half of the enumerated levels.
pub fn integrability(imap: &InducedMarkovMap) -> Integrability {
    let sum: f64 = imap.branches.iter().map(|b| b.return_time as f64 * b.mass).sum();
    let masses = imap.masses_by_return_time();
    let top = masses.len().saturating_sub(1);
    let (xs, ys): (Vec<f64>, Vec<f64>) = masses
        .iter()
        .enumerate()
        .skip((top / 2).max(1))
        .filter(|(_, m)| **m > 0.0)
        .map(|(n, m)| (n as f64, m.ln()))
        .unzip();
    let rate = linear_fit(&xs, &ys).map(|f| -f.slope).filter(|r| *r > 0.0);
    let tail_bound = match rate {
        Some(r) => {
            let k = masses.iter().enumerate().skip(1).map(|(n, m)| m * (r * n as f64).exp()).fold(0.0, f64::max);
            // Σ_{n > N} n q^n = q^{N+1} (N + 1 − N q) / (1 − q)²
            let q = (-r).exp();
            let n = imap.depth_reached as f64;
            k * q.powf(n + 1.0) * (n + 1.0 - n * q) / ((1.0 - q) * (1.0 - q))
        }
        None if imap.unassigned == 0.0 && imap.depth_reached < imap.n_max => 0.0,
        None => f64::INFINITY,
    };
    Integrability { sum, tail_bound, complete: tail_bound < 1e-6 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CircleModel, IntervalModel};

    fn half() -> Interval {
        Interval::from_ratios((0, 1), (1, 2))
    }

    #[test]
    fn doubling_first_return_to_half() {
        let m = CircleModel::new(2).unwrap();
        let imap = build_first_return(&m, &half(), &InducedConfig::default()).unwrap();
        assert_eq!(imap.branches.len(), 40);
        for (i, b) in imap.branches.iter().enumerate() {
            let n = i + 1;
            assert_eq!(b.return_time, n);
            assert_eq!(b.mass, 0.5f64.powi(n as i32));
            // U_n = [½ − 2^{−n}, ½ − 2^{−n−1})
            let half = Angle::new(1, 2);
            assert_eq!(b.domain, Interval::new(half - Angle::new(1, 1 << n), half - Angle::new(1, 1 << (n + 1))));
            assert!((b.expansion - 2f64.powi(n as i32)).abs() < 1e-9 * b.expansion);
            assert_eq!(b.certified_order, if n == 1 { 2 } else { 1 });
            for (j, s) in b.step_derivs.iter().enumerate() {
                assert!(*s > imap.c * (imap.delta * (j + 1) as f64).exp());
            }
        }
        assert!(imap.nested_or_disjoint() && imap.markov_onto());
        let int = integrability(&imap);
        assert!((int.sum - 2.0).abs() < 1e-9);
        assert!(int.complete && int.tail_bound < 1e-9);
    }

    #[test]
    fn whole_circle_returns_at_once() {
        let m = CircleModel::new(2).unwrap();
        let imap = build_first_return(&m, &Interval::unit(), &InducedConfig::default()).unwrap();
        assert_eq!(imap.branches.len(), 2);
        assert!(imap.branches.iter().all(|b| b.return_time == 1));
        assert_eq!(integrability(&imap).sum, 1.0);
        assert_eq!(integrability(&imap).tail_bound, 0.0);
    }

    #[test]
    fn truncation_is_reported() {
        let m = CircleModel::new(2).unwrap();
        let cfg = InducedConfig { n_max: 8, fullness_tol: 1e-2, ..InducedConfig::default() };
        let imap = build_first_return(&m, &half(), &cfg).unwrap();
        let int = integrability(&imap);
        assert!(int.tail_bound > 0.0 && !int.complete);
        assert!(int.sum < 2.0 && int.sum + int.tail_bound >= 2.0 - 1e-12);
    }

    #[test]
    fn third_base_fills_slowly() {
        let m = CircleModel::new(2).unwrap();
        let cfg = InducedConfig { n_max: 6, ..InducedConfig::default() };
        let err = build_first_return(&m, &Interval::from_ratios((0, 1), (1, 3)), &cfg).unwrap_err();
        assert!(matches!(err, Error::MassDeficit { .. }));
    }

    #[test]
    fn chebyshev_base_quarter_to_half() {
        let m = IntervalModel::chebyshev();
        let base = Interval::from_ratios((1, 4), (1, 2));
        let imap = build_first_return(&m, &base, &InducedConfig::default()).unwrap();
        assert!(imap.unassigned < 1e-3);
        assert!(imap.nested_or_disjoint() && imap.markov_onto());
        assert!(imap.branches.iter().all(|b| b.certified_order >= 1));
        let int = integrability(&imap);
        assert!(int.sum.is_finite() && int.sum > 1.0);
    }
}
