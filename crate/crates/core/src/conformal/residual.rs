#[allow(unused_imports)]
use num_traits::Float as _;
use super::cells::{CellMeasure, CellPartition};
use crate::models::{Dynamics, Interval, SymbolicModel};
use crate::potential::Potential;
use crate::{Error, Result};

/// A finite measure on the symbolic coordinate.
pub trait SymbolicMeasure {
    fn mass(&self, iv: &Interval) -> f64;

    /// `∫_{iv} g(θ) dm(θ)`.
    fn integrate(&self, iv: &Interval, g: &mut dyn FnMut(f64) -> f64) -> f64;
}

impl SymbolicMeasure for CellMeasure {
    fn mass(&self, iv: &Interval) -> f64 {
        self.integrate(iv, &mut |_| 1.0)
    }

    fn integrate(&self, iv: &Interval, g: &mut dyn FnMut(f64) -> f64) -> f64 {
        match self.partition {
            CellPartition::Symbolic { .. } => self.integrate_symbolic(iv.lo_f64(), iv.hi_f64(), g),
            CellPartition::Sphere { .. } => f64::NAN,
        }
    }
}

/// Unit point mass at a symbolic coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom(pub f64);

impl SymbolicMeasure for Atom {
    fn mass(&self, iv: &Interval) -> f64 {
        if iv.contains_f64(self.0) {
            1.0
        } else {
            0.0
        }
    }

    fn integrate(&self, iv: &Interval, g: &mut dyn FnMut(f64) -> f64) -> f64 {
        if iv.contains_f64(self.0) {
            g(self.0)
        } else {
            0.0
        }
    }
}

/// `max_A |m(f(A)) − ∫_A e^{φ} |Df|^t dm| / m(A)` over test cells of
/// positive mass. Each test cell must lie inside one lap of the symbolic map,
/// which certifies that `f` is injective on it.
///
/// A measure with `L* m = λ m` for the potential `φ` is conformal for
/// `φ + log λ`; pass that sum here.
pub fn conformality_residual<M: SymbolicModel>(
    model: &M,
    m: &dyn SymbolicMeasure,
    t: f64,
    phi: &dyn Potential<<M::Dyn as Dynamics>::Point>,
    test_cells: &[Interval],
) -> Result<f64> {
    let sym = model.symbolic();
    let laps = sym.laps();
    let mut worst: f64 = 0.0;
    for (k, cell) in test_cells.iter().enumerate() {
        if !laps.iter().any(|lap| lap.contains(cell)) {
            return Err(Error::InjectivityUncertifiable(k));
        }
        let mass = m.mass(cell);
        if !(mass > 0.0) {
            continue;
        }
        let image: f64 = sym.image(cell).iter().map(|iv| m.mass(iv)).sum();
        let pulled = m.integrate(cell, &mut |theta| {
            (phi.value(&model.realize(theta)) + t * model.log_deriv_at(theta)).exp()
        });
        worst = worst.max((image - pulled).abs() / mass);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{leading_pair, EigenConfig, SymbolicTransfer, TransferModel};
    use crate::models::CircleModel;
    use crate::potential::ConstPotential;
    use alloc::vec::Vec;
    use core::f64::consts::LN_2;
    use rand::Rng as _;

    fn cells(n: usize) -> Vec<Interval> {
        (0..n as i128).map(|i| Interval::from_ratios((i, n as i128), (i + 1, n as i128))).collect()
    }

    #[test]
    fn arc_length_is_conformal_for_doubling() {
        let m = CircleModel::new(2).unwrap();
        let n = 1 << 12;
        let st = SymbolicTransfer::new(&m, n).unwrap();
        let pair = leading_pair(&st.assemble(1.0, &ConstPotential(0.0)).unwrap(), &EigenConfig::default()).unwrap();
        let r = conformality_residual(&m, &pair.measure, 1.0, &ConstPotential(pair.eigenvalue.ln()), &cells(n)).unwrap();
        assert!(r < 1e-3);
    }

    #[test]
    fn atom_at_the_fixed_point() {
        let m = CircleModel::new(2).unwrap();
        let r = conformality_residual(&m, &Atom(0.0), 1.0, &ConstPotential(-LN_2), &cells(16)).unwrap();
        assert!(r < 1e-15);
    }

    #[test]
    fn random_weights_are_not_conformal() {
        let m = CircleModel::new(2).unwrap();
        let mut rng = crate::rng::rng(4);
        let part = CellPartition::Symbolic { resolution: 64, circle: true };
        let w: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
        let cm = CellMeasure::new(part, w).unwrap();
        let r = conformality_residual(&m, &cm, 1.0, &ConstPotential(0.0), &cells(64)).unwrap();
        assert!(r > 0.1);
    }

    #[test]
    fn cells_across_laps_are_rejected() {
        let m = CircleModel::new(2).unwrap();
        let straddle = [Interval::from_ratios((3, 8), (5, 8))];
        let err = conformality_residual(&m, &Atom(0.0), 1.0, &ConstPotential(0.0), &straddle).unwrap_err();
        assert_eq!(err, Error::InjectivityUncertifiable(0));
    }
}
