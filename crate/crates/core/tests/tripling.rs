//! The whole symbolic pipeline on `z³`, where every quantity is known:
//! `|Df| ≡ 3` on the circle, arc length is conformal for `(t, φ) = (1, 0)`
//! and is the measure of maximal entropy `log 3`.

use ratdyn_core::cocycle::{cells_inside, density_floor, eventually_onto};
use ratdyn_core::conformal::{leading_pair, pressure_curve, EigenConfig, SymbolicTransfer, TransferModel};
use ratdyn_core::induced::{abramov_entropy, build_first_return, folklore_acip, generate_measure, integrability, AcipConfig, InducedConfig};
use ratdyn_core::models::{CircleModel, Interval, SymbolicModel};
use ratdyn_core::orbits::symbolic_lyapunov;
use ratdyn_core::ConstPotential;

#[test]
fn tripling_end_to_end() {
    let ln3 = 3f64.ln();
    let model = CircleModel::new(3).unwrap();
    let tm = SymbolicTransfer::new(&model, 729).unwrap();
    let cfg = EigenConfig::default();

    let curve = pressure_curve(&tm, &[0.0, 1.0, 2.0], &ConstPotential(0.0), &cfg).unwrap();
    for (t, p) in curve.ts.iter().zip(&curve.values) {
        assert!((p - (1.0 - t) * ln3).abs() < 1e-9);
    }
    let pair = leading_pair(&tm.assemble(1.0, &ConstPotential(0.0)).unwrap(), &cfg).unwrap();
    assert!(pair.measure.weights.iter().all(|w| (w - 1.0 / 729.0).abs() < 1e-12));

    let chi = symbolic_lyapunov(&model, 200, 10, 1).unwrap();
    assert!((chi.mean - ln3).abs() < 1e-12);

    let base = Interval::from_ratios((0, 1), (2, 3));
    let imap = build_first_return(&model, &base, &InducedConfig::default()).unwrap();
    assert!(imap.nested_or_disjoint() && imap.markov_onto());
    let int = integrability(&imap);
    // Kac: the mean return time to a set of measure 2/3 is 3/2.
    assert!((int.sum - 1.5).abs() < 1e-8 && int.complete);

    let acip = folklore_acip(&model, &imap, &AcipConfig { resolution: 243, ..AcipConfig::default() }).unwrap();
    assert!((abramov_entropy(&imap, &acip) - ln3).abs() < 1e-8);
    let gen = generate_measure(&model, &imap, &acip, 729).unwrap();
    assert!(gen.carrier.weights.iter().all(|w| (w - 1.0 / 729.0).abs() < 1e-8));

    let onto = eventually_onto(model.symbolic(), &base, 8);
    let floor = density_floor(&pair.measure, &gen.carrier, &cells_inside(&pair.measure, &base), 1e-12, 1.0, onto).unwrap();
    assert!(floor.global && (floor.epsilon - 1.0).abs() < 1e-6);
}
