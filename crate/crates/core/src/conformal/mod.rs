//! Conformal measures as leading eigenmeasures of discretized transfer
//! operators, pressure curves and their first zero.
//!
//! The weighted transfer operator is
//! `L g(y) = Σ_{f(x) = y} e^{−φ(x)} |Df(x)|^{−t} g(x)`. A measure with
//! `L* m = λ m` satisfies `m(f(A)) = λ ∫_A e^{φ} |Df|^t dm` on injectivity
//! domains, and `log λ` is the pressure. Discretizing on cells, entry
//! `(i, j)` is the average over points `y` of cell `i` of `L 1_j (y)`; the
//! discrete eigenmeasure is a left eigenvector, and at `t = 0, φ = 0` every
//! row sums to the degree.

mod cells;
mod eigen;
mod residual;
mod transfer;

pub use cells::{CellMeasure, CellPartition, SphereGrid};
pub use eigen::{
    leading_pair, pressure_at, pressure_curve, pressure_zero, EigenConfig, LeadingPair, PressureCurve,
    PressurePoint,
};
pub use residual::{conformality_residual, Atom, SymbolicMeasure};
pub use transfer::{
    julia_point, julia_support, symbolic_cell_nodes, CellNodes, SphereTransfer, SymbolicTransfer, TransferMatrix,
    TransferModel, JULIA_DEPTH, MIN_JULIA_POINTS,
};
