use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure a computation in this crate can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("both homogeneous coordinates vanish (|P|,|Q| = {0:e}); common factor contamination")]
    DegenerateEvaluation(f64),
    #[error("root finding did not reach the residual tolerance (residual {residual:e} after {sweeps} sweeps)")]
    RootFindingFailure { residual: f64, sweeps: usize },
    #[error("numerator and denominator share a root (resultant proxy {0:e})")]
    CommonFactor(f64),
    #[error("map has degree {0}; dynamical operations need degree >= 2")]
    DegreeTooLow(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("orbit hit a critical point at step {step} (log|Df| = {log_deriv})")]
    CriticalOrbitHit { step: usize, log_deriv: f64 },
    #[error("distortion budget exceeded at step {step}: sum {sum} >= log 2")]
    DistortionBudgetExceeded { step: usize, sum: f64 },
    #[error("pulled-back ball comes within the safety margin of a critical point at step {step}")]
    CriticalProximity { step: usize },
    #[error("active cell {0} received no samples")]
    EmptyCell(usize),
    #[error("no convergence after {sweeps} sweeps (last residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("bracket does not straddle a zero: P({lo}) = {p_lo}, P({hi}) = {p_hi}")]
    BracketInvalid { lo: f64, hi: f64, p_lo: f64, p_hi: f64 },
    #[error("injectivity of f on cell {0} cannot be certified")]
    InjectivityUncertifiable(usize),
    #[error("branch {branch} has expansion {expansion} <= 2 even at return order {order}")]
    ExpansionUncertified { branch: usize, expansion: f64, order: usize },
    #[error("unassigned base mass {unassigned:e} exceeds tolerance {tol:e}")]
    MassDeficit { unassigned: f64, tol: f64 },
    #[error("cylinder {node} would need more than d = {degree} classes")]
    AssignmentOverflow { node: usize, degree: usize },
    #[error("orbit point at step {0} lies within tolerance of a class boundary")]
    BoundaryAmbiguity(usize),
    #[error("orbit point at step {0} lies in the unassigned remainder of the tree")]
    Unassigned(usize),
    #[error("radius {radius:e} is below the validity window {floor:e}")]
    ResolutionExceeded { radius: f64, floor: f64 },
    #[error("paired walks follow different inverse branches at step {0}")]
    CombinatoricsMismatch(usize),
    #[error("cocycle absolute sum {sum} exceeds certified budget {budget}")]
    BudgetExceeded { sum: f64, budget: f64 },
    #[error("Pesin residual {residual} exceeds tolerance {tol}")]
    HypothesisFailed { residual: f64, tol: f64 },
}
