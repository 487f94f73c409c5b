//! Forward orbits and Birkhoff averages, backward walks through the natural
//! extension, and distortion-controlled pullbacks of balls along them.

mod backward;
mod forward;
mod pullback;

pub use backward::{
    backward_walk, effective_sample_size, fiber_probabilities, follow_walk, walk_by, BackwardWalk, WalkMode,
};
pub use forward::{
    iterate, lyapunov, lyapunov_from_samples, lyapunov_sample, BackwardSampler, DiskSampler, ForwardOrbit, LyapunovEstimate, Sampler,
    SphericalSampler, SymbolicSampler, CRITICAL_LOG_FLOOR,
    SHADOW_DIGITS, symbolic_lyapunov, symbolic_lyapunov_sample,
};
pub use pullback::{
    boundary_avoidance_scan, distortion_constant, pullback_ball, stop_index, BoundaryScanRow, PullbackRecord,
    StopRule, BOUNDARY_TOL, MIN_PROBES,
};
