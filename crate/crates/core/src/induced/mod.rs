//! First-return expanding Markov maps on a base interval of the symbolic
//! coordinate, their certification, integrability of the return time, the
//! invariant density of the induced map and the measure it generates.

mod acip;
mod build;

pub use acip::{abramov_entropy, folklore_acip, generate_measure, AcipConfig, AcipResult, GeneratedMeasure};
pub use build::{build_first_return, integrability, Branch, InducedConfig, InducedMarkovMap, Integrability};
