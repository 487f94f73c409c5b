//! Ergodic theory of rational maps, made computable.
//!
//! This crate turns the thermodynamic formalism of a rational map
//! `f : Ĉ → Ĉ` into finite objects that can be computed and checked:
//!
//! * [`sphere`]: points of the Riemann sphere in homogeneous coordinates,
//!   rational maps, the chordal metric, spherical derivatives, preimages and
//!   critical points (Aberth iteration).
//! * [`models`]: the [`Dynamics`](models::Dynamics) abstraction plus exact
//!   one-dimensional models (angle multiplication on the circle, Chebyshev
//!   maps through the tent conjugacy, quasicircle Julia sets of `z^d + c`).
//! * [`orbits`]: forward orbits, Lyapunov exponents, backward walks in the
//!   natural extension, distortion-controlled pullback of balls.
//! * [`conformal`]: Ulam-type transfer matrices, Perron pairs, pressure
//!   curves, the first zero of the pressure, conformality defects.
//! * [`induced`]: first-return expanding Markov maps, integrability of the
//!   return time, absolutely continuous invariant measures and Abramov entropy.
//! * [`partitions`]: cylinder trees and the greedy `d + 1` partition with
//!   orbit coding.
//! * [`dimension`]: local dimension scans and the two dimension identities.
//! * [`cocycle`]: the Jacobian cocycle along backward walks, the leaf
//!   density it induces, and density floors.
//!
//! The crate is `no_std` and only needs `alloc`. Everything is a pure
//! function of its inputs and an explicit seed; file formats, the command
//! line and thread pools live in the companion `ratdyn` crate.
#![no_std]

extern crate alloc;

pub mod cocycle;
pub mod conformal;
pub mod dimension;
mod error;
pub mod induced;
pub mod models;
pub mod orbits;
pub mod partitions;
pub mod potential;
pub mod quadrature;
pub mod rng;
pub mod sphere;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use potential::{ConstPotential, HolderData, Potential};
pub use sphere::{CriticalSet, RationalMap, SpherePoint};
