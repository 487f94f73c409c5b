//! The Riemann sphere: homogeneous points, the chordal metric and rational maps.

mod map;
mod point;
pub mod poly;

pub use map::{CriticalSet, RationalMap};
pub use point::SpherePoint;
