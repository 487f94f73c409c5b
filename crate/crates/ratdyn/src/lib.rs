//! Files, parallel drivers, the benchmark registry and the command line
//! around [`ratdyn_core`].

pub use ratdyn_core as core;

#[macro_use]
pub mod model;
pub mod drivers;
pub mod formats;
pub mod registry;
pub mod verify;
pub mod cli;
