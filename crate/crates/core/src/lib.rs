//! Simulation and pulse optimization for long-range resonator-induced-phase
//! CZ gates between two transmons joined by a driven multimode bus.
//!
//! Frequencies are ordinary frequencies in GHz and times are in ns.

pub mod cli;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod multimode;
pub mod optimizer;
pub mod pulse;
pub mod quantum;

pub use device::{DeviceConfig, Side};
pub use dynamics::StateLabel;
pub use error::{Error, Result};
