//! Constraint-aware Harris Hawks optimization for joint UAV placement and NOMA
//! power allocation in a visible-light downlink.
//!
//! * [`hho`]: the generic optimizer.
//! * [`vlc`]: Lambertian channel gains, NOMA rates and constraint residuals.
//! * [`planner`]: the penalized joint placement/power problem (HHOPAP).
//! * [`baselines`]: GRPA, random placement and OFDMA comparison schemes.
//! * [`fnn`]: a feedforward network trained by population methods.
//! * [`experiment`]: scenario generation, sweeps and CSV output.

pub mod baselines;
pub mod error;
pub mod experiment;
pub mod fnn;
pub mod hho;
pub mod planner;
pub mod seed;
pub mod vlc;

pub use error::{Error, Result};
