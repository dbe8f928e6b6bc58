//! Thermodynamic metrics, dissipation integrals and optimal finite-time
//! Carnot cycles for heat engines in the low-dissipation regime.
//!
//! Energies are adimensional (already divided by `k_B T`) unless a
//! [`cycle_opt::BathPair`] supplies temperatures.

pub mod bound_opt;
pub mod cli;
pub mod cycle_opt;
pub mod error;
pub mod explicit_sim;
pub mod hyperdual;
pub mod metrics;
pub mod models;
pub mod ode;
pub mod optimize;
pub mod protocol;
pub mod scaling;
pub mod superops;
pub mod thermo_core;

pub use error::{Error, Result};
