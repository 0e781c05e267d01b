//! Host–parasite eco-evolutionary dynamics.
//!
//! The crate covers the fixed-trait ecological model, the co-evolutionary
//! (Darwinian) extension with trait-dependent carrying capacities and
//! parasitism efficiency, equilibrium and stability analysis, ESS checks,
//! time integration and parameter sweeps.

pub mod conditions;
pub mod config;
pub mod eco;
pub mod error;
pub mod evo;
pub mod model;
pub mod run;
pub mod simulate;
pub mod stability;
pub mod sweep;

pub use error::{Error, Result};
