//! Planar piecewise-linear slow-fast systems: smooth regularizations with
//! prescribed transition functions, slow divergence integrals with certified
//! zeros, and limit cycle detection through Poincare return maps.

pub mod config;
pub mod cutoff;
pub mod cycles;
pub mod dd;
pub mod error;
pub mod lienard;
pub mod ode;
pub mod poly;
pub mod pwl;
pub mod quad;
pub mod report;
pub mod rootfind;
pub mod transition;
pub mod verify;

pub use error::{Error, Result};
