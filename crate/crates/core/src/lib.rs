//! Simulation and verification of gradient blowup for the one-dimensional
//! nonlinear shallow water equations with bathymetry.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod initial_data;
pub mod jet;
pub mod profile;
pub mod renormalization;
pub mod solver;
pub mod topography;
pub mod transforms;

pub use error::{Error, Result};
