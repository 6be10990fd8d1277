//! Wavefront tracking for the LWR traffic model with a piecewise-constant
//! speed limit and a moving bottleneck that caps the flux it lets through.
//!
//! The pipeline is: [`network::RoadNetwork`] → [`grid::build_grid`] →
//! [`sim::SimState::init`] → [`sim::SimState::run`], with the functionals
//! of [`diagnostics`] evaluated along the way.

pub mod batch;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod flux;
pub mod grid;
pub mod network;
pub mod output;
pub mod profile;
pub mod riemann;
pub mod sim;

pub use error::{Error, Result};
pub use flux::{ModelParams, RegionParams};
pub use grid::{build_grid, GridRef, GridSystem};
pub use network::RoadNetwork;
pub use riemann::{Wave, WaveKind, WaveSequence};
pub use sim::{RunOptions, SimState};
