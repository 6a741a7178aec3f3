//! Simulated laser scans of procedurally generated tree stands.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`treegen`] grows labelled high-density point clouds of single trees;
//! 2. [`stand`] lays trees out as an orchard or forest and assembles them;
//! 3. [`sensor`] and [`trajectory`] describe the scanner and its path;
//! 4. [`scanner`] simulates the scan with first-return occlusion and noise;
//! 5. [`analysis`] measures density and occlusion against the source.
//!
//! [`config`] and [`cli`] wire the stages together behind the `simtreels`
//! binary.

pub mod analysis;
pub mod cli;
pub mod cloud;
pub mod config;
pub mod error;
pub mod presets;
pub mod rng;
pub mod scanner;
pub mod sensor;
pub mod stand;
pub mod trajectory;
pub mod treegen;

pub use error::{Error, Result};
