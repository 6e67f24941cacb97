//! Data-pipeline toolkit for manipulation demonstrations: force-closure
//! grasp-label annotation on point clouds, SRP/PIP trajectory segmentation,
//! approach-pose sampling, mixture-dataset construction with balancing,
//! a synthetic-trajectory generator, and logarithmic scaling-law fits.
//!
//! Everything randomized runs off explicit 64-bit seeds through one fixed
//! ChaCha8 generator with documented sub-stream splitting, so outputs are
//! byte-identical across runs, platforms and thread counts. The `parallel`
//! feature (default) parallelizes the heavy inner loops with rayon; without
//! it the same code paths run sequentially with identical results.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod geom;
pub mod grasp;
pub mod io;
pub mod mixture;
pub mod rng;
pub mod synth;
pub mod traj;

pub(crate) mod parallel;

pub use error::{Error, Result};
