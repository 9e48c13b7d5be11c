//! Dimension-reduced Bayesian optimization for time-series optimal control.
//!
//! High-dimensional control problems over a time horizon (one decision per
//! epoch) are optimized by restricting the search to `d` evenly spaced
//! epochs. A Gaussian-process surrogate with a Matern 5/2 kernel models the
//! reduced objective; candidates come from a zone-based multi-armed bandit
//! plus a contractible random search, scored by the lower confidence bound.
//! An Adam local search refines the best point found, and one of five
//! fill-in strategies reconstructs the full-horizon strategy at the very end,
//! so no per-iteration reconstruction is needed.
//!
//! Two benchmark problems are built in: optimal control of a deterministic
//! SEIR epidemic model and of a stochastic SIS model driven by contact-rate
//! noise. See [`optimizer::run`] for the entry point and the `epibo-bench`
//! crate for the command-line harness.

pub mod acquisition;
pub mod dimension;
pub mod epidemic;
pub mod error;
pub mod gp;
pub mod local_search;
pub mod optimizer;
pub mod sampling;

mod rng;

pub use crate::dimension::{Bounds, ControlStrategy, FillStrategy, ReductionSchedule};
pub use crate::epidemic::EpidemicInstance;
pub use crate::error::{Error, Result};
pub use crate::optimizer::{run, run_baseline_standard_bo, OptimizerConfig, RunReport};
