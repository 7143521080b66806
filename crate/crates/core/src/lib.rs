//! Subgradient and projection solvers for convex feasibility problems.
//!
//! A convex feasibility problem asks for a point `x` with `g_i(x) <= 0` for a
//! family of convex functions and `x` inside the intersection of closed convex
//! sets `X_i`. Agent `i` only knows its own pair `(g_i, X_i)` and exchanges
//! states with its in-neighbours over a weighted directed graph.
//!
//! The crate is organised as:
//!
//! - [`graph`]: weighted digraphs, Laplacians, connectivity and balance,
//!   spectra, the discrete gain bound, switching schedules and delta-graphs.
//! - [`convex`]: projectable sets, convex inequalities with subgradient
//!   oracles, and the quadratic penalty for blocks of linear inequalities.
//! - [`algorithms`]: the centralized and distributed iterations, step-size
//!   schedules and the per-step Lyapunov bounds used as runtime checks.
//! - [`harness`]: scenario files, the run loop, metrics, trajectory and
//!   report output, and the built-in five-agent scenarios.

pub mod algorithms;
pub mod config;
pub mod convex;
mod error;
pub mod graph;
pub mod harness;

pub use error::{Error, Result};

/// Dense real vector used for agent states and problem data.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
