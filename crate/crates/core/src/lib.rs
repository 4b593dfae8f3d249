//! Sparse recovery and measurement-error correction by greedy reweighted
//! l1 decoding.
//!
//! The crate decodes underdetermined linear measurements `y = A x` in four
//! flavors:
//! - plain greedy decoding: repeatedly solve a weighted l1 program, shrink
//!   the "club" threshold geometrically, and nearly free the coordinates
//!   whose magnitudes stay above it;
//! - generous decoding: the same loop with per-block weights for non-club
//!   coordinates, which pays off when blocks differ in information density
//!   (e.g. an identity block absorbing sparse measurement errors);
//! - compound decoding: two generator blocks at different scales sharing one
//!   measurement vector, with the club threshold corrected per block;
//! - adaptive decoding: the second block's weight is re-estimated every
//!   iteration from a sparsity statistic of the current iterate.
//!
//! How it fits together: [`model`] builds matrices and signals, [`solver`]
//! minimizes weighted l1 norms under exact constraints (first-order splitting
//! with an exact LP as certification oracle), [`decode`] and [`adaptive`] run
//! the reweighting loops, and [`harness`] turns them into reproducible
//! success-rate experiments with CSV output.

pub mod adaptive;
pub mod decode;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
