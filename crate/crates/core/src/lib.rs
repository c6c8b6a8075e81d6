//! Locality sensitive hashing with a dispersion-aware parameter planner.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: points, datasets, metrics, brute-force oracles, generators and dataset files.
//! - [`dispersion`]: near-pair counts `N_β`, profiles, the graph-shrinking packing construction and
//!   a doubling-dimension estimator.
//! - [`lsh_families`]: uniform p-stable line-projection families, collision probabilities and `ρ`.
//! - [`bounds`]: packing and summation bounds, the refined / doubling / classical planners.
//! - [`index`]: the multi-table LSH index with instrumented early-stopping queries.
//! - [`bench`] and [`verify`]: reproducible benchmark and property-suite drivers emitting CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod bounds;
pub mod dispersion;
pub mod geometry;
pub mod index;
pub mod lsh_families;
mod quadrature;
pub mod verify;

mod error;

pub use error::{Error, Result};
pub use geometry::{Dataset, Metric, Point};
