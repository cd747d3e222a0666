//! Latent spreading-network inference for weekly hotspot observations.
//!
//! The crate learns, for every target week, an `N x N` spreading matrix and a
//! short vector of temporal weights that together explain which regions turn
//! into hotspots given the presence of cases in the preceding weeks. The
//! learned matrices drive one-week-ahead forecasts and can be aggregated into
//! yearly networks for comparison with commuting flows.
//!
//! Everything here is pure computation over in-memory data and builds without
//! `std`. Parsing, file formats and the command-line pipeline live in the
//! companion `spreadnet` crate.
#![no_std]
// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod counts;
pub mod error;
pub mod evaluation;
pub mod forecast;
pub mod geometry;
pub mod hotspot;
pub mod learner;
pub mod matrix;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::{BinaryMatrix, Matrix};
