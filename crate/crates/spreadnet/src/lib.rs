//! File formats, snapshot ingest and the `spreadnet` command line on top of
//! [`spreadnet_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod ingest;
pub mod manifest;

pub use error::{Error, Result};
