//! Standard-library companion to [`icdmt_core`]: a deterministic parallel
//! Monte Carlo runner, the experiment drivers built on it, CSV/JSON file
//! formats, named presets and the verification suites behind the `icdmt`
//! command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod io;
pub mod presets;
pub mod runner;
pub mod tables;
pub mod verify;

pub use error::{Error, Result};
pub use icdmt_core;
