//! Diversity-multiplexing tradeoff of infinite constellations over
//! quasi-static Rayleigh MIMO channels.
//!
//! The crate is `no_std` (it needs `alloc`). It provides
//!
//! - [`dmt`]: the upper bound `d*_K(r)`, its linear program with a
//!   brute-force oracle, the optimal DMT envelope and the achievable line of
//!   each transmission-scheme segment;
//! - [`scheme`]: the dimension-reducing transmission matrices `G_l`, their
//!   block-diagonal effective channels and enumeration checks of the
//!   column-occurrence properties;
//! - [`channel`]: Rayleigh sampling, noise, singular-value exponents;
//! - [`lattice`]: lattice generators, VNR arithmetic, exact closest-point
//!   decoding and finite-constellation carving;
//! - [`spherepack`]: the sphere-packing lower bound on error probability;
//! - [`sim`]: the per-trial Monte Carlo kernel, binomial intervals and
//!   slope fitting. Parallel drivers and file formats live in the `icdmt`
//!   crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod channel;
pub mod config;
pub mod dmt;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod rng;
pub mod scheme;
pub mod sim;
pub mod special;
pub mod spherepack;

pub use config::{parse_rational, DimensionSplit, SystemConfig};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use num_rational::Rational64;
