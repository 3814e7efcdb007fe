//! Skeleton processing built on a context-flux representation.
//!
//! A skeleton's *context flux* is a 2D vector field: every pixel in a
//! neighborhood of the skeleton carries the unit vector pointing at its
//! nearest skeleton pixel, and all other pixels carry `(0, 0)`. This crate
//! generates such fields from binary skeleton maps, recovers skeletons back
//! from (possibly noisy) fields, skeletonizes binary shapes with a classical
//! net-inward-flux method, and scores results with tolerance-based
//! precision/recall.
//!
//! The crate is `no_std` (with `alloc`) and does no I/O; file formats and the
//! command-line tool live in the companion `fluxskel` crate.
//!
//! Pixels are addressed as `(x, y)` with `x` growing rightward along columns
//! and `y` growing downward along rows; storage is row-major.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod binflux;
pub mod dt;
pub mod error;
pub mod eval;
pub mod fluxgen;
pub mod morph;
pub mod raster;
pub mod recover;
pub mod synth;

pub use error::Error;
pub use raster::{BinaryMap, FluxField, GridDims, ScalarMap};
