//! Numerical core for an incompressible-fluid / elastic-slab interaction model
//! in a flat, horizontally periodic channel.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs: no IO, no global state, no threads. File formats,
//! configuration and the command line live in the `chanfsi` companion crate.
//!
//! Layout:
//!
//! * [`geometry`]: the three-slab channel, grids, interface planes and normals.
//! * [`field`]: space-time sample storage shared by every solver.
//! * [`fields`]: the time cutoff, the cutoff-modified flow map, cofactor algebra.
//! * [`norms`]: fractional space-time Sobolev norms and inequality verifiers.
//! * [`stokes`]: per-mode Neumann/Dirichlet Stokes solver and initial pressure.
//! * [`wave`]: Dirichlet wave solver on the elastic slab and trace diagnostics.
//! * [`fsi`]: the linear and nonlinear fixed-point drivers.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod field;
pub mod fields;
pub mod fsi;
pub mod geometry;
pub mod linalg;
pub mod norms;
pub mod spectral;
pub mod stokes;
pub mod wave;

pub use field::{Layer, SpaceTimeField};
pub use geometry::{ChannelGeometry, GeometryConfig, Plane};
