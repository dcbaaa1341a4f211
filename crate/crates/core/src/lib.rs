//! Coverage control for robot swarms with positioning uncertainty.
//!
//! Agents are uncertainty disks. The region is split into Guaranteed Voronoi
//! cells bounded by hyperbolic arcs, each agent covers the part of its cell
//! inside its guaranteed sensing disk, and agents ascend the total covered
//! importance by boundary-integral gradient laws.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod coverage;
pub mod error;
pub mod geometry;
pub mod io;
pub mod partition;
pub mod sim;

pub use error::{Error, Result};
