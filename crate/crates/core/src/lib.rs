//! Planar three-body free-fall laboratory.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod central;
pub mod error;
pub mod integrator;
pub mod isosceles;
pub mod model;
pub mod output;
pub mod rectilinear;
pub mod scenarios;
pub mod roots;
pub mod split;

pub use error::{Error, Result};
pub use model::{Body, PlanarState, Vec2};
