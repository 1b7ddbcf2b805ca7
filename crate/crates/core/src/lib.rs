//! Numerical lab for rescaled vortex solutions on the plane, their
//! concentration onto target measures in the unit disk, and the lifted
//! flow-box Seiberg–Witten checks.
//!
//! Numerical kernels are generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix the scalar to `f64`.

// `!(x > 0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentrate;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod pipeline;
pub mod scalar;
pub mod schedule;
pub mod swbox;
pub mod vortex;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Point64 = geometry::Point<f64>;
pub type DiskMeasure64 = measure::DiskMeasure<f64>;
pub type DiracApproximation64 = measure::DiracApproximation<f64>;
pub type VortexField64 = vortex::VortexField<f64>;
pub type GridSpec64 = vortex::GridSpec<f64>;
pub type ZeroConfig64 = vortex::ZeroConfig<f64>;
