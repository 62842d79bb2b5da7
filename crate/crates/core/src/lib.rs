//! Synthetic HD-map change generation, map and sensor rendering, and
//! map-change evaluation.
//!
//! The crate is organized bottom-up: [`geometry`] primitives, the
//! [`map`] model, the six [`perturb`] generators, [`render`] (map
//! rasterization and occlusion), [`ortho`] (ray-cast sensor orthoimagery),
//! [`eval`] metrics, [`freq`] change-frequency estimators, and the
//! [`pipeline`] that ties them into training triplets.

// `!(x > 0.0)` is used on purpose so NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod fixtures;
pub mod freq;
pub mod geometry;
pub mod map;
pub mod ortho;
pub mod perturb;
pub mod pipeline;
pub mod render;
pub mod seed;

pub use error::{Error, Result};
