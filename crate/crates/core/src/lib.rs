//! Long-term single-object tracking: a short-term tracker whose results are
//! judged frame by frame, with a local-to-global cascade detector that
//! re-captures the target after occlusion or out-of-view periods.

// `!(x >= lo)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod appearance;
pub mod cascade;
pub mod error;
pub mod evaluation;
pub mod frame;
pub mod geometry;
pub mod io;
pub mod judgement;
pub mod motion;
pub mod pipeline;
pub mod scalar;
pub mod shortterm;
pub mod simulator;
pub mod texture;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use geometry::{BBox, FrameDims};
pub use scalar::{Real, Scalar};

/// Exact rational scalar for metric and geometry kernels.
pub type Exact = num_rational::BigRational;

pub type BBox64 = BBox<f64>;
pub type BBox32 = BBox<f32>;
pub type BBoxExact = BBox<Exact>;
