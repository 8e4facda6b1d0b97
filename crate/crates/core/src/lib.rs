//! Real-time single-object tracking by adaptive fusion of a dimension-reduced
//! multi-channel correlation filter with a per-pixel color classifier.
//!
//! The crate is `no_std` (it needs `alloc`). Image decoding, dataset
//! handling and evaluation live in the `fusetrack-bench` companion crate.
//!
//! Module map:
//!
//! - [`features`]: patch extraction, HOG, gray and color-bin features, cosine window.
//! - [`projection`]: channel resampling and the learned D-to-C projection.
//! - [`corrfilter`]: frequency-domain ridge-regression filter and scale search.
//! - [`colormodel`]: per-bin color weights and their box-averaged response.
//! - [`fusion`]: APCE, relative confidence, adaptive weighting and the update gate.
//! - [`tracker`]: initialization and the per-frame update loop.

#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod colormodel;
pub mod corrfilter;
mod error;
pub mod features;
pub mod fft;
pub mod fusion;
mod geometry;
pub mod linalg;
pub mod projection;
pub mod tracker;

pub use error::{Error, Result};
pub use geometry::{BoundingBox, RealGrid};

pub use num_complex::Complex64;
