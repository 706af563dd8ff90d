//! Parallel transport, holonomy and descent data for principal bundles over
//! manifolds presented by charts.
//!
//! ```
//! let sphere = holokit::fixtures::load("sphere")?;
//! let hol = holokit::transport::holonomy(sphere.connection()?, sphere.path("latitude_60")?, 1024)?;
//! let angle = hol.unwrapped_angle.unwrap();
//! assert!((angle - std::f64::consts::PI).abs() < 1e-8);
//! # Ok::<(), holokit::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cocycle;
pub mod config;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod geometry;
pub mod lie;
pub mod path;
pub mod reconstruct;
pub mod torsor;
pub mod transport;

pub use error::{Error, Result};
