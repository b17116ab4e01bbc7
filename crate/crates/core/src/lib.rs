//! Curvature engine for four-dimensional gradient shrinking Ricci solitons.
//!
//! Everything here is pure computation over `alloc`: truncated Taylor jets
//! supply exact partial derivatives of chart data, [`tensors`] builds
//! point-local tensor algebra on top of them, and [`curvature`] evaluates the
//! Riemann, Ricci, Weyl, Cotton, Bach and quadratic `U`/`V`/`W` tensors at a
//! point. [`geometry`] holds the exact example spaces and a seeded random
//! metric generator, [`quadrature`] integrates over sublevel sets of the
//! potential, and [`suite`] turns all of it into pass/fail identity reports.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod curvature;
pub mod error;
pub mod geometry;
pub mod jets;
pub(crate) mod linalg;
pub mod polynomial;
pub mod quadrature;
pub mod regime;
pub mod report;
pub mod suite;
pub mod sum;
pub mod tensors;

pub use error::{Error, Result};
pub use jets::{Jet, JetSpace, MultiIndex};
pub use tensors::{MetricAtPoint, PointTensor, Slot, Symmetry};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
