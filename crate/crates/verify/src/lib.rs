//! Manifest-driven runs of the `bachlike-core` identity suites.
//!
//! A TOML [`manifest::Manifest`] names geometries, identities and numerical
//! settings; [`run::run_suite`] evaluates them and returns a versioned
//! [`report::Report`] that serializes to deterministic JSON.

pub mod error;
pub mod manifest;
pub mod report;
pub mod run;

pub use error::{Error, Result};
pub use manifest::{Manifest, Overrides};
pub use report::Report;
pub use run::{run_grid, run_suite};
