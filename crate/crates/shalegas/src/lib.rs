//! Scenario files, file formats, the scenario runner and the studies built on
//! top of `shalegas-core`.
//!
//! * [`config`]: `key = value` scenario files.
//! * [`io`]: Matrix Market, legacy VTK, fracture JSON and raster grids.
//! * [`runner`]: one scenario end to end, with CSV/JSON/VTK outputs.
//! * [`study`]: temporal convergence against a Picard reference and the
//!   permeability-contrast sweep.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod io;
pub mod runner;
pub mod study;

pub use error::{Error, Result};
pub use shalegas_core as core;
