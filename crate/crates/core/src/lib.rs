//! Closed-loop deep brain stimulation simulation.
//!
//! A beta-oscillation [`plant`] is stepped with a DBS pulse train whose
//! amplitude is set by a stimulation [`control`]ler fed from the [`dsp`]
//! beta-ARV chain. [`metrics`] scores the resulting traces and
//! [`dataset`] writes them to disk.

// Validation is written as `!(x > 0.0)` on purpose so that NaN fails it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod control;
pub mod dataset;
pub mod dsp;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod plant;

pub use error::{Error, Result};
