//! Virtual ferrofluid laboratory.
//!
//! A memristive colloid model programmed with quasi-DC bias and read out
//! through emulated two-port RF sweeps, plus the machinery to script
//! experiments, close control loops, classify digits in memory and train a
//! reservoir readout.

pub mod analysis;
pub mod control;
pub mod error;
pub mod experiments;
pub mod ffmodel;
pub mod instruments;
pub mod rf;
pub mod reservoir;
pub mod script;

pub use error::{Error, Result};
