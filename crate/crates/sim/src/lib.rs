//! Monte-Carlo harness around `irs-core`: JSON configs, seeded sweeps over
//! the sparsity budget, figure datasets, and the property batteries behind
//! `irs-sim check`.

pub mod checks;
pub mod config;
pub mod harness;
pub mod output;
