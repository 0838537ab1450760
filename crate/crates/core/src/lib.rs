//! Reflection resource allocation for modular IRS-aided multi-pair networks.
//!
//! The pipeline selects which IRS modules to switch on through a group-sparse
//! convex relaxation solved by bisection over the common SINR target, then
//! refines transmit powers and reflection phases on the chosen modules by
//! alternating partial-linearization steps.
//!
//! The crate is `no_std` and only needs `alloc`. All convex subproblems go
//! through the bundled second-order cone solver in [`conic`].

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub use num_complex::Complex64 as C64;

pub mod altopt;
pub mod channel;
pub mod conic;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod sparsity;
