//! Spectral analysis of the Fibonacci Hamiltonian, its Sturmian relatives
//! and the square and cubic operators built from them.
//!
//! Everything here is `no_std` with `alloc`. Numerical routines are generic
//! over [`Real`]; `f64` is provided, wider types come from downstream crates.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod approximant;
pub mod bounds;
mod counting;
pub mod eigen;
pub mod error;
pub mod ids;
pub mod interval;
pub mod real;
pub mod sumset;
pub mod trace;
pub mod word;

pub use error::{Error, Result};
pub use real::{PrecisionContext, Real};
