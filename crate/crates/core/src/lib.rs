//! Numerical core for intensity-correlation studies of a Λ-type atomic vapor
//! in a longitudinal magnetic field.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure computation:
//!
//! * [`atom`]: steady-state response of the driven three-level Λ system,
//!   in closed form and by direct time integration of the Liouville equation.
//! * [`noise`]: Ornstein–Uhlenbeck model of diode-laser frequency noise.
//! * [`propagation`]: integration of the two circular field components
//!   through the cell.
//! * [`polarimetry`]: detection channels, transmission and rotation angle.
//! * [`correlation`]: fluctuation extraction, normalized cross-correlation
//!   and its closed-form moment expression.
//!
//! All angular frequencies and rates are in rad/s unless stated otherwise;
//! [`units`] holds the conversions used at the IO boundary.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod atom;
pub mod correlation;
mod error;
mod math;
pub mod noise;
pub mod polarimetry;
pub mod propagation;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
