//! Driven quantum Kerr oscillator with weak high-order nonlinearities.
//!
//! Three descriptions of the same stationary physics live here:
//! the full Lindblad master equation in a truncated Fock space ([`lindblad`]),
//! a region-basis master equation built from classical orbits ([`reduced`]),
//! and a one-dimensional Fokker–Planck equation in quasienergy ([`fpe`]).
//! Frequencies are in the same (arbitrary) units as `alpha`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classical;
pub mod error;
pub mod fock;
pub mod fpe;
pub mod lindblad;
pub mod numerics;
pub mod params;
pub mod peaks;
pub mod reduced;
pub mod spectrum;
pub mod tunneling;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use params::ModelParams;

pub(crate) mod prelude {
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    pub use core::f64::consts::PI;
    pub use num_traits::Float;
}
