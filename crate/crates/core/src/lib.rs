//! Superposed index-modulated OFDM (S-IM-OFDM) for integrated sensing and
//! communications.
//!
//! The crate is `no_std` with `alloc`. It holds every numerical piece of the
//! link: frame construction ([`waveform`]), radar echoes and time-varying
//! multipath channels ([`channel`]), range/velocity estimation and bounds
//! ([`sensing`]), transmit-side Doppler pre-compensation and SINR analysis
//! ([`compensation`]), bit recovery ([`receiver`]) and single-trial link
//! simulations that compose them ([`link`]).
//!
//! Monte Carlo orchestration, configuration files and CSV output live in the
//! companion `simofdm` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod compensation;
mod error;
pub mod fft;
pub mod link;
pub mod linalg;
pub mod receiver;
pub mod rng;
pub mod sensing;
#[cfg(test)]
mod testutil;
pub mod waveform;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
