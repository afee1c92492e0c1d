//! Monte Carlo experiments for the S-IM-OFDM link: BER sweeps, sensing
//! accuracy, SINR and power-split reports, with CSV output.

pub mod ber;
pub mod config;
pub mod demo;
pub mod error;
pub mod output;
pub mod rmse;
pub mod selftest;
pub mod sinr;

pub use config::{Experiment, ExperimentConfig, Scale};
pub use error::{HarnessError, Result};
pub use output::{Metric, ResultRow};
