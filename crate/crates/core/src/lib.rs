//! Uplink spectral-efficiency analysis for multi-antenna base stations whose
//! receiver chains distort the signal.
//!
//! Each antenna applies a memoryless nonlinearity to its Gaussian input. The
//! Bussgang decomposition splits that output into a scaled copy of the
//! input plus a distortion term that is uncorrelated with it but, in
//! general, correlated across antennas. The crate computes the distortion
//! covariance analytically (third-order AM-AM model) and empirically (any
//! map), builds MR / distortion-aware MR / distortion-aware MMSE combiners,
//! and estimates ergodic spectral efficiency by Monte Carlo simulation with
//! and without the cross-antenna distortion correlation.
//!
//! Module overview:
//!
//! - [`numerics`]: complex matrices, Hermitian solves, pseudoinverse, seeded streams
//! - [`channel`]: scenario configuration and i.i.d. Rayleigh channel draws
//! - [`hardware`]: nonlinearity models and Bussgang decompositions
//! - [`combining`]: receive combiners
//! - [`se`]: SINR expressions and ergodic SE
//! - [`closedform`]: closed-form distortion moments for i.i.d. Rayleigh fading
//! - [`harness`]: experiment drivers, config files and CSV output
//! - [`parallel`]: trial-level execution (rayon or sequential)

pub mod channel;
pub mod closedform;
pub mod combining;
mod error;
pub mod hardware;
pub mod harness;
pub mod numerics;
pub mod parallel;
pub mod se;

pub use error::{Error, Result};
