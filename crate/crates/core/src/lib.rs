//! Photon statistics of signal light heralded by thresholded homodyne
//! detection on the idler arm of a two-mode squeezed vacuum.
//!
//! A signal shot is kept when the phase-randomized idler quadrature satisfies
//! `|x| > x0`. For a large enough threshold the kept signal state is
//! sub-Poissonian. This crate computes the heralding probability, the
//! photon-number distribution, its moments and Mandel Q-factor, radial
//! Husimi and Wigner profiles, and the threshold/optimum problems built on
//! top of them, for ideal and imperfect homodyne detectors.
//!
//! Every analytic result has an independent check in [`oracles`]: direct
//! quadrature of the defining integrals and a shot-level Monte Carlo of the
//! experiment.
//!
//! Grid-shaped work (Monte Carlo batches, sweeps, lambda scans, radial
//! profiles) runs on rayon when the default `parallel` feature is enabled and
//! sequentially otherwise, with identical results.

pub mod error;
pub mod figures;
pub mod oracles;
pub mod par;
pub mod params;
pub mod phase_space;
pub mod report;
pub mod solvers;
pub mod special;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use params::{AcceptanceWindow, DetectorModel, Interval, Squeezing};
pub use stats::{ConditionalStatistics, Ordering};

/// Crate version, embedded in output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
