//! Independent verification routes for the analytic pipeline.
//!
//! [`qn_quadrature`] integrates the defining quadrature densities directly;
//! [`monte_carlo_experiment`] simulates the heralding experiment shot by
//! shot. Neither uses the `q_n` recurrences or the moment closed forms.

mod montecarlo;
mod qn;
pub mod quad;

pub use montecarlo::{
    monte_carlo_experiment, sample_detected_quadratures, MonteCarloResult, StandardErrors,
    BATCH_SIZE,
};
pub use qn::{qn_quadrature, smeared_quadrature_pdf};
