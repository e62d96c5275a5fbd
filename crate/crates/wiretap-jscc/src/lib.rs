//! Simulation and closed-form analysis of analog Gaussian sources transmitted
//! over degraded Gaussian wiretap channels whose actual SNR may exceed the
//! design assumption.
//!
//! The crate compares three transmitter designs under a common leakage budget:
//! a separation-based digital scheme, direct uncoded scaling, and a hybrid
//! that superimposes a scaled quantization residual on a digital layer. For
//! each it produces end-to-end distortion across an SNR sweep, a leakage bound
//! at the eavesdropper, an information-theoretic outer bound, and Monte Carlo
//! estimates that cross-check the closed forms.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod model;
pub mod montecarlo;
pub mod quantizer;

pub use error::{Error, Result};
pub use model::{ChannelPoint, SystemConfig, ValidatedConfig};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::model::SystemConfig;

    /// Benchmark design used throughout the tests: unit power and source
    /// variance, 20 dB design SNR, 0 dB eavesdropper SNR, 0.01 bit budget.
    pub(crate) fn bench_config() -> SystemConfig {
        SystemConfig {
            power: 1.0,
            noise_var_design: 0.01,
            noise_var_eve: 1.0,
            source_var: 1.0,
            leakage_budget_bits: 0.01,
        }
    }
}
