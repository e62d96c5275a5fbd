//! Channel model: system parameters, validation, and the handful of
//! information-theoretic helpers everything else is built on.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ConfigErrors, Error, Result};

/// Parameters of one wiretap system design. All variances are linear (not dB).
///
/// `noise_var_design` is the main-channel noise variance the transmitter was
/// designed for; the noise the receiver actually sees lives in [`ChannelPoint`]
/// so one config can be evaluated across a whole SNR sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Transmit power constraint P.
    pub power: f64,
    /// Main-channel noise variance assumed at design time.
    pub noise_var_design: f64,
    /// Eavesdropper channel noise variance.
    pub noise_var_eve: f64,
    /// Variance of the Gaussian source.
    pub source_var: f64,
    /// Allowed leakage to the eavesdropper, in bits per channel use.
    pub leakage_budget_bits: f64,
}

impl SystemConfig {
    /// Design-point SNR of the main channel.
    pub fn snr_design(&self) -> f64 {
        self.power / self.noise_var_design
    }

    /// SNR of the eavesdropper channel.
    pub fn snr_eve(&self) -> f64 {
        self.power / self.noise_var_eve
    }

    /// Largest transmit power whose Gaussian leakage at the eavesdropper still
    /// fits the budget: `noise_var_eve * (2^(2*leakage_budget_bits) - 1)`.
    pub fn analog_power_budget(&self) -> f64 {
        self.noise_var_eve * ((2.0f64).powf(2.0 * self.leakage_budget_bits) - 1.0)
    }

    /// Every problem with this config, or empty if it is usable.
    pub fn validation_errors(&self) -> Vec<ConfigError> {
        let mut errors = Vec::new();
        let pos = |name, value: f64, errors: &mut Vec<ConfigError>| {
            let ok = value.is_finite() && value > 0.0;
            if !ok {
                errors.push(ConfigError::NonPositiveParameter { name, value });
            }
            ok
        };
        let power_ok = pos("power", self.power, &mut errors);
        let design_ok = pos("noise_var_design", self.noise_var_design, &mut errors);
        let eve_ok = pos("noise_var_eve", self.noise_var_eve, &mut errors);
        pos("source_var", self.source_var, &mut errors);
        let budget_ok = self.leakage_budget_bits.is_finite() && self.leakage_budget_bits >= 0.0;
        if !budget_ok {
            errors.push(ConfigError::NegativeLeakageBudget {
                value: self.leakage_budget_bits,
            });
        }
        if design_ok && eve_ok && self.noise_var_design >= self.noise_var_eve {
            errors.push(ConfigError::EveNotDegraded {
                design: self.noise_var_design,
                eve: self.noise_var_eve,
            });
        }
        if power_ok && eve_ok && budget_ok {
            let required = self.analog_power_budget();
            if required > self.power {
                errors.push(ConfigError::InfeasibleLeakageBudget {
                    required,
                    power: self.power,
                });
            }
        }
        errors
    }

    pub fn validated(self) -> Result<ValidatedConfig, ConfigErrors> {
        let errors = self.validation_errors();
        if errors.is_empty() {
            Ok(ValidatedConfig(self))
        } else {
            Err(ConfigErrors(errors))
        }
    }
}

/// A [`SystemConfig`] that passed validation. The solvers only accept this
/// type, so they never have to re-check positivity, degradedness, or budget
/// feasibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedConfig(SystemConfig);

impl std::ops::Deref for ValidatedConfig {
    type Target = SystemConfig;

    fn deref(&self) -> &SystemConfig {
        &self.0
    }
}

impl ValidatedConfig {
    pub fn as_config(&self) -> &SystemConfig {
        &self.0
    }

    /// Channel point at the given actual main-channel SNR in dB.
    pub fn point_at_snr_db(&self, snr_db: f64) -> Result<ChannelPoint> {
        let snr = snr_db_to_linear(snr_db);
        if !snr.is_finite() || snr <= 0.0 {
            return Err(Error::SnrDomain(snr));
        }
        ChannelPoint::from_noise_var(self.power / snr)
    }

    /// Channel point sitting exactly at the design SNR.
    pub fn design_point(&self) -> ChannelPoint {
        ChannelPoint {
            noise_var_actual: self.noise_var_design,
        }
    }
}

/// Actual main-channel condition at evaluation time, which may be better than
/// the design assumption (SNR mismatch).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    noise_var_actual: f64,
}

impl ChannelPoint {
    pub fn from_noise_var(noise_var_actual: f64) -> Result<Self> {
        if !noise_var_actual.is_finite() || noise_var_actual <= 0.0 {
            return Err(Error::NoiseVarDomain(noise_var_actual));
        }
        Ok(ChannelPoint { noise_var_actual })
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var_actual
    }

    /// Actual SNR seen by the receiver under `config`.
    pub fn snr(&self, config: &SystemConfig) -> f64 {
        config.power / self.noise_var_actual
    }

    /// True when the actual channel is at least as good as the design
    /// assumption, i.e. the regime the transmitter was built for.
    pub fn in_design_region(&self, config: &SystemConfig) -> bool {
        self.noise_var_actual <= config.noise_var_design
    }
}

/// Gaussian channel capacity in bits per use, `0.5 * log2(1 + snr)`.
pub fn capacity(snr: f64) -> Result<f64> {
    if !snr.is_finite() || snr < 0.0 {
        return Err(Error::CapacityDomain(snr));
    }
    Ok(cap(snr))
}

/// Capacity without the domain check, for callers that hold an SNR derived
/// from a [`ValidatedConfig`].
pub(crate) fn cap(snr: f64) -> f64 {
    debug_assert!(snr >= 0.0);
    0.5 * (1.0 + snr).log2()
}

pub fn snr_db_to_linear(snr_db: f64) -> f64 {
    10.0f64.powf(snr_db / 10.0)
}

pub fn snr_linear_to_db(snr_linear: f64) -> Result<f64> {
    if !snr_linear.is_finite() || snr_linear <= 0.0 {
        return Err(Error::SnrDomain(snr_linear));
    }
    Ok(10.0 * snr_linear.log10())
}
