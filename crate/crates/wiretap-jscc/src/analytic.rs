//! Closed-form distortion and leakage for the three transmitter designs plus
//! the converse bound.
//!
//! All solvers take a [`ValidatedConfig`], fix the design at the config's
//! design SNR, and then evaluate distortion at an arbitrary [`ChannelPoint`],
//! which is how SNR mismatch enters: the design never learns the actual SNR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cap, ChannelPoint, ValidatedConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Separation,
    Uncoded,
    Hybrid,
    OuterBound,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Separation,
        Scheme::Uncoded,
        Scheme::Hybrid,
        Scheme::OuterBound,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Separation => "separation",
            Scheme::Uncoded => "uncoded",
            Scheme::Hybrid => "hybrid",
            Scheme::OuterBound => "outer_bound",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "separation" => Ok(Scheme::Separation),
            "uncoded" => Ok(Scheme::Uncoded),
            "hybrid" => Ok(Scheme::Hybrid),
            "outer_bound" => Ok(Scheme::OuterBound),
            other => Err(format!(
                "unknown scheme {other:?}, expected one of: separation, uncoded, hybrid, outer_bound"
            )),
        }
    }
}

/// Whether a distortion value came from a closed form or from simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    MonteCarlo,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::Analytic => "analytic",
            Provenance::MonteCarlo => "monte_carlo",
        })
    }
}

/// One point on a distortion-vs-SNR curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionPoint {
    /// Actual main-channel SNR, linear.
    pub snr_a_linear: f64,
    /// Mean squared error at the legitimate receiver.
    pub distortion: f64,
    /// Upper bound on eavesdropper leakage in bits per use.
    pub leakage_bound_bits: f64,
    pub scheme: Scheme,
    pub provenance: Provenance,
}

/// Separation design: wiretap-coded digital transmission of a quantized source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationParams {
    /// Secure quantization rate in bits per channel use.
    pub rate_bits: f64,
}

/// Uncoded design: the source scaled straight onto the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncodedParams {
    /// Amplitude scaling applied to the source.
    pub kappa: f64,
}

/// Hybrid design: digital layer at power `alpha * P` superimposed on the
/// scaled quantization residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridParams {
    /// Fraction of transmit power spent on the digital layer.
    pub alpha: f64,
    /// Secure rate of the digital layer in bits per channel use.
    pub rate_bits: f64,
    /// Amplitude scaling applied to the quantization residual.
    pub residual_scale: f64,
    /// Design-point MMSE coefficient for estimating the residual from the
    /// cleaned-up channel output.
    pub beta_mmse: f64,
}

/// Largest secure rate supportable with the whole leakage budget spent on the
/// digital layer.
pub fn separation_rate(config: &ValidatedConfig) -> SeparationParams {
    let rate_bits =
        cap(config.snr_design()) - cap(config.snr_eve()) + config.leakage_budget_bits;
    SeparationParams { rate_bits }
}

pub fn separation_distortion(config: &ValidatedConfig, point: &ChannelPoint) -> DistortionPoint {
    // The digital layer decodes only at or above its design SNR; below it the
    // receiver falls back to the source mean.
    let params = separation_rate(config);
    let distortion = if point.in_design_region(config) {
        config.source_var * (2.0f64).powf(-2.0 * params.rate_bits)
    } else {
        config.source_var
    };
    DistortionPoint {
        snr_a_linear: point.snr(config),
        distortion,
        leakage_bound_bits: config.leakage_budget_bits,
        scheme: Scheme::Separation,
        provenance: Provenance::Analytic,
    }
}

/// Largest source scaling whose Gaussian leakage at the eavesdropper stays
/// within the budget.
pub fn uncoded_kappa(config: &ValidatedConfig) -> UncodedParams {
    UncodedParams {
        kappa: (config.analog_power_budget() / config.source_var).sqrt(),
    }
}

pub fn uncoded_distortion(
    config: &ValidatedConfig,
    params: &UncodedParams,
    point: &ChannelPoint,
) -> DistortionPoint {
    let analog_power = params.kappa * params.kappa * config.source_var;
    let distortion = config.source_var / (1.0 + analog_power / point.noise_var());
    DistortionPoint {
        snr_a_linear: point.snr(config),
        distortion,
        leakage_bound_bits: uncoded_leakage_bits(config, params.kappa),
        scheme: Scheme::Uncoded,
        provenance: Provenance::Analytic,
    }
}

/// Exact leakage of the uncoded scheme at the eavesdropper, in bits per use.
/// Scale-invariant in the sign of `kappa`.
pub fn uncoded_leakage_bits(config: &ValidatedConfig, kappa: f64) -> f64 {
    cap(kappa * kappa * config.source_var / config.noise_var_eve)
}

/// Splits power between the layers so the analog layer alone exhausts the
/// leakage budget, then sizes the digital layer for the remaining power.
pub fn hybrid_alpha(config: &ValidatedConfig) -> HybridParams {
    let analog_power = config.analog_power_budget();
    let alpha = (1.0 - analog_power / config.power).clamp(0.0, 1.0);
    let rate_bits = hybrid_rate(config, alpha);
    let residual_var = config.source_var * (2.0f64).powf(-2.0 * rate_bits);
    HybridParams {
        alpha,
        rate_bits,
        residual_scale: (analog_power / residual_var).sqrt(),
        beta_mmse: analog_power / (analog_power + config.noise_var_eve),
    }
}

/// Secure rate of the digital layer when it gets power `alpha * P` and the
/// analog layer, treated as noise, gets the rest.
///
/// `alpha` must lie in `[0, 1]`; values outside are a caller bug.
pub fn hybrid_rate(config: &ValidatedConfig, alpha: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&alpha));
    let digital_power = alpha * config.power;
    let analog_power = (1.0 - alpha) * config.power;
    cap(digital_power / (analog_power + config.noise_var_design))
        - cap(digital_power / (analog_power + config.noise_var_eve))
}

/// Leakage bound for a hybrid design with digital power fraction `alpha`:
/// the analog layer is what the eavesdropper sees after the secrecy code
/// blinds the digital layer.
pub fn hybrid_leakage_bits(config: &ValidatedConfig, alpha: f64) -> f64 {
    cap((1.0 - alpha) * config.power / config.noise_var_eve)
}

pub fn hybrid_distortion(
    config: &ValidatedConfig,
    params: &HybridParams,
    point: &ChannelPoint,
) -> DistortionPoint {
    let analog_power = (1.0 - params.alpha) * config.power;
    let distortion = if point.in_design_region(config) {
        let quantizer_mse = config.source_var * (2.0f64).powf(-2.0 * params.rate_bits);
        quantizer_mse / (1.0 + analog_power / point.noise_var())
    } else {
        config.source_var
    };
    DistortionPoint {
        snr_a_linear: point.snr(config),
        distortion,
        leakage_bound_bits: hybrid_leakage_bits(config, params.alpha),
        scheme: Scheme::Hybrid,
        provenance: Provenance::Analytic,
    }
}

/// Converse: no scheme under the same budget can beat this distortion. Only
/// defined while the actual channel is no noisier than the eavesdropper's.
pub fn outer_bound_distortion(
    config: &ValidatedConfig,
    point: &ChannelPoint,
) -> Result<DistortionPoint> {
    if point.noise_var() > config.noise_var_eve {
        return Err(Error::OuterBoundDomain {
            actual: point.noise_var(),
            eve: config.noise_var_eve,
        });
    }
    let rate_bits =
        cap(point.snr(config)) - cap(config.snr_eve()) + config.leakage_budget_bits;
    Ok(DistortionPoint {
        snr_a_linear: point.snr(config),
        distortion: config.source_var * (2.0f64).powf(-2.0 * rate_bits),
        leakage_bound_bits: config.leakage_budget_bits,
        scheme: Scheme::OuterBound,
        provenance: Provenance::Analytic,
    })
}

/// Distortion the eavesdropper itself cannot go below, whatever its channel:
/// the budget caps what its observation can reveal about the source.
pub fn eavesdropper_distortion_floor(config: &ValidatedConfig) -> f64 {
    config.source_var * (2.0f64).powf(-2.0 * config.leakage_budget_bits)
}

/// Least-squares slope of `log2(distortion)` against `log2(snr)`.
///
/// Points are `(snr_linear, distortion)` pairs, both positive and finite,
/// with strictly increasing SNR; at least two are needed.
pub fn distortion_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::ExponentFit("needs at least two points"));
    }
    for &(snr, distortion) in points {
        let ok = snr.is_finite() && snr > 0.0 && distortion.is_finite() && distortion > 0.0;
        if !ok {
            return Err(Error::ExponentFit("points must be positive and finite"));
        }
    }
    if points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::ExponentFit("snr values must be strictly increasing"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - x_mean) * (y - y_mean);
        sxx += (x - x_mean) * (x - x_mean);
    }
    Ok(sxy / sxx)
}
