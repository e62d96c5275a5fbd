//! Block-level simulation of the uncoded and idealized hybrid schemes through
//! AWGN main and eavesdropper channels, with MMSE receivers, empirical
//! distortion, and covariance-based Gaussian mutual-information estimates.
//!
//! Reproducibility contract: every trial derives its randomness from
//! `(seed, trial_index, stream_role)` substreams, and partial results are
//! reduced in ascending trial order, so a run is bit-identical no matter how
//! many worker threads execute it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    hybrid_leakage_bits, uncoded_kappa, uncoded_leakage_bits, DistortionPoint, HybridParams,
    Provenance, Scheme, UncodedParams,
};
use crate::error::{Error, Result};
use crate::model::{ChannelPoint, ValidatedConfig};

const DEFAULT_SAMPLE_CAP: u64 = 100_000_000;

fn default_sample_cap() -> u64 {
    DEFAULT_SAMPLE_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSettings {
    /// Samples per trial (the block length n).
    pub block_length: u32,
    pub trials: u64,
    pub seed: u64,
    /// Cap on block_length * trials, guarding against runaway configs.
    #[serde(default = "default_sample_cap")]
    pub max_samples: u64,
}

impl MonteCarloSettings {
    pub fn new(block_length: u32, trials: u64, seed: u64) -> Self {
        MonteCarloSettings {
            block_length,
            trials,
            seed,
            max_samples: DEFAULT_SAMPLE_CAP,
        }
    }

    pub fn total_samples(&self) -> u128 {
        self.block_length as u128 * self.trials as u128
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_length < 1 {
            return Err(Error::Settings("block_length must be >= 1".into()));
        }
        if self.trials < 1 {
            return Err(Error::Settings("trials must be >= 1".into()));
        }
        let requested = self.total_samples();
        if requested > self.max_samples as u128 {
            return Err(Error::SampleBudgetExceeded {
                requested,
                cap: self.max_samples,
            });
        }
        Ok(())
    }
}

// Stream roles keyed into the per-trial RNG substream id. Keeping each signal
// on its own stream makes a trial's draws independent of block layout.
const ROLE_STRIDE: u64 = 8;
pub(crate) const ROLE_SOURCE: u64 = 0;
const ROLE_RESIDUAL: u64 = 1;
pub(crate) const ROLE_DIGITAL: u64 = 2;
pub(crate) const ROLE_MAIN_NOISE: u64 = 3;
const ROLE_EVE_NOISE: u64 = 4;
pub(crate) const ROLE_TRAIN: u64 = 5;

/// Zero-mean Gaussian block with standard deviation `sd` on the substream
/// identified by `(seed, trial, role)`.
pub(crate) fn gaussian_block(seed: u64, trial: u64, role: u64, sd: f64, n: usize) -> Vec<f64> {
    if sd == 0.0 {
        return vec![0.0; n];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial * ROLE_STRIDE + role);
    (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// One simulated block: source decomposition, channel input, noises, and both
/// channel outputs. Uncoded blocks leave the digital-layer vectors at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialBatch {
    pub source: Vec<f64>,
    pub quantized: Vec<f64>,
    pub residual: Vec<f64>,
    pub digital_signal: Vec<f64>,
    pub channel_input: Vec<f64>,
    pub main_noise: Vec<f64>,
    pub eve_noise: Vec<f64>,
    pub main_rx: Vec<f64>,
    pub eve_rx: Vec<f64>,
}

impl TrialBatch {
    pub fn uncoded(
        config: &ValidatedConfig,
        params: &UncodedParams,
        point: &ChannelPoint,
        settings: &MonteCarloSettings,
        trial: u64,
    ) -> TrialBatch {
        let n = settings.block_length as usize;
        let seed = settings.seed;
        let source = gaussian_block(seed, trial, ROLE_SOURCE, config.source_var.sqrt(), n);
        let main_noise = gaussian_block(seed, trial, ROLE_MAIN_NOISE, point.noise_var().sqrt(), n);
        let eve_noise = gaussian_block(seed, trial, ROLE_EVE_NOISE, config.noise_var_eve.sqrt(), n);
        let channel_input: Vec<f64> = source.iter().map(|v| params.kappa * v).collect();
        let main_rx: Vec<f64> =
            channel_input.iter().zip(&main_noise).map(|(x, w)| x + w).collect();
        let eve_rx: Vec<f64> =
            channel_input.iter().zip(&eve_noise).map(|(x, w)| x + w).collect();
        TrialBatch {
            residual: source.clone(),
            quantized: vec![0.0; n],
            digital_signal: vec![0.0; n],
            source,
            channel_input,
            main_noise,
            eve_noise,
            main_rx,
            eve_rx,
        }
    }

    pub fn hybrid_idealized(
        config: &ValidatedConfig,
        params: &HybridParams,
        point: &ChannelPoint,
        settings: &MonteCarloSettings,
        trial: u64,
    ) -> TrialBatch {
        let n = settings.block_length as usize;
        let seed = settings.seed;
        // Ideal test-channel quantizer: v splits into independent v_q and u
        // with the rate-distortion variances.
        let residual_var = config.source_var * (2.0f64).powf(-2.0 * params.rate_bits);
        let quantized = gaussian_block(
            seed,
            trial,
            ROLE_SOURCE,
            (config.source_var - residual_var).max(0.0).sqrt(),
            n,
        );
        let residual = gaussian_block(seed, trial, ROLE_RESIDUAL, residual_var.sqrt(), n);
        let source: Vec<f64> = quantized.iter().zip(&residual).map(|(q, u)| q + u).collect();
        // Ideal digital layer: the secure message index looks like an
        // independent Gaussian at the allotted power.
        let digital_signal = gaussian_block(
            seed,
            trial,
            ROLE_DIGITAL,
            (params.alpha * config.power).sqrt(),
            n,
        );
        let main_noise = gaussian_block(seed, trial, ROLE_MAIN_NOISE, point.noise_var().sqrt(), n);
        let eve_noise = gaussian_block(seed, trial, ROLE_EVE_NOISE, config.noise_var_eve.sqrt(), n);
        let channel_input: Vec<f64> = digital_signal
            .iter()
            .zip(&residual)
            .map(|(s, u)| s + params.residual_scale * u)
            .collect();
        let main_rx: Vec<f64> =
            channel_input.iter().zip(&main_noise).map(|(x, w)| x + w).collect();
        let eve_rx: Vec<f64> =
            channel_input.iter().zip(&eve_noise).map(|(x, w)| x + w).collect();
        TrialBatch {
            source,
            quantized,
            residual,
            digital_signal,
            channel_input,
            main_noise,
            eve_noise,
            main_rx,
            eve_rx,
        }
    }
}

/// Mean of a simulated quantity with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorStats {
    pub mean: f64,
    pub std_error: f64,
    pub sample_count: u64,
}

impl EstimatorStats {
    /// Stats of a per-sample quantity from its first two power sums.
    fn from_sums(sum: f64, sum_sq: f64, n: u64) -> EstimatorStats {
        let nf = n as f64;
        let mean = sum / nf;
        let var = (sum_sq / nf - mean * mean).max(0.0);
        EstimatorStats {
            mean,
            std_error: (var / nf).sqrt(),
            sample_count: n,
        }
    }
}

/// Symmetric 2x2 covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cov2 {
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
}

impl Cov2 {
    fn from_power_sums(n: u64, sx: f64, sy: f64, sxx: f64, syy: f64, sxy: f64) -> Cov2 {
        let nf = n as f64;
        let mx = sx / nf;
        let my = sy / nf;
        let scale = nf / (nf - 1.0);
        Cov2 {
            var_x: (sxx / nf - mx * mx).max(0.0) * scale,
            var_y: (syy / nf - my * my).max(0.0) * scale,
            cov_xy: (sxy / nf - mx * my) * scale,
        }
    }

    pub fn correlation_sq(&self) -> f64 {
        if self.var_x <= 0.0 || self.var_y <= 0.0 {
            return 0.0;
        }
        self.cov_xy * self.cov_xy / (self.var_x * self.var_y)
    }
}

/// Mutual information in bits between two jointly Gaussian scalars with the
/// given covariance: `0.5*log2(var_x*var_y/det) = -0.5*log2(1 - rho^2)`.
pub fn gaussian_mi_from_cov(cov: &Cov2) -> Result<f64> {
    let finite = cov.var_x.is_finite() && cov.var_y.is_finite() && cov.cov_xy.is_finite();
    if !finite || cov.var_x < 0.0 || cov.var_y < 0.0 {
        return Err(Error::NotPositiveSemidefinite);
    }
    if cov.var_x == 0.0 || cov.var_y == 0.0 {
        // A constant is independent of anything; any claimed covariance with
        // it contradicts positive semidefiniteness.
        return if cov.cov_xy == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::NotPositiveSemidefinite)
        };
    }
    let rho_sq = cov.correlation_sq();
    if rho_sq >= 1.0 {
        return Err(Error::NotPositiveSemidefinite);
    }
    Ok(-0.5 * (-rho_sq).ln_1p() / std::f64::consts::LN_2)
}

/// Delta-method standard error of a Gaussian-MI estimate built from a sample
/// correlation over `n` points, with a floor for near-zero correlation where
/// the estimate is chi-square rather than normal.
fn mi_std_error(rho_sq: f64, n: u64) -> f64 {
    let nf = n as f64;
    (rho_sq + 1.0 / nf).sqrt() / (std::f64::consts::LN_2 * nf.sqrt())
}

/// Unbiased sample covariance of two equal-length streams.
pub fn empirical_covariance(xs: &[f64], ys: &[f64]) -> Result<Cov2> {
    if xs.len() != ys.len() {
        return Err(Error::CovarianceInput("streams must have equal length"));
    }
    if xs.len() < 2 {
        return Err(Error::CovarianceInput("needs at least two samples"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::CovarianceInput("samples must be finite"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    Ok(Cov2 {
        var_x: sxx / (n - 1.0),
        var_y: syy / (n - 1.0),
        cov_xy: sxy / (n - 1.0),
    })
}

/// Sample mean of (v - v_hat) * y. For a true MMSE estimate this is
/// statistically indistinguishable from zero (orthogonality principle);
/// a biased estimator shows up as a significant offset.
pub fn mmse_orthogonality_check(residuals: &[f64], observations: &[f64]) -> f64 {
    debug_assert_eq!(residuals.len(), observations.len());
    if residuals.is_empty() {
        return 0.0;
    }
    let sum: f64 = residuals.iter().zip(observations).map(|(e, y)| e * y).sum();
    sum / residuals.len() as f64
}

/// Per-trial accumulator; merged across trials in ascending trial order.
#[derive(Debug, Clone, Copy, Default)]
struct TrialSums {
    n: u64,
    err2: f64,
    err4: f64,
    pow2: f64,
    pow4: f64,
    v: f64,
    ye: f64,
    v2: f64,
    ye2: f64,
    vye: f64,
    orth: f64,
    orth2: f64,
    u2: f64,
    u4: f64,
    vqu: f64,
    vqu2: f64,
}

impl TrialSums {
    fn merge(mut self, other: &TrialSums) -> TrialSums {
        self.n += other.n;
        self.err2 += other.err2;
        self.err4 += other.err4;
        self.pow2 += other.pow2;
        self.pow4 += other.pow4;
        self.v += other.v;
        self.ye += other.ye;
        self.v2 += other.v2;
        self.ye2 += other.ye2;
        self.vye += other.vye;
        self.orth += other.orth;
        self.orth2 += other.orth2;
        self.u2 += other.u2;
        self.u4 += other.u4;
        self.vqu += other.vqu;
        self.vqu2 += other.vqu2;
        self
    }

    /// Folds in one sample: estimation error `e` against receiver input `y`,
    /// channel input `x`, the eavesdropper pair `(v, y_e)`, and the source
    /// decomposition pair `(v_q, u)`.
    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, e: f64, y: f64, x: f64, v: f64, ye: f64, vq: f64, u: f64) {
        self.n += 1;
        self.err2 += e * e;
        self.err4 += e * e * e * e;
        self.pow2 += x * x;
        self.pow4 += x * x * x * x;
        self.v += v;
        self.ye += ye;
        self.v2 += v * v;
        self.ye2 += ye * ye;
        self.vye += v * ye;
        self.orth += e * y;
        self.orth2 += e * y * e * y;
        self.u2 += u * u;
        self.u4 += u * u * u * u;
        self.vqu += vq * u;
        self.vqu2 += vq * u * vq * u;
    }
}

/// Empirical second-moment agreement between the sampled source decomposition
/// and the design it was drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestChannelReport {
    /// Empirical var(u); should match `residual_var_target`.
    pub residual_var: EstimatorStats,
    /// Empirical mean of v_q*u; should be statistically zero.
    pub quantized_residual_cross: EstimatorStats,
    pub residual_var_target: f64,
}

/// Everything measured in one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    /// Empirical distortion packaged as a curve point (Monte Carlo provenance,
    /// analytic leakage bound).
    pub point: DistortionPoint,
    pub distortion: EstimatorStats,
    /// Sample mean power of the channel input.
    pub power: EstimatorStats,
    /// Power the scheme was designed to emit.
    pub power_target: f64,
    /// Gaussian-MI estimate of the leakage from the empirical (v, y_e)
    /// covariance.
    pub leakage_bits: EstimatorStats,
    pub leakage_bound_bits: f64,
    /// Sample mean of (v - v_hat) * y.
    pub orthogonality: EstimatorStats,
    pub eve_covariance: Cov2,
    pub test_channel: Option<TestChannelReport>,
    pub settings: MonteCarloSettings,
}

fn report_from_sums(
    sums: TrialSums,
    scheme: Scheme,
    snr_a_linear: f64,
    leakage_bound_bits: f64,
    power_target: f64,
    test_channel: Option<f64>,
    settings: &MonteCarloSettings,
) -> Result<SimulationReport> {
    let n = sums.n;
    let distortion = EstimatorStats::from_sums(sums.err2, sums.err4, n);
    let eve_covariance = Cov2::from_power_sums(n, sums.v, sums.ye, sums.v2, sums.ye2, sums.vye);
    let mi = gaussian_mi_from_cov(&eve_covariance)?;
    let leakage_bits = EstimatorStats {
        mean: mi,
        std_error: mi_std_error(eve_covariance.correlation_sq(), n),
        sample_count: n,
    };
    Ok(SimulationReport {
        point: DistortionPoint {
            snr_a_linear,
            distortion: distortion.mean,
            leakage_bound_bits,
            scheme,
            provenance: Provenance::MonteCarlo,
        },
        distortion,
        power: EstimatorStats::from_sums(sums.pow2, sums.pow4, n),
        power_target,
        leakage_bits,
        leakage_bound_bits,
        orthogonality: EstimatorStats::from_sums(sums.orth, sums.orth2, n),
        eve_covariance,
        test_channel: test_channel.map(|target| TestChannelReport {
            residual_var: EstimatorStats::from_sums(sums.u2, sums.u4, n),
            quantized_residual_cross: EstimatorStats::from_sums(sums.vqu, sums.vqu2, n),
            residual_var_target: target,
        }),
        settings: *settings,
    })
}

/// Simulates the uncoded scheme: `x = kappa*v`, MMSE estimate of v from y.
/// Valid at any actual SNR, above or below design.
pub fn simulate_uncoded(
    config: &ValidatedConfig,
    point: &ChannelPoint,
    settings: &MonteCarloSettings,
) -> Result<SimulationReport> {
    settings.validate()?;
    let params = uncoded_kappa(config);
    let kappa = params.kappa;
    let noise_var = point.noise_var();
    let analog_power = kappa * kappa * config.source_var;
    let gain = kappa * config.source_var / (analog_power + noise_var);

    let per_trial: Vec<TrialSums> = (0..settings.trials)
        .into_par_iter()
        .map(|trial| {
            let batch = TrialBatch::uncoded(config, &params, point, settings, trial);
            let mut sums = TrialSums::default();
            for i in 0..batch.source.len() {
                let v = batch.source[i];
                let y = batch.main_rx[i];
                let e = v - gain * y;
                sums.push(e, y, batch.channel_input[i], v, batch.eve_rx[i], 0.0, v);
            }
            sums
        })
        .collect();
    let total = per_trial.iter().fold(TrialSums::default(), |acc, s| acc.merge(s));

    report_from_sums(
        total,
        Scheme::Uncoded,
        point.snr(config),
        uncoded_leakage_bits(config, kappa),
        analog_power,
        None,
        settings,
    )
}

/// Simulates the hybrid scheme with an ideal digital layer: above the design
/// SNR the receiver decodes `v_sec` exactly, cancels it, recovers `v_q`, and
/// adds an MMSE estimate of the residual.
pub fn simulate_hybrid_idealized(
    config: &ValidatedConfig,
    params: &HybridParams,
    point: &ChannelPoint,
    settings: &MonteCarloSettings,
) -> Result<SimulationReport> {
    settings.validate()?;
    if !point.in_design_region(config) {
        return Err(Error::BelowDesignSnr {
            actual: point.noise_var(),
            design: config.noise_var_design,
        });
    }
    let residual_var = config.source_var * (2.0f64).powf(-2.0 * params.rate_bits);
    let kappa = params.residual_scale;
    let noise_var = point.noise_var();
    let gain = kappa * residual_var / (kappa * kappa * residual_var + noise_var);

    let per_trial: Vec<TrialSums> = (0..settings.trials)
        .into_par_iter()
        .map(|trial| {
            let batch = TrialBatch::hybrid_idealized(config, params, point, settings, trial);
            let mut sums = TrialSums::default();
            for i in 0..batch.source.len() {
                let v = batch.source[i];
                let y = batch.main_rx[i];
                let cleaned = y - batch.digital_signal[i];
                let e = batch.residual[i] - gain * cleaned;
                sums.push(
                    e,
                    cleaned,
                    batch.channel_input[i],
                    v,
                    batch.eve_rx[i],
                    batch.quantized[i],
                    batch.residual[i],
                );
            }
            sums
        })
        .collect();
    let total = per_trial.iter().fold(TrialSums::default(), |acc, s| acc.merge(s));

    report_from_sums(
        total,
        Scheme::Hybrid,
        point.snr(config),
        hybrid_leakage_bits(config, params.alpha),
        config.power,
        Some(residual_var),
        settings,
    )
}

/// Which of the two simulable schemes to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulatedScheme {
    Uncoded,
    HybridIdealized,
}

/// Gaussian-MI leakage estimate from the empirical (v, y_e) covariance of a
/// full simulation run.
pub fn empirical_leakage(
    config: &ValidatedConfig,
    scheme: SimulatedScheme,
    point: &ChannelPoint,
    settings: &MonteCarloSettings,
) -> Result<(f64, EstimatorStats)> {
    let report = match scheme {
        SimulatedScheme::Uncoded => simulate_uncoded(config, point, settings)?,
        SimulatedScheme::HybridIdealized => {
            let params = crate::analytic::hybrid_alpha(config);
            simulate_hybrid_idealized(config, &params, point, settings)?
        }
    };
    Ok((report.leakage_bits.mean, report.leakage_bits))
}
