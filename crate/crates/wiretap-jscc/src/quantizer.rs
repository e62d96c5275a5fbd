//! Lloyd-Max scalar quantizer, plus a rerun of the hybrid pipeline with a
//! real quantizer in place of the ideal rate-distortion one, to measure how
//! far a practical codebook falls from the ideal curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{hybrid_alpha, HybridParams};
use crate::error::{Error, Result};
use crate::model::{ChannelPoint, ValidatedConfig};
use crate::montecarlo::{
    gaussian_block, simulate_hybrid_idealized, EstimatorStats, MonteCarloSettings,
    SimulationReport, ROLE_DIGITAL, ROLE_MAIN_NOISE, ROLE_SOURCE, ROLE_TRAIN,
};

/// Caps how many training samples a gap measurement materializes; evaluation
/// still spends the full sample budget.
const MAX_TRAIN_SAMPLES: u128 = 1_000_000;

pub(crate) const TRAIN_TOL: f64 = 1e-10;
pub(crate) const TRAIN_MAX_ITER: u32 = 500;

/// A trained scalar quantizer: strictly increasing reconstruction levels and
/// the decision thresholds between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCodebook", into = "RawCodebook")]
pub struct ScalarCodebook {
    levels: Vec<f64>,
    thresholds: Vec<f64>,
    training_distortion: f64,
    training_samples: u64,
    iterations: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCodebook {
    levels: Vec<f64>,
    thresholds: Vec<f64>,
    training_distortion: f64,
    training_samples: u64,
    iterations: u32,
}

impl TryFrom<RawCodebook> for ScalarCodebook {
    type Error = Error;

    fn try_from(raw: RawCodebook) -> Result<ScalarCodebook> {
        if raw.levels.is_empty() {
            return Err(Error::Codebook("levels must not be empty".into()));
        }
        if raw.levels.iter().any(|l| !l.is_finite())
            || raw.thresholds.iter().any(|t| !t.is_finite())
        {
            return Err(Error::Codebook("levels and thresholds must be finite".into()));
        }
        if raw.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Codebook("levels must be strictly increasing".into()));
        }
        if raw.thresholds.len() != raw.levels.len() - 1 {
            return Err(Error::Codebook(format!(
                "expected {} thresholds for {} levels, got {}",
                raw.levels.len() - 1,
                raw.levels.len(),
                raw.thresholds.len()
            )));
        }
        let interleaved = raw
            .thresholds
            .iter()
            .enumerate()
            .all(|(i, t)| raw.levels[i] <= *t && *t <= raw.levels[i + 1]);
        if !interleaved {
            return Err(Error::Codebook(
                "each threshold must lie between its adjacent levels".into(),
            ));
        }
        if !raw.training_distortion.is_finite() || raw.training_distortion < 0.0 {
            return Err(Error::Codebook("training_distortion must be finite and >= 0".into()));
        }
        Ok(ScalarCodebook {
            levels: raw.levels,
            thresholds: raw.thresholds,
            training_distortion: raw.training_distortion,
            training_samples: raw.training_samples,
            iterations: raw.iterations,
        })
    }
}

impl From<ScalarCodebook> for RawCodebook {
    fn from(cb: ScalarCodebook) -> RawCodebook {
        RawCodebook {
            levels: cb.levels,
            thresholds: cb.thresholds,
            training_distortion: cb.training_distortion,
            training_samples: cb.training_samples,
            iterations: cb.iterations,
        }
    }
}

impl ScalarCodebook {
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn training_distortion(&self) -> f64 {
        self.training_distortion
    }

    pub fn training_samples(&self) -> u64 {
        self.training_samples
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    /// Index and reconstruction level for a finite input. A value exactly on
    /// a threshold goes to the lower cell.
    pub fn quantize(&self, x: f64) -> (usize, f64) {
        let idx = self.thresholds.partition_point(|&t| t < x);
        (idx, self.levels[idx])
    }

    pub fn from_json_str(s: &str) -> Result<ScalarCodebook> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn midpoints(levels: &[f64]) -> Vec<f64> {
    levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// End index (into the sorted samples) of each cell induced by `thresholds`.
fn cell_ends(sorted: &[f64], thresholds: &[f64], num_levels: usize) -> Vec<usize> {
    let mut ends = Vec::with_capacity(num_levels);
    for t in thresholds {
        ends.push(sorted.partition_point(|&x| x <= *t));
    }
    ends.push(sorted.len());
    ends
}

struct Prefix {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Prefix {
    fn new(sorted: &[f64]) -> Prefix {
        let mut sum = Vec::with_capacity(sorted.len() + 1);
        let mut sum_sq = Vec::with_capacity(sorted.len() + 1);
        sum.push(0.0);
        sum_sq.push(0.0);
        let (mut s, mut s2) = (0.0, 0.0);
        for &x in sorted {
            s += x;
            s2 += x * x;
            sum.push(s);
            sum_sq.push(s2);
        }
        Prefix { sum, sum_sq }
    }

    fn count(&self, s: usize, e: usize) -> usize {
        e - s
    }

    fn mean(&self, s: usize, e: usize) -> f64 {
        (self.sum[e] - self.sum[s]) / (e - s) as f64
    }

    fn sse(&self, s: usize, e: usize, level: f64) -> f64 {
        let n = (e - s) as f64;
        (self.sum_sq[e] - self.sum_sq[s]) - 2.0 * level * (self.sum[e] - self.sum[s])
            + n * level * level
    }
}

/// Partitions the sorted samples by the current levels, re-seeding any level
/// that catches no samples at the split point of the worst-fitting cell.
/// Fails only when no cell has two distinct values left to split.
fn assign_with_repair(sorted: &[f64], prefix: &Prefix, levels: &mut [f64]) -> Result<Vec<usize>> {
    let mut attempts = 0;
    loop {
        let thresholds = midpoints(levels);
        let ends = cell_ends(sorted, &thresholds, levels.len());
        let mut start = 0;
        let mut empty = None;
        for (i, &end) in ends.iter().enumerate() {
            if start == end {
                empty = Some(i);
                break;
            }
            start = end;
        }
        let Some(empty) = empty else {
            return Ok(ends);
        };
        attempts += 1;
        if attempts > levels.len() {
            return Err(Error::EmptyCell);
        }

        let mut donor: Option<(f64, usize, usize)> = None;
        let mut s = 0;
        for (j, &e) in ends.iter().enumerate() {
            if prefix.count(s, e) >= 2 && sorted[s] < sorted[e - 1] {
                let sse = prefix.sse(s, e, levels[j]);
                if donor.map_or(true, |(best, _, _)| sse > best) {
                    donor = Some((sse, s, e));
                }
            }
            s = e;
        }
        let Some((_, s, e)) = donor else {
            return Err(Error::EmptyCell);
        };
        let mean = prefix.mean(s, e);
        let k = s + sorted[s..e].partition_point(|&x| x <= mean);
        let donor_level_idx = {
            // The donor's index in `levels` is recovered from its end bound.
            ends.iter().position(|&end| end == e).unwrap()
        };
        levels[donor_level_idx] = prefix.mean(s, k);
        levels[empty] = prefix.mean(k, e);
        levels.sort_by(f64::total_cmp);
    }
}

/// Trains a Lloyd-Max codebook and returns the distortion after each
/// iteration alongside it.
pub fn lloyd_max_train_trace(
    samples: &[f64],
    num_levels: usize,
    tol: f64,
    max_iter: u32,
) -> Result<(ScalarCodebook, Vec<f64>)> {
    if num_levels < 1 {
        return Err(Error::QuantizerInput("num_levels must be >= 1".into()));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::QuantizerInput("tol must be positive and finite".into()));
    }
    if max_iter < 1 {
        return Err(Error::QuantizerInput("max_iter must be >= 1".into()));
    }
    if samples.is_empty() {
        return Err(Error::QuantizerInput("samples must not be empty".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::QuantizerInput("samples must be finite".into()));
    }

    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = Vec::with_capacity(sorted.len());
    for &x in &sorted {
        if distinct.last() != Some(&x) {
            distinct.push(x);
        }
    }
    if distinct.len() < num_levels {
        return Err(Error::QuantizerInput(format!(
            "degenerate input: needs at least {num_levels} distinct values, got {}",
            distinct.len()
        )));
    }

    let n = sorted.len();
    let quantile = |count: usize, i: usize| {
        ((i as f64 + 0.5) / num_levels as f64 * count as f64) as usize
    };
    let mut levels: Vec<f64> =
        (0..num_levels).map(|i| sorted[quantile(n, i).min(n - 1)]).collect();
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        // Heavy ties collapse sample quantiles; spread over distinct values
        // instead, which the degeneracy check above guarantees is possible.
        levels = (0..num_levels)
            .map(|i| distinct[quantile(distinct.len(), i).min(distinct.len() - 1)])
            .collect();
    }

    let prefix = Prefix::new(&sorted);
    let mut trace = Vec::new();
    let mut previous: Option<f64> = None;
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let ends = assign_with_repair(&sorted, &prefix, &mut levels)?;
        let mut s = 0;
        for (level, &e) in levels.iter_mut().zip(&ends) {
            *level = prefix.mean(s, e);
            s = e;
        }
        // Distortion of the updated codebook under its own partition, so the
        // reported value describes the returned quantizer.
        let thresholds = midpoints(&levels);
        let ends = cell_ends(&sorted, &thresholds, num_levels);
        let mut s = 0;
        let mut sse = 0.0;
        for (level, &e) in levels.iter().zip(&ends) {
            if e > s {
                sse += prefix.sse(s, e, *level);
            }
            s = e;
        }
        let distortion = (sse / n as f64).max(0.0);
        trace.push(distortion);
        let converged = previous
            .is_some_and(|p| (p - distortion).abs() <= tol * p.max(f64::MIN_POSITIVE));
        previous = Some(distortion);
        if converged {
            break;
        }
    }

    let codebook = ScalarCodebook {
        thresholds: midpoints(&levels),
        levels,
        training_distortion: previous.unwrap(),
        training_samples: n as u64,
        iterations,
    };
    Ok((codebook, trace))
}

pub fn lloyd_max_train(
    samples: &[f64],
    num_levels: usize,
    tol: f64,
    max_iter: u32,
) -> Result<ScalarCodebook> {
    lloyd_max_train_trace(samples, num_levels, tol, max_iter).map(|(cb, _)| cb)
}

/// Hybrid pipeline rerun with a trained scalar quantizer in place of the
/// ideal one, against the idealized simulation at the same settings.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerGapReport {
    pub ideal: SimulationReport,
    pub realized_distortion: EstimatorStats,
    /// realized distortion / ideal distortion.
    pub gap_ratio: f64,
    pub params: HybridParams,
    pub codebook: ScalarCodebook,
}

/// Trains a `num_levels` scalar quantizer on the source, sends its residual
/// through the hybrid analog layer, and compares the resulting end-to-end
/// distortion with the ideal-quantizer simulation.
pub fn hybrid_quantizer_gap(
    config: &ValidatedConfig,
    point: &ChannelPoint,
    num_levels: usize,
    settings: &MonteCarloSettings,
) -> Result<QuantizerGapReport> {
    settings.validate()?;
    if !point.in_design_region(config) {
        return Err(Error::BelowDesignSnr {
            actual: point.noise_var(),
            design: config.noise_var_design,
        });
    }
    let params = hybrid_alpha(config);

    let train_target = settings.total_samples().min(MAX_TRAIN_SAMPLES) as usize;
    let source_sd = config.source_var.sqrt();
    let mut train = Vec::with_capacity(train_target);
    let mut trial = 0;
    while train.len() < train_target {
        let take = (train_target - train.len()).min(settings.block_length as usize);
        train.extend(gaussian_block(settings.seed, trial, ROLE_TRAIN, source_sd, take));
        trial += 1;
    }
    let codebook = lloyd_max_train(&train, num_levels, TRAIN_TOL, TRAIN_MAX_ITER)?;
    let trained_mse = codebook.training_distortion;
    if trained_mse <= 0.0 {
        return Err(Error::QuantizerInput(
            "quantizer reproduces the training set exactly; no residual left to transmit".into(),
        ));
    }

    // Residual scaling reuses the budgeted analog power, now normalized by
    // the measured quantizer MSE instead of the ideal one.
    let analog_power = (1.0 - params.alpha) * config.power;
    let kappa = (analog_power / trained_mse).sqrt();
    let noise_var = point.noise_var();
    let gain = kappa * trained_mse / (kappa * kappa * trained_mse + noise_var);
    let digital_sd = (params.alpha * config.power).sqrt();

    let per_trial: Vec<(u64, f64, f64)> = (0..settings.trials)
        .into_par_iter()
        .map(|t| {
            let n = settings.block_length as usize;
            let source = gaussian_block(settings.seed, t, ROLE_SOURCE, source_sd, n);
            let digital = gaussian_block(settings.seed, t, ROLE_DIGITAL, digital_sd, n);
            let noise = gaussian_block(settings.seed, t, ROLE_MAIN_NOISE, noise_var.sqrt(), n);
            let mut err2 = 0.0;
            let mut err4 = 0.0;
            for i in 0..n {
                let v = source[i];
                let (_, v_q) = codebook.quantize(v);
                let u = v - v_q;
                let y = digital[i] + kappa * u + noise[i];
                let cleaned = y - digital[i];
                let e = u - gain * cleaned;
                err2 += e * e;
                err4 += e * e * e * e;
            }
            (n as u64, err2, err4)
        })
        .collect();
    let (n, err2, err4) = per_trial
        .iter()
        .fold((0u64, 0.0f64, 0.0f64), |(n, a2, a4), (m, e2, e4)| {
            (n + m, a2 + e2, a4 + e4)
        });
    let nf = n as f64;
    let mean = err2 / nf;
    let var = (err4 / nf - mean * mean).max(0.0);
    let realized_distortion = EstimatorStats {
        mean,
        std_error: (var / nf).sqrt(),
        sample_count: n,
    };

    let ideal = simulate_hybrid_idealized(config, &params, point, settings)?;
    Ok(QuantizerGapReport {
        gap_ratio: realized_distortion.mean / ideal.distortion.mean,
        ideal,
        realized_distortion,
        params,
        codebook,
    })
}
