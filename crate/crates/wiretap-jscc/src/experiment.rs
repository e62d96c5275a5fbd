//! Sweep orchestration: a JSON-described experiment runs every requested
//! scheme over an SNR grid, optionally with Monte Carlo confirmation, and
//! lands in a CSV whose row order and float formatting are deterministic.

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::analytic::{
    distortion_exponent, hybrid_alpha, hybrid_distortion, outer_bound_distortion,
    separation_distortion, uncoded_distortion, uncoded_kappa, DistortionPoint, Provenance, Scheme,
};
use crate::error::{Error, Result};
use crate::model::{ChannelPoint, SystemConfig, ValidatedConfig};
use crate::montecarlo::{simulate_hybrid_idealized, simulate_uncoded, MonteCarloSettings};

/// Inclusive SNR grid in dB, swept from `start` by `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrGridDb {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrGridDb {
    /// Grid points in dB. Empty when the grid is invalid; `stop` is included
    /// when it lands within rounding of a step multiple.
    pub fn points_db(&self) -> Vec<f64> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite())
            || self.step <= 0.0
            || self.start > self.stop
        {
            return Vec::new();
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.start + k as f64 * self.step).collect()
    }

    pub fn span_db(&self) -> f64 {
        self.stop - self.start
    }
}

/// Everything one sweep needs: the system design, the grid, which schemes to
/// evaluate, optional alternative leakage budgets (one curve family each),
/// and optional Monte Carlo confirmation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub system: SystemConfig,
    pub snr_grid_db: SnrGridDb,
    pub schemes: Vec<Scheme>,
    #[serde(default)]
    pub leakage_budgets_bits: Vec<f64>,
    #[serde(default)]
    pub montecarlo: Option<MonteCarloSettings>,
    pub output_path: String,
}

impl ExperimentSpec {
    pub fn from_json_str(s: &str) -> Result<ExperimentSpec> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Budgets this sweep runs: the explicit list, or the system's own
    /// budget when no list is given.
    pub fn effective_budgets(&self) -> Vec<f64> {
        if self.leakage_budgets_bits.is_empty() {
            vec![self.system.leakage_budget_bits]
        } else {
            self.leakage_budgets_bits.clone()
        }
    }

    fn system_with_budget(&self, budget: f64) -> SystemConfig {
        SystemConfig {
            leakage_budget_bits: budget,
            ..self.system.clone()
        }
    }

    /// Collects every validation problem into one error.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.schemes.is_empty() {
            problems.push("schemes must not be empty".to_string());
        }
        let mut seen = Vec::new();
        for s in &self.schemes {
            if seen.contains(s) {
                problems.push(format!("duplicate scheme: {s}"));
            } else {
                seen.push(*s);
            }
        }
        let g = &self.snr_grid_db;
        if !(g.start.is_finite() && g.stop.is_finite() && g.step.is_finite()) {
            problems.push("snr_grid_db must be finite".to_string());
        } else {
            if g.step <= 0.0 {
                problems.push(format!("snr_grid_db.step must be > 0, got {}", g.step));
            }
            if g.start > g.stop {
                problems.push(format!(
                    "snr_grid_db.start {} exceeds stop {}",
                    g.start, g.stop
                ));
            }
        }
        for &budget in &self.effective_budgets() {
            if let Err(e) = self.system_with_budget(budget).validated() {
                problems.push(format!("budget {budget}: {e}"));
            }
        }
        if let Some(mc) = &self.montecarlo {
            if let Err(e) = mc.validate() {
                problems.push(format!("montecarlo: {e}"));
            }
        }
        if self.output_path.is_empty() {
            problems.push("output_path must not be empty".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Experiment(problems.join("; ")))
        }
    }
}

/// Canned sweeps over the benchmark design: unit power and source variance,
/// 20 dB design SNR, 0 dB eavesdropper SNR, 20 to 50 dB actual SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// All four schemes at a 0.01 bit leakage budget.
    Fig2,
    /// Hybrid against the outer bound for four leakage budgets.
    Fig3,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }

    pub fn spec(&self) -> ExperimentSpec {
        let system = SystemConfig {
            power: 1.0,
            noise_var_design: 0.01,
            noise_var_eve: 1.0,
            source_var: 1.0,
            leakage_budget_bits: 0.01,
        };
        let snr_grid_db = SnrGridDb {
            start: 20.0,
            stop: 50.0,
            step: 1.0,
        };
        match self {
            Preset::Fig2 => ExperimentSpec {
                system,
                snr_grid_db,
                schemes: Scheme::ALL.to_vec(),
                leakage_budgets_bits: Vec::new(),
                montecarlo: None,
                output_path: "fig2.csv".to_string(),
            },
            Preset::Fig3 => ExperimentSpec {
                system,
                snr_grid_db,
                schemes: vec![Scheme::Hybrid, Scheme::OuterBound],
                leakage_budgets_bits: vec![0.001, 0.01, 0.1, 0.5],
                montecarlo: None,
                output_path: "fig3.csv".to_string(),
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Preset> {
        match s {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            other => Err(Error::Experiment(format!(
                "unknown preset {other:?}, expected fig2 or fig3"
            ))),
        }
    }
}

/// One CSV row. Field order is the column order; the Monte Carlo columns are
/// empty on analytic rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub leakage_budget_bits: f64,
    pub snr_a_db: f64,
    pub distortion: f64,
    pub leakage_bound_bits: f64,
    pub provenance: Provenance,
    pub trials: Option<u64>,
    pub block_length: Option<u32>,
    pub seed: Option<u64>,
}

impl SweepRow {
    fn analytic(budget: f64, snr_a_db: f64, dp: &DistortionPoint) -> SweepRow {
        SweepRow {
            scheme: dp.scheme,
            leakage_budget_bits: budget,
            snr_a_db,
            distortion: dp.distortion,
            leakage_bound_bits: dp.leakage_bound_bits,
            provenance: dp.provenance,
            trials: None,
            block_length: None,
            seed: None,
        }
    }

    fn monte_carlo(
        budget: f64,
        snr_a_db: f64,
        dp: &DistortionPoint,
        distortion: f64,
        settings: &MonteCarloSettings,
    ) -> SweepRow {
        SweepRow {
            scheme: dp.scheme,
            leakage_budget_bits: budget,
            snr_a_db,
            distortion,
            leakage_bound_bits: dp.leakage_bound_bits,
            provenance: Provenance::MonteCarlo,
            trials: Some(settings.trials),
            block_length: Some(settings.block_length),
            seed: Some(settings.seed),
        }
    }
}

/// Closed-form distortion for one scheme at one point. `None` where the
/// scheme has no defined value (the outer bound past the eavesdropper's
/// noise level).
fn analytic_point(
    config: &ValidatedConfig,
    scheme: Scheme,
    point: &ChannelPoint,
) -> Result<Option<DistortionPoint>> {
    match scheme {
        Scheme::Separation => Ok(Some(separation_distortion(config, point))),
        Scheme::Uncoded => Ok(Some(uncoded_distortion(config, &uncoded_kappa(config), point))),
        Scheme::Hybrid => Ok(Some(hybrid_distortion(config, &hybrid_alpha(config), point))),
        Scheme::OuterBound => match outer_bound_distortion(config, point) {
            Ok(dp) => Ok(Some(dp)),
            Err(Error::OuterBoundDomain { .. }) => Ok(None),
            Err(e) => Err(e),
        },
    }
}

/// Runs the sweep. Analytic rows for every scheme on the grid, plus Monte
/// Carlo rows (uncoded everywhere, hybrid where the channel is at or above
/// design) when settings are present. Rows come back sorted by budget,
/// scheme, SNR, and provenance.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.snr_grid_db.points_db();
    let mut rows = Vec::new();
    for &budget in &spec.effective_budgets() {
        let config = spec
            .system_with_budget(budget)
            .validated()
            .map_err(Error::Config)?;
        for &scheme in &spec.schemes {
            for &snr_db in &grid {
                let point = config.point_at_snr_db(snr_db)?;
                if let Some(dp) = analytic_point(&config, scheme, &point)? {
                    rows.push(SweepRow::analytic(budget, snr_db, &dp));
                }
            }
        }
        if let Some(settings) = &spec.montecarlo {
            for &scheme in &spec.schemes {
                for &snr_db in &grid {
                    let point = config.point_at_snr_db(snr_db)?;
                    let report = match scheme {
                        Scheme::Uncoded => simulate_uncoded(&config, &point, settings)?,
                        Scheme::Hybrid if point.in_design_region(&config) => {
                            simulate_hybrid_idealized(
                                &config,
                                &hybrid_alpha(&config),
                                &point,
                                settings,
                            )?
                        }
                        _ => continue,
                    };
                    rows.push(SweepRow::monte_carlo(
                        budget,
                        snr_db,
                        &report.point,
                        report.distortion.mean,
                        settings,
                    ));
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        a.leakage_budget_bits
            .total_cmp(&b.leakage_budget_bits)
            .then(a.scheme.cmp(&b.scheme))
            .then(a.snr_a_db.total_cmp(&b.snr_a_db))
            .then(a.provenance.cmp(&b.provenance))
    });
    Ok(rows)
}

/// Rewrites distortion as 10 log10(distortion), for log-scale plotting.
pub fn distortion_to_db(rows: &mut [SweepRow]) {
    for row in rows {
        row.distortion = 10.0 * row.distortion.log10();
    }
}

pub fn rows_to_csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn rows_from_csv_str(s: &str) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_reader(s.as_bytes());
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// Writes text next to its final name and renames it into place, so a failed
/// run never leaves a truncated file behind.
pub(crate) fn write_text_file(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_csv_file(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_text_file(path, &rows_to_csv_string(rows)?)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<SweepRow>> {
    rows_from_csv_str(&std::fs::read_to_string(path)?)
}

/// Fitted log-log slope of one analytic curve's top decade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentRow {
    pub scheme: Scheme,
    pub leakage_budget_bits: f64,
    pub slope: f64,
}

/// Slope report over the top decade of the grid, one row per budget and
/// scheme. The grid must span at least a decade of SNR.
pub fn report_exponents(spec: &ExperimentSpec) -> Result<Vec<ExponentRow>> {
    spec.validate()?;
    if spec.snr_grid_db.span_db() < 10.0 - 1e-9 {
        return Err(Error::Experiment(format!(
            "snr grid spans {:.3} dB; exponent fits need at least a decade",
            spec.snr_grid_db.span_db()
        )));
    }
    let window_start = spec.snr_grid_db.stop - 10.0 - 1e-9;
    let mut out = Vec::new();
    for &budget in &spec.effective_budgets() {
        let config = spec
            .system_with_budget(budget)
            .validated()
            .map_err(Error::Config)?;
        for &scheme in &spec.schemes {
            let mut curve = Vec::new();
            for &snr_db in &spec.snr_grid_db.points_db() {
                if snr_db < window_start {
                    continue;
                }
                let point = config.point_at_snr_db(snr_db)?;
                if let Some(dp) = analytic_point(&config, scheme, &point)? {
                    curve.push((dp.snr_a_linear, dp.distortion));
                }
            }
            out.push(ExponentRow {
                scheme,
                leakage_budget_bits: budget,
                slope: distortion_exponent(&curve)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn find(rows: &[SweepRow], scheme: Scheme, budget: f64, snr_db: f64) -> &SweepRow {
        rows.iter()
            .find(|r| {
                r.scheme == scheme
                    && r.leakage_budget_bits == budget
                    && r.snr_a_db == snr_db
                    && r.provenance == Provenance::Analytic
            })
            .unwrap()
    }

    #[test]
    fn grid_points_include_both_ends() {
        let g = SnrGridDb { start: 20.0, stop: 50.0, step: 1.0 };
        let pts = g.points_db();
        assert_eq!(pts.len(), 31);
        assert_eq!(pts[0], 20.0);
        assert_eq!(pts[30], 50.0);

        let g = SnrGridDb { start: 0.0, stop: 1.0, step: 0.1 };
        let pts = g.points_db();
        assert_eq!(pts.len(), 11);
        assert!((pts[10] - 1.0).abs() < 1e-12);

        let g = SnrGridDb { start: 0.0, stop: 10.0, step: 3.0 };
        assert_eq!(g.points_db(), vec![0.0, 3.0, 6.0, 9.0]);

        let g = SnrGridDb { start: 5.0, stop: 5.0, step: 1.0 };
        assert_eq!(g.points_db(), vec![5.0]);
    }

    #[test]
    fn four_scheme_preset_produces_the_expected_rows() {
        let rows = run_sweep(&Preset::Fig2.spec()).unwrap();
        assert_eq!(rows.len(), 4 * 31);
        assert!(rows.iter().all(|r| r.provenance == Provenance::Analytic));
        assert!(rows.iter().all(|r| r.leakage_budget_bits == 0.01));
        assert!(rows.iter().all(|r| r.trials.is_none() && r.seed.is_none()));

        let hybrid = find(&rows, Scheme::Hybrid, 0.01, 20.0);
        assert_relative_eq!(hybrid.distortion, 0.019529360485017013, max_relative = 1e-9);
        let sep = find(&rows, Scheme::Separation, 0.01, 20.0);
        assert_relative_eq!(sep.distortion, hybrid.distortion, max_relative = 1e-9);
        let outer = find(&rows, Scheme::OuterBound, 0.01, 30.0);
        assert_relative_eq!(outer.distortion, 0.0019704949140726457, max_relative = 1e-9);

        for w in rows.windows(2) {
            let a = &w[0];
            let b = &w[1];
            let key_a = (a.leakage_budget_bits, a.scheme, a.snr_a_db);
            let key_b = (b.leakage_budget_bits, b.scheme, b.snr_a_db);
            assert!(key_a <= key_b, "rows out of order: {key_a:?} after {key_b:?}");
        }
    }

    #[test]
    fn budget_family_preset_stays_within_a_constant_of_the_outer_bound() {
        let spec = Preset::Fig3.spec();
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 4 * 2 * 31);

        let expected = [
            (0.001, 8.06911953118),
            (0.01, 1.69816591577),
            (0.1, 1.05662291422),
            (0.5, 1.0),
        ];
        for (budget, want) in expected {
            let hybrid = find(&rows, Scheme::Hybrid, budget, 50.0);
            let outer = find(&rows, Scheme::OuterBound, budget, 50.0);
            assert_relative_eq!(hybrid.distortion / outer.distortion, want, max_relative = 1e-9);
        }
        // The ratio starts at 1 at the design point and stays bounded.
        for &budget in &spec.leakage_budgets_bits {
            for &snr_db in &spec.snr_grid_db.points_db() {
                let hybrid = find(&rows, Scheme::Hybrid, budget, snr_db);
                let outer = find(&rows, Scheme::OuterBound, budget, snr_db);
                let ratio = hybrid.distortion / outer.distortion;
                assert!((1.0 - 1e-9..=8.2).contains(&ratio), "ratio {ratio} at {snr_db} dB");
            }
        }
    }

    #[test]
    fn every_row_respects_its_leakage_budget() {
        for preset in [Preset::Fig2, Preset::Fig3] {
            for row in run_sweep(&preset.spec()).unwrap() {
                assert!(
                    row.leakage_bound_bits <= row.leakage_budget_bits + 1e-9,
                    "{:?} leaks {} over budget {}",
                    row.scheme,
                    row.leakage_bound_bits,
                    row.leakage_budget_bits
                );
            }
        }
    }

    #[test]
    fn monte_carlo_rows_confirm_the_analytic_curves() {
        let mut spec = Preset::Fig2.spec();
        spec.snr_grid_db = SnrGridDb { start: 15.0, stop: 25.0, step: 5.0 };
        spec.schemes = vec![Scheme::Uncoded, Scheme::Hybrid];
        spec.montecarlo = Some(MonteCarloSettings::new(500, 100, 7));
        let rows = run_sweep(&spec).unwrap();

        // 3 grid points, both schemes analytic everywhere; Monte Carlo rows
        // for uncoded everywhere but for hybrid only at and above design.
        let analytic = rows.iter().filter(|r| r.provenance == Provenance::Analytic).count();
        let mc: Vec<_> = rows.iter().filter(|r| r.provenance == Provenance::MonteCarlo).collect();
        assert_eq!(analytic, 6);
        assert_eq!(mc.len(), 5);
        assert!(mc.iter().all(|r| r.trials == Some(100) && r.seed == Some(7)));
        assert!(!mc
            .iter()
            .any(|r| r.scheme == Scheme::Hybrid && r.snr_a_db < 20.0));

        for r in &mc {
            let reference = find(&rows, r.scheme, r.leakage_budget_bits, r.snr_a_db);
            assert_relative_eq!(r.distortion, reference.distortion, max_relative = 0.05);
        }
    }

    #[test]
    fn sweeps_are_deterministic() {
        let mut spec = Preset::Fig2.spec();
        spec.snr_grid_db = SnrGridDb { start: 20.0, stop: 24.0, step: 2.0 };
        spec.montecarlo = Some(MonteCarloSettings::new(400, 50, 11));
        let a = rows_to_csv_string(&run_sweep(&spec).unwrap()).unwrap();
        let b = rows_to_csv_string(&run_sweep(&spec).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_string_has_the_fixed_header_and_round_trips() {
        let rows = run_sweep(&Preset::Fig2.spec()).unwrap();
        let text = rows_to_csv_string(&rows).unwrap();
        assert!(text.starts_with(
            "scheme,leakage_budget_bits,snr_a_db,distortion,leakage_bound_bits,provenance,trials,block_length,seed\n"
        ));
        let back = rows_from_csv_str(&text).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn csv_file_write_is_a_rename_and_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let mut spec = Preset::Fig2.spec();
        spec.snr_grid_db = SnrGridDb { start: 20.0, stop: 22.0, step: 1.0 };
        let rows = run_sweep(&spec).unwrap();
        write_csv_file(&path, &rows).unwrap();
        assert_eq!(read_csv_file(&path).unwrap(), rows);
        // Overwrite with fewer rows; the short file fully replaces the long one.
        write_csv_file(&path, &rows[..3]).unwrap();
        assert_eq!(read_csv_file(&path).unwrap(), rows[..3]);
        // No stray temp files remain.
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn db_conversion_rewrites_only_distortion() {
        let mut rows = run_sweep(&Preset::Fig2.spec()).unwrap();
        let original = rows.clone();
        distortion_to_db(&mut rows);
        for (db, lin) in rows.iter().zip(&original) {
            assert_relative_eq!(db.distortion, 10.0 * lin.distortion.log10(), max_relative = 1e-12);
            assert_eq!(db.leakage_bound_bits, lin.leakage_bound_bits);
            assert_eq!(db.snr_a_db, lin.snr_a_db);
        }
    }

    #[test]
    fn spec_json_round_trips_and_rejects_unknown_keys() {
        let mut spec = Preset::Fig3.spec();
        spec.montecarlo = Some(MonteCarloSettings::new(100, 10, 3));
        let json = spec.to_json_string().unwrap();
        assert_eq!(ExperimentSpec::from_json_str(&json).unwrap(), spec);

        let with_typo = json.replace("\"output_path\"", "\"outpt_path\"");
        assert!(ExperimentSpec::from_json_str(&with_typo).is_err());
    }

    #[test]
    fn spec_json_fills_defaults() {
        let json = r#"{
            "system": {
                "power": 1.0,
                "noise_var_design": 0.01,
                "noise_var_eve": 1.0,
                "source_var": 1.0,
                "leakage_budget_bits": 0.25
            },
            "snr_grid_db": {"start": 20.0, "stop": 30.0, "step": 5.0},
            "schemes": ["separation", "outer_bound"],
            "output_path": "out.csv"
        }"#;
        let spec = ExperimentSpec::from_json_str(json).unwrap();
        assert!(spec.montecarlo.is_none());
        assert_eq!(spec.effective_budgets(), vec![0.25]);
        assert_eq!(spec.schemes, vec![Scheme::Separation, Scheme::OuterBound]);
        spec.validate().unwrap();
    }

    #[test]
    fn invalid_specs_are_rejected_with_named_problems() {
        let mut spec = Preset::Fig2.spec();
        spec.schemes = Vec::new();
        let e = spec.validate().unwrap_err().to_string();
        assert!(e.contains("schemes"), "{e}");

        let mut spec = Preset::Fig2.spec();
        spec.schemes = vec![Scheme::Hybrid, Scheme::Hybrid];
        let e = spec.validate().unwrap_err().to_string();
        assert!(e.contains("duplicate"), "{e}");

        let mut spec = Preset::Fig2.spec();
        spec.snr_grid_db.step = 0.0;
        assert!(spec.validate().is_err());

        let mut spec = Preset::Fig2.spec();
        spec.snr_grid_db.start = 60.0;
        let e = spec.validate().unwrap_err().to_string();
        assert!(e.contains("exceeds"), "{e}");

        let mut spec = Preset::Fig2.spec();
        spec.snr_grid_db.stop = f64::NAN;
        assert!(spec.validate().is_err());

        let mut spec = Preset::Fig2.spec();
        spec.leakage_budgets_bits = vec![0.01, 2.0];
        let e = spec.validate().unwrap_err().to_string();
        assert!(e.contains("budget 2"), "{e}");

        let mut spec = Preset::Fig2.spec();
        spec.output_path = String::new();
        let e = spec.validate().unwrap_err().to_string();
        assert!(e.contains("output_path"), "{e}");

        let mut spec = Preset::Fig2.spec();
        spec.montecarlo = Some(MonteCarloSettings::new(0, 10, 3));
        let e = spec.validate().unwrap_err().to_string();
        assert!(e.contains("montecarlo"), "{e}");
    }

    #[test]
    fn collected_problems_arrive_in_one_message() {
        let mut spec = Preset::Fig2.spec();
        spec.schemes = Vec::new();
        spec.snr_grid_db.step = -1.0;
        spec.output_path = String::new();
        let e = spec.validate().unwrap_err().to_string();
        assert!(e.contains("schemes") && e.contains("step") && e.contains("output_path"), "{e}");
    }

    #[test]
    fn exponent_report_recovers_the_inverse_snr_law() {
        let rows = report_exponents(&Preset::Fig2.spec()).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            match row.scheme {
                Scheme::Separation => assert!(row.slope.abs() <= 0.01, "{}", row.slope),
                _ => assert!((row.slope + 1.0).abs() <= 0.05, "{:?}: {}", row.scheme, row.slope),
            }
        }

        let fig3 = report_exponents(&Preset::Fig3.spec()).unwrap();
        assert_eq!(fig3.len(), 8);
        for row in &fig3 {
            assert!((row.slope + 1.0).abs() <= 0.05);
        }
    }

    #[test]
    fn exponent_report_needs_a_decade() {
        let mut spec = Preset::Fig2.spec();
        spec.snr_grid_db = SnrGridDb { start: 20.0, stop: 25.0, step: 1.0 };
        assert!(matches!(report_exponents(&spec), Err(Error::Experiment(_))));

        spec.snr_grid_db = SnrGridDb { start: 20.0, stop: 20.0, step: 1.0 };
        assert!(matches!(report_exponents(&spec), Err(Error::Experiment(_))));

        spec.snr_grid_db = SnrGridDb { start: 40.0, stop: 50.0, step: 1.0 };
        assert!(report_exponents(&spec).is_ok());
    }

    #[test]
    fn preset_names_round_trip() {
        for preset in [Preset::Fig2, Preset::Fig3] {
            assert_eq!(preset.name().parse::<Preset>().unwrap(), preset);
        }
        assert!("fig4".parse::<Preset>().is_err());
    }

    fn arb_finite() -> impl Strategy<Value = f64> {
        any::<f64>().prop_filter("finite", |x| x.is_finite())
    }

    fn arb_row() -> impl Strategy<Value = SweepRow> {
        (
            0usize..4,
            arb_finite(),
            arb_finite(),
            arb_finite(),
            arb_finite(),
            any::<bool>(),
            any::<Option<u64>>(),
            any::<Option<u32>>(),
            any::<Option<u64>>(),
        )
            .prop_map(
                |(s, budget, snr, distortion, leakage, mc, trials, block, seed)| SweepRow {
                    scheme: Scheme::ALL[s],
                    leakage_budget_bits: budget,
                    snr_a_db: snr,
                    distortion,
                    leakage_bound_bits: leakage,
                    provenance: if mc { Provenance::MonteCarlo } else { Provenance::Analytic },
                    trials,
                    block_length: block,
                    seed,
                },
            )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn csv_round_trip_is_lossless(rows in prop::collection::vec(arb_row(), 0..20)) {
            let text = rows_to_csv_string(&rows).unwrap();
            let back = rows_from_csv_str(&text).unwrap();
            prop_assert_eq!(rows, back);
        }

        #[test]
        fn grid_points_stay_inside_the_range(
            start in -100.0f64..100.0,
            span in 0.0f64..100.0,
            step in 0.01f64..20.0,
        ) {
            let g = SnrGridDb { start, stop: start + span, step };
            let pts = g.points_db();
            prop_assert!(!pts.is_empty());
            prop_assert_eq!(pts[0], start);
            for p in &pts {
                prop_assert!(*p <= g.stop + step * 1e-6);
            }
            for w in pts.windows(2) {
                prop_assert!((w[1] - w[0] - step).abs() <= 1e-9 * step.max(1.0));
            }
        }
    }
}
