//! Command line front end. Every subcommand reads its system description
//! from either a JSON file or a named preset, prints human-readable
//! key=value lines or CSV, and maps validation problems to exit code 2 and
//! runtime failures to 3.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analytic::{hybrid_alpha, hybrid_distortion, uncoded_distortion, uncoded_kappa};
use crate::error::{Error, Result};
use crate::experiment::{
    distortion_to_db, report_exponents, rows_to_csv_string, run_sweep, write_csv_file,
    write_text_file, ExperimentSpec, Preset, SnrGridDb,
};
use crate::montecarlo::{
    gaussian_block, simulate_hybrid_idealized, simulate_uncoded, MonteCarloSettings,
    SimulationReport, ROLE_TRAIN,
};
use crate::quantizer::{
    hybrid_quantizer_gap, lloyd_max_train, ScalarCodebook, TRAIN_MAX_ITER, TRAIN_TOL,
};

#[derive(Debug, Parser)]
#[command(
    name = "wiretap-jscc",
    version,
    about = "Distortion and leakage calculator for analog transmission over a degraded Gaussian wiretap channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form distortion for every configured scheme at one SNR, as CSV.
    Analytic(AnalyticArgs),
    /// Full SNR sweep written to a CSV file.
    Sweep(SweepArgs),
    /// Monte Carlo run of one scheme at one SNR.
    Simulate(SimulateArgs),
    /// Train a Lloyd-Max codebook; optionally measure the hybrid scheme's
    /// gap to the ideal quantizer.
    Quantizer(QuantizerArgs),
    /// Fitted log-log distortion slopes over the grid's top decade.
    Exponent(ExponentArgs),
}

/// Where the experiment description comes from.
#[derive(Debug, Args)]
struct SpecSource {
    /// Path to an experiment JSON file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment: fig2 or fig3.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

impl SpecSource {
    fn load(&self) -> Result<ExperimentSpec> {
        match (&self.config, &self.preset) {
            (Some(path), None) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::Io(std::io::Error::new(
                        e.kind(),
                        format!("{}: {e}", path.display()),
                    ))
                })?;
                ExperimentSpec::from_json_str(&text)
            }
            (None, Some(name)) => Ok(name.parse::<Preset>()?.spec()),
            _ => Err(Error::Experiment(
                "pass --config <path> or --preset fig2|fig3".to_string(),
            )),
        }
    }
}

/// Monte Carlo knobs shared by the subcommands that simulate.
#[derive(Debug, Args)]
struct McFlags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    block_length: Option<u32>,
}

impl McFlags {
    fn any(&self) -> bool {
        self.seed.is_some() || self.trials.is_some() || self.block_length.is_some()
    }

    fn resolve(&self, base: Option<MonteCarloSettings>) -> MonteCarloSettings {
        let mut mc = base.unwrap_or_else(|| MonteCarloSettings::new(1000, 1000, 42));
        if let Some(s) = self.seed {
            mc.seed = s;
        }
        if let Some(t) = self.trials {
            mc.trials = t;
        }
        if let Some(b) = self.block_length {
            mc.block_length = b;
        }
        mc
    }
}

#[derive(Debug, Args)]
struct AnalyticArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Actual main-channel SNR in dB.
    #[arg(long)]
    snr_db: f64,
    /// Emit distortion as 10 log10(D) instead of linear.
    #[arg(long)]
    db_distortion: bool,
    /// Write CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Output CSV path, overriding the experiment's output_path.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    mc: McFlags,
    /// Emit distortion as 10 log10(D) instead of linear.
    #[arg(long)]
    db_distortion: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Scheme to simulate: uncoded or hybrid.
    #[arg(long)]
    scheme: String,
    /// Actual main-channel SNR in dB.
    #[arg(long)]
    snr_db: f64,
    #[command(flatten)]
    mc: McFlags,
}

#[derive(Debug, Args)]
struct QuantizerArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Number of reconstruction levels.
    #[arg(long)]
    levels: usize,
    /// When set, also run the hybrid pipeline with the trained quantizer at
    /// this SNR and report the gap to the ideal one.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Write the trained codebook JSON here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    mc: McFlags,
}

#[derive(Debug, Args)]
struct ExponentArgs {
    #[command(flatten)]
    source: SpecSource,
}

fn print_report(scheme: &str, snr_db: f64, report: &SimulationReport) {
    let s = &report.settings;
    println!(
        "scheme={scheme} snr_a_db={snr_db} trials={} block_length={} seed={}",
        s.trials, s.block_length, s.seed
    );
    println!(
        "distortion mean={} std_error={}",
        report.distortion.mean, report.distortion.std_error
    );
    println!(
        "power mean={} std_error={} target={}",
        report.power.mean, report.power.std_error, report.power_target
    );
    println!(
        "leakage_bits mean={} std_error={} bound={}",
        report.leakage_bits.mean, report.leakage_bits.std_error, report.leakage_bound_bits
    );
    println!(
        "orthogonality mean={} std_error={}",
        report.orthogonality.mean, report.orthogonality.std_error
    );
}

fn emit_codebook(codebook: &ScalarCodebook, out: &Option<PathBuf>) -> Result<()> {
    println!(
        "levels={} training_samples={} iterations={} training_distortion={}",
        codebook.num_levels(),
        codebook.training_samples(),
        codebook.iterations(),
        codebook.training_distortion()
    );
    let json = codebook.to_json_string()?;
    match out {
        Some(path) => {
            write_text_file(path, &json)?;
            println!("wrote codebook to {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn run_analytic(args: &AnalyticArgs) -> Result<()> {
    let mut spec = args.source.load()?;
    spec.snr_grid_db = SnrGridDb {
        start: args.snr_db,
        stop: args.snr_db,
        step: 1.0,
    };
    spec.montecarlo = None;
    let mut rows = run_sweep(&spec)?;
    if args.db_distortion {
        distortion_to_db(&mut rows);
    }
    match &args.out {
        Some(path) => {
            write_csv_file(path, &rows)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{}", rows_to_csv_string(&rows)?),
    }
    Ok(())
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<()> {
    let mut spec = args.source.load()?;
    if args.mc.any() || spec.montecarlo.is_some() {
        spec.montecarlo = Some(args.mc.resolve(spec.montecarlo));
    }
    let mut rows = run_sweep(&spec)?;
    if args.db_distortion {
        distortion_to_db(&mut rows);
    }
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&spec.output_path));
    write_csv_file(&path, &rows)?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let spec = args.source.load()?;
    spec.validate()?;
    let config = spec.system.validated().map_err(Error::Config)?;
    let settings = args.mc.resolve(spec.montecarlo);
    let point = config.point_at_snr_db(args.snr_db)?;
    let (report, analytic) = match args.scheme.as_str() {
        "uncoded" => (
            simulate_uncoded(&config, &point, &settings)?,
            uncoded_distortion(&config, &uncoded_kappa(&config), &point).distortion,
        ),
        "hybrid" => {
            let params = hybrid_alpha(&config);
            (
                simulate_hybrid_idealized(&config, &params, &point, &settings)?,
                hybrid_distortion(&config, &params, &point).distortion,
            )
        }
        other => {
            return Err(Error::Experiment(format!(
                "unknown scheme {other:?}, expected uncoded or hybrid"
            )))
        }
    };
    print_report(&args.scheme, args.snr_db, &report);
    println!("distortion_analytic={analytic}");
    Ok(())
}

fn run_quantizer(args: &QuantizerArgs) -> Result<()> {
    let spec = args.source.load()?;
    spec.validate()?;
    let config = spec.system.validated().map_err(Error::Config)?;
    let settings = args.mc.resolve(spec.montecarlo);
    settings.validate()?;
    match args.snr_db {
        Some(snr_db) => {
            let point = config.point_at_snr_db(snr_db)?;
            let report = hybrid_quantizer_gap(&config, &point, args.levels, &settings)?;
            emit_codebook(&report.codebook, &args.out)?;
            println!(
                "ideal_distortion={} realized_distortion={} gap_ratio={}",
                report.ideal.distortion.mean, report.realized_distortion.mean, report.gap_ratio
            );
        }
        None => {
            let total = settings.total_samples() as usize;
            let sd = config.source_var.sqrt();
            let mut train = Vec::with_capacity(total);
            let mut trial = 0;
            while train.len() < total {
                let take = (total - train.len()).min(settings.block_length as usize);
                train.extend(gaussian_block(settings.seed, trial, ROLE_TRAIN, sd, take));
                trial += 1;
            }
            let codebook = lloyd_max_train(&train, args.levels, TRAIN_TOL, TRAIN_MAX_ITER)?;
            emit_codebook(&codebook, &args.out)?;
        }
    }
    Ok(())
}

fn run_exponent(args: &ExponentArgs) -> Result<()> {
    let spec = args.source.load()?;
    for row in report_exponents(&spec)? {
        println!(
            "scheme={} leakage_budget_bits={} slope={}",
            row.scheme, row.leakage_budget_bits, row.slope
        );
    }
    Ok(())
}

fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Analytic(args) => run_analytic(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Quantizer(args) => run_quantizer(args),
        Command::Exponent(args) => run_exponent(args),
    }
}

/// Parses and runs; the return value is the process exit code. Validation
/// problems exit 2, runtime failures 3.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
