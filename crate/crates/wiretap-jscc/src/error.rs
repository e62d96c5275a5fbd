use thiserror::Error;

/// A single problem found while validating a [`SystemConfig`](crate::model::SystemConfig).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("leakage_budget_bits must be finite and >= 0, got {value}")]
    NegativeLeakageBudget { value: f64 },
    #[error(
        "eavesdropper channel must be strictly noisier than the design channel: \
         noise_var_eve = {eve} <= noise_var_design = {design}"
    )]
    EveNotDegraded { design: f64, eve: f64 },
    #[error(
        "leakage budget admits more analog power than the transmitter has: \
         noise_var_eve * (2^(2*leakage_budget_bits) - 1) = {required} > power = {power}"
    )]
    InfeasibleLeakageBudget { required: f64, power: f64 },
}

/// All validation problems for a config, reported together.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl std::fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for e in &self.0 {
            if !first {
                write!(f, "; ")?;
            }
            write!(f, "{e}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system config: {0}")]
    Config(#[from] ConfigErrors),
    #[error("capacity needs a nonnegative finite snr, got {0}")]
    CapacityDomain(f64),
    #[error("linear snr must be positive and finite, got {0}")]
    SnrDomain(f64),
    #[error("channel noise variance must be positive and finite, got {0}")]
    NoiseVarDomain(f64),
    #[error(
        "outer bound assumes the actual channel is no noisier than the eavesdropper's: \
         noise_var_actual = {actual} > noise_var_eve = {eve}"
    )]
    OuterBoundDomain { actual: f64, eve: f64 },
    #[error(
        "hybrid receiver is undefined below its design point: \
         noise_var_actual = {actual} > noise_var_design = {design}"
    )]
    BelowDesignSnr { actual: f64, design: f64 },
    #[error("exponent fit: {0}")]
    ExponentFit(&'static str),
    #[error("monte carlo settings: {0}")]
    Settings(String),
    #[error("sample budget exceeded: {requested} requested, cap is {cap}")]
    SampleBudgetExceeded { requested: u128, cap: u64 },
    #[error("covariance estimate: {0}")]
    CovarianceInput(&'static str),
    #[error("covariance matrix is not positive semidefinite")]
    NotPositiveSemidefinite,
    #[error("quantizer training: {0}")]
    QuantizerInput(String),
    #[error("quantizer training stalled with an unrepairable empty cell")]
    EmptyCell,
    #[error("codebook: {0}")]
    Codebook(String),
    #[error("experiment spec: {0}")]
    Experiment(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the CLI maps this error to: 2 for rejected input,
    /// 3 for failures at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::SnrDomain(_)
            | Error::NoiseVarDomain(_)
            | Error::BelowDesignSnr { .. }
            | Error::Settings(_)
            | Error::QuantizerInput(_)
            | Error::Codebook(_)
            | Error::Experiment(_)
            | Error::Json(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
