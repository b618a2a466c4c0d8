//! Experiment configurations. Each subcommand has its own schema; unknown
//! keys are rejected so a typo cannot silently fall back to a default.

use std::path::{Path, PathBuf};

use funcest::process::InnovationDistribution;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Reads and validates a config file, or falls back to the schema defaults.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Validation(format!("cannot read config {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text).map_err(|e| {
                CliError::Validation(format!("invalid config {}: {e}", path.display()))
            })
        }
    }
}

/// Canonical JSON of the effective configuration (after flag overrides).
pub fn canonical_json<T: Serialize>(config: &T) -> String {
    serde_json::to_string(config).expect("config serialization cannot fail")
}

pub fn parse_innovation(name: &str) -> Result<InnovationDistribution, CliError> {
    InnovationDistribution::parse(name).ok_or_else(|| {
        CliError::Validation(format!(
            "innovation: unknown value {name:?} (expected uniform | gaussian | double_exponential | student_t3)"
        ))
    })
}

fn beta_default() -> f64 {
    2.0
}

fn innovation_default() -> String {
    "gaussian".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub p: usize,
    pub n: usize,
    pub beta: f64,
    pub innovation: String,
    pub sparsify_frac: f64,
    pub truncation: usize,
    pub seed: u64,
    /// When set, the generated model is also serialized to this path.
    pub model_out: Option<PathBuf>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            p: 20,
            n: 100,
            beta: beta_default(),
            innovation: innovation_default(),
            sparsify_frac: 0.8,
            truncation: 200,
            seed: 1,
            model_out: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateConfig {
    /// CSV matrix of the covariance estimate.
    pub s_csv: Option<PathBuf>,
    /// CSV vector of the target.
    pub b_csv: Option<PathBuf>,
    pub lambda: f64,
    pub lp_tol: f64,
    pub lp_max_iter: usize,
    pub seed: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self { s_csv: None, b_csv: None, lambda: 0.1, lp_tol: 1e-9, lp_max_iter: 100_000, seed: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuneConfig {
    pub p: usize,
    pub n: usize,
    pub beta: f64,
    pub innovation: String,
    pub sparsify_frac: f64,
    pub theta_zero_frac: f64,
    pub truncation: usize,
    pub replicates: usize,
    pub grid_points: usize,
    pub grid_lo_frac: f64,
    pub grid_hi_frac: f64,
    /// Any of "oracle", "block".
    pub procedures: Vec<String>,
    /// When set, the first replicate's (lambda, loss) validation curves are
    /// also written to this path.
    pub curves_out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            p: 100,
            n: 100,
            beta: beta_default(),
            innovation: innovation_default(),
            sparsify_frac: 0.8,
            theta_zero_frac: 0.8,
            truncation: 200,
            replicates: 100,
            grid_points: 30,
            grid_lo_frac: 0.01,
            grid_hi_frac: 1.5,
            procedures: vec!["oracle".into(), "block".into()],
            curves_out: None,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(untagged)]
pub enum ModelChoice {
    /// "ar1" (coefficient -0.5) or "ar14" (the long sparse autoregression).
    Named(String),
    Custom { coefficients: Vec<f64>, noise_sd: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictConfig {
    pub model: ModelChoice,
    pub n: usize,
    pub replicates: usize,
    /// Any of "sfso", "fso", "ar_aic".
    pub methods: Vec<String>,
    /// null selects sqrt(log n / n).
    pub lambda: Option<f64>,
    pub max_order: Option<usize>,
    pub seed: u64,
}

impl Default for PredictConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::Named("ar1".into()),
            n: 500,
            replicates: 200,
            methods: vec!["sfso".into(), "ar_aic".into()],
            lambda: None,
            max_order: None,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum ReturnsSource {
    Synthetic { p: usize, n_days: usize, priced_assets: usize },
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PortfolioConfig {
    pub source: ReturnsSource,
    pub target_return: f64,
    pub window: usize,
    pub hold: usize,
    pub k_periods: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub functional_grid_max: f64,
    pub ridge_grid_max: f64,
    /// Any of "functional", "ridge".
    pub methods: Vec<String>,
    pub seed: u64,
}

impl Default for PortfolioConfig {
    fn default() -> Self {
        Self {
            source: ReturnsSource::Synthetic { p: 50, n_days: 700, priced_assets: 5 },
            target_return: 1.0,
            window: 125,
            hold: 21,
            k_periods: 3,
            n_train: 125,
            n_test: 21,
            functional_grid_max: 0.1,
            ridge_grid_max: 2.0,
            methods: vec!["functional".into(), "ridge".into()],
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum ClassifySource {
    Synthetic {
        p: usize,
        block_len: usize,
        train_blocks_per_class: usize,
        test_blocks_per_class: usize,
        shift_support: usize,
        shift_magnitude: f64,
        beta: f64,
        innovation: String,
    },
    Csv {
        train: PathBuf,
        test: PathBuf,
        window: usize,
        /// Band width for the functional direction; null tunes on the
        /// training data.
        lambda: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    pub source: ClassifySource,
    pub standardize: bool,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            source: ClassifySource::Synthetic {
                p: 200,
                block_len: 16,
                train_blocks_per_class: 10,
                test_blocks_per_class: 10,
                shift_support: 5,
                shift_magnitude: 0.8,
                beta: beta_default(),
                innovation: innovation_default(),
            },
            standardize: true,
            replicates: 10,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    /// "subgaussian" | "exponential" | "polynomial".
    pub regime: String,
    pub alpha: Option<f64>,
    pub q: Option<f64>,
    pub beta: f64,
    pub n: usize,
    pub p: usize,
    pub r_b: f64,
    pub seed: u64,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            regime: "subgaussian".into(),
            alpha: None,
            q: None,
            beta: beta_default(),
            n: 100,
            p: 100,
            r_b: 0.0,
            seed: 1,
        }
    }
}
