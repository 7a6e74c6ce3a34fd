//! Run configuration bundle shared by the CLI commands.
//!
//! Every field has a default; an emitted config parses back to an equal
//! value and re-emits byte-identically.

use crate::mcd::NormKind;
use crate::posterior::Hyperparams;
use crate::sampler::ChainConfig;
use crate::simulate::{DataLaw, TruthSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; per-column and per-replicate streams derive from it.
    pub seed: u64,
    /// Worker threads; `None` means available parallelism.
    pub workers: Option<usize>,
    pub hyper: Hyperparams,
    pub chain: ChainConfig,
    pub truth: TruthSpec,
    /// Number of observations to simulate.
    pub n: usize,
    pub data_law: DataLaw,
    pub standardize: bool,
    /// Replicates per grid cell (replicate and rate-probe commands).
    pub replicates: usize,
    /// Sample sizes for the rate probe.
    pub n_grid: Vec<usize>,
    /// α sweep for the replicate command.
    pub alpha_grid: Vec<f64>,
    /// Norm used by the rate probe.
    pub norm: NormKind,
    /// Posterior (A, D) draws per fitted model where applicable.
    pub posterior_draws: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: None,
            hyper: Hyperparams::default(),
            chain: ChainConfig::default(),
            truth: TruthSpec::default(),
            n: 100,
            data_law: DataLaw::Gaussian,
            standardize: false,
            replicates: 10,
            n_grid: vec![100, 200, 400],
            alpha_grid: vec![0.999, 0.8, 0.6, 0.4, 0.2],
            norm: NormKind::Frobenius,
            posterior_draws: 20,
        }
    }
}

impl RunConfig {
    pub fn emit(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn validate(&self) -> Result<Vec<String>, String> {
        let warnings = self.hyper.validate()?;
        self.truth.validate()?;
        self.chain.validate().map_err(|e| e.to_string())?;
        if self.n < 3 {
            return Err(format!("n must be at least 3, got {}", self.n));
        }
        if self.replicates == 0 {
            return Err("replicates must be positive".into());
        }
        Ok(warnings)
    }
}
