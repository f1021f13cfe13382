//! JSON experiment configs. The scale matrix is written as an array of row
//! arrays; symmetry is enforced at parse time, positive semi-definiteness
//! at `WishartSpec` construction.

use serde::{Deserialize, Serialize};
use wishart_cone::{SymMatrix, WishartSpec, DEFAULT_RANK_TOL};

use crate::failure::Failure;

fn default_n_samples() -> usize {
    200_000
}
fn default_seed() -> u64 {
    42
}
fn default_n_probes() -> usize {
    25
}
fn default_probe_seed() -> u64 {
    43
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub shape: f64,
    pub scale: SymMatrix,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_n_probes")]
    pub n_probes: usize,
    #[serde(default = "default_probe_seed")]
    pub probe_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tolerance: Option<f64>,
    /// Number of convolution factors for the divide command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_factors: Option<u32>,
}

impl ExperimentConfig {
    /// Reads and validates a config; the optional seed override replaces the
    /// config's sampling seed before anything else sees it.
    pub fn load(path: &std::path::Path, seed_override: Option<u64>) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Failure::invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::invalid(format!("config parse error: {e}")))?;
        if let Some(seed) = seed_override {
            config.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), Failure> {
        if self.n_samples < 1 {
            return Err(Failure::invalid("n_samples must be at least 1".into()));
        }
        if self.n_probes < 1 {
            return Err(Failure::invalid("n_probes must be at least 1".into()));
        }
        if self.n_factors == Some(0) {
            return Err(Failure::invalid("n_factors must be at least 1".into()));
        }
        if let Some(tol) = self.rank_tolerance {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Failure::invalid(format!(
                    "rank_tolerance must lie strictly between 0 and 1, got {tol}"
                )));
            }
        }
        Ok(())
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance.unwrap_or(DEFAULT_RANK_TOL)
    }

    /// The existence gate; errors keep their class so callers can pick exit
    /// codes.
    pub fn build_spec(&self) -> wishart_cone::Result<WishartSpec> {
        WishartSpec::with_rank_tolerance(self.shape, &self.scale, self.rank_tolerance())
    }

    /// One-line JSON echo of the effective config, embedded in every output
    /// so reports are self-describing.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
