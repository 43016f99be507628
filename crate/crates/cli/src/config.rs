//! The `--utilities` document.
//!
//! ```json
//! {
//!   "utility": [[15, -335], [-35, 165]],
//!   "mixture": [{ "weight": 0.5, "utility": [[15, -335], [-35, 165]] },
//!               { "weight": 0.5, "utility": [[45, -335], [-65, 165]] }],
//!   "balance": 0.5,
//!   "experiment": { "pairs": 1000000, "sigmas": [0.0, 0.1], "prior": "uniform",
//!                   "prior_sigma": 0.3333, "chunk_size": 10000 },
//!   "seed": 42
//! }
//! ```
//!
//! Every field is optional. Rows are the chosen class, columns the true class.
//! When both `utility` and `mixture` are given the mixture wins.

use std::path::Path;

use serde::{Deserialize, Serialize};
use utility_eval::utility::UtilityMixture;
use utility_eval::UtilityMatrix;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityConfig {
    pub utility: Option<[[f64; 2]; 2]>,
    pub mixture: Option<Vec<MixtureEntry>>,
    pub balance: Option<f64>,
    #[serde(default)]
    pub experiment: ExperimentSection,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureEntry {
    pub weight: f64,
    pub utility: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub pairs: Option<u64>,
    pub sigmas: Option<Vec<f64>>,
    pub prior: Option<String>,
    pub prior_sigma: Option<f64>,
    pub chunk_size: Option<u64>,
}

impl UtilityConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_owned(),
            source,
        })?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if let Some(u) = self.utility {
            feasible(u)?;
        }
        if self.mixture.is_some() {
            self.mixture()?;
        }
        if let Some(b) = self.balance {
            if !(b > 0.0 && b < 1.0) {
                return Err(CliError::Config(format!(
                    "balance must lie strictly between 0 and 1, got {b}"
                )));
            }
        }
        Ok(())
    }

    fn mixture(&self) -> CliResult<Option<UtilityMixture>> {
        let Some(entries) = &self.mixture else {
            return Ok(None);
        };
        let components = entries
            .iter()
            .map(|e| Ok((e.weight, feasible(e.utility)?)))
            .collect::<CliResult<Vec<_>>>()?;
        UtilityMixture::new(components)
            .map(Some)
            .map_err(CliError::config)
    }

    /// The matrix to evaluate with: the mixture's expected matrix if present,
    /// else `utility`.
    pub fn effective_utility(&self) -> CliResult<UtilityMatrix> {
        if let Some(m) = self.mixture()? {
            return m.expected_matrix().map_err(CliError::config);
        }
        match self.utility {
            Some(u) => feasible(u),
            None => Err(CliError::Config(
                "the utilities file defines neither `utility` nor `mixture`".into(),
            )),
        }
    }
}

fn feasible(entries: [[f64; 2]; 2]) -> CliResult<UtilityMatrix> {
    let u = UtilityMatrix::new(entries).map_err(CliError::config)?;
    if !u.is_feasible() {
        return Err(CliError::Config(format!(
            "utility matrix {entries:?} prefers misclassification to correct classification"
        )));
    }
    Ok(u)
}
