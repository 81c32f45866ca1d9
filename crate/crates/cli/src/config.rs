//! Monte-Carlo experiment files.
//!
//! ```toml
//! version = 1
//! ell = 8
//! k_values = [2, 4, 8]
//! nbar = 1.0
//! orders = [1, 2, 3, 4]
//! trials = 10000
//! seed = 2023            # optional, --seed takes precedence
//!
//! [[families]]
//! kind = "squeezed"
//!
//! [[families]]
//! kind = "lossy_squeezed"
//! eta = 0.5
//! ```
//!
//! `kind` is one of `squeezed`, `lossy_squeezed` (with `eta`), `squashed`
//! and `thermal`.

use std::path::Path;

use photon_cumulants::gaussian::StateFamily;
use photon_cumulants::haar_mc::McConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub ell: usize,
    pub k_values: Vec<usize>,
    pub nbar: f64,
    pub orders: Vec<usize>,
    pub trials: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    pub families: Vec<StateFamily>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Input(format!("bad experiment config: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::Input(format!(
                "unsupported experiment config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        if cfg.families.is_empty() {
            return Err(CliError::Input("experiment config lists no families".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Library configuration for the first family; the seed is resolved
    /// before the call.
    pub fn base(&self, seed: u64) -> McConfig {
        McConfig {
            ell: self.ell,
            k_values: self.k_values.clone(),
            family: self.families[0],
            nbar: self.nbar,
            orders: self.orders.clone(),
            trials: self.trials,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
version = 1
ell = 4
k_values = [2, 4]
nbar = 1.0
orders = [1, 2]
trials = 5
[[families]]
kind = "thermal"
[[families]]
kind = "lossy_squeezed"
eta = 0.5
"#;

    #[test]
    fn parses_families() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.families, vec![StateFamily::Thermal, StateFamily::LossySqueezed { eta: 0.5 }]);
        assert_eq!(cfg.seed, None);
        assert_eq!(cfg.base(7).seed, 7);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ExperimentConfig::parse(&SAMPLE.replace("version = 1", "version = 2")).is_err());
        assert!(ExperimentConfig::parse(&format!("extra = 1\n{SAMPLE}")).is_err());
        assert!(ExperimentConfig::parse("version = 1").is_err());
    }
}
