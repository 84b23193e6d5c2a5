//! TOML run configuration. Every field is optional; command-line flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use unipotent_core::lie::AlgebraSpec;

use crate::error::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub algebra: Option<AlgebraSpec>,
    /// Coefficients of `U` in the algebra basis, as rational strings.
    pub element: Option<Vec<String>>,
    pub suite: Option<String>,
    pub quick: Option<bool>,
    #[serde(default)]
    pub simulate: SimulateConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub r: f64,
    pub eps: f64,
    pub grid_points: usize,
    pub samples: usize,
    pub t_values: Vec<f64>,
    pub delta0: f64,
    pub horizon: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            r: 4096.0,
            eps: 0.2,
            grid_points: 1000,
            samples: 100_000,
            t_values: vec![50.0, 100.0, 200.0, 400.0, 800.0],
            delta0: 1e-6,
            horizon: 1e4,
        }
    }
}

impl SimulateConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.t_values.is_empty() {
            return Err(CliError::Config("t_values must be nonempty".into()));
        }
        if self.grid_points < 2 || !(self.r > 0.0) || !(self.eps > 0.0) || !(self.horizon > 0.0) {
            return Err(CliError::Config("grid_points >= 2 and positive r, eps, horizon required".into()));
        }
        Ok(())
    }
}

pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    cfg.simulate.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_algebra_and_simulation() {
        let cfg: RunConfig = toml::from_str(
            r#"
            seed = 3
            element = ["1", "0", "0", "0", "0", "0", "0", "0"]
            [algebra]
            builtin = "sl"
            d = 3
            [simulate]
            eps = 0.1
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.algebra.unwrap().build().unwrap().dim(), 8);
        assert_eq!(cfg.simulate.eps, 0.1);
        assert_eq!(cfg.simulate.grid_points, 1000);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<RunConfig>("sed = 1").is_err());
    }
}
