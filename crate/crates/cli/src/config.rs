//! TOML scenario files. Every section and key is optional (defaults are
//! the reference parameters) and unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sigexec_core::instant::ExecutionSpec;
use sigexec_core::{Regime, Scenario, SignalParams};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub regime: RegimeSection,
    pub signal: SignalSection,
    pub model: ModelSection,
    pub execution: ExecutionSection,
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeSection {
    /// `instant-fuel`, `instant-penalized` or `transient`.
    pub kind: String,
    pub varrho: f64,
    pub rho: f64,
}

impl Default for RegimeSection {
    fn default() -> Self {
        RegimeSection { kind: "instant-fuel".into(), varrho: 1.0, rho: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalSection {
    pub gamma: f64,
    pub sigma: f64,
    pub iota0: f64,
}

impl Default for SignalSection {
    fn default() -> Self {
        SignalSection { gamma: 0.1, sigma: 0.1, iota0: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kappa: f64,
    pub phi_hat: f64,
    #[serde(rename = "sigma_P")]
    pub sigma_p: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { kappa: 0.5, phi_hat: 0.1, sigma_p: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutionSection {
    pub x0: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "P0")]
    pub p0: f64,
    pub c0: f64,
}

impl Default for ExecutionSection {
    fn default() -> Self {
        ExecutionSection { x0: 10.0, horizon: 10.0, p0: 10.0, c0: 0.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    /// Uniform steps on `[0, T]`; defaults to 10000 (instantaneous) or 2004 (transient).
    pub steps: Option<usize>,
    /// Step size; overrides `steps` when set.
    pub dt: Option<f64>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub price_noise: Option<bool>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(m) | ConfigError::Parse(m) | ConfigError::Invalid(m) => f.write_str(m),
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError::Io(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(format!("config: {e}")))
    }

    /// Canonical text used for fingerprints.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn regime(&self) -> Result<Regime, ConfigError> {
        match self.regime.kind.as_str() {
            "instant-fuel" => Ok(Regime::InstantFuel),
            "instant-penalized" => Ok(Regime::InstantPenalized { varrho: self.regime.varrho }),
            "transient" => Ok(Regime::Transient { rho: self.regime.rho }),
            other => Err(ConfigError::Invalid(format!(
                "invalid parameter `kind`: unknown regime `{other}` (instant-fuel, instant-penalized, transient)"
            ))),
        }
    }

    /// Validated scenario; `dt` (when given) overrides the configured grid.
    pub fn scenario(&self, dt: Option<f64>) -> Result<Scenario, ConfigError> {
        self.scenario_for(self.regime()?, dt)
    }

    /// As [`Config::scenario`] but in `regime`, whatever the file says.
    pub fn scenario_for(&self, regime: Regime, dt: Option<f64>) -> Result<Scenario, ConfigError> {
        let horizon = self.execution.horizon;
        let steps = match dt.or(self.simulation.dt) {
            Some(dt) => {
                if !(dt > 0.0) || !dt.is_finite() {
                    return Err(ConfigError::Invalid(format!("invalid parameter `dt`: must be > 0, got {dt}")));
                }
                (horizon / dt).round().max(1.0) as usize
            }
            None => self.simulation.steps.unwrap_or_else(|| Scenario::default_steps(&regime)),
        };
        let scenario = Scenario {
            regime,
            signal: SignalParams { gamma: self.signal.gamma, sigma: self.signal.sigma, iota0: self.signal.iota0 },
            kappa: self.model.kappa,
            phi_hat: self.model.phi_hat,
            sigma_p: self.model.sigma_p,
            spec: ExecutionSpec { x0: self.execution.x0, horizon, p0: self.execution.p0, c0: self.execution.c0 },
            steps,
            price_noise: self.simulation.price_noise.unwrap_or(true),
        };
        scenario.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_reference_parameters() {
        let s = Config::default().scenario(None).unwrap();
        assert_eq!(s, Scenario::reference(Regime::InstantFuel));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = Config::parse("[signal]\ngama = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("gama"));
        assert!(Config::parse("[signals]\n").is_err());
    }

    #[test]
    fn invalid_values_name_the_field() {
        let c = Config::parse("[execution]\nT = -1\n").unwrap();
        let err = c.scenario(None).unwrap_err();
        assert!(err.to_string().contains("`T`"), "{err}");
        let c = Config::parse("[regime]\nkind = \"transient\"\nrho = 0\n").unwrap();
        assert!(c.scenario(None).unwrap_err().to_string().contains("`rho`"));
    }

    #[test]
    fn dt_overrides_steps() {
        let c = Config::parse("[simulation]\nsteps = 50\n").unwrap();
        assert_eq!(c.scenario(None).unwrap().steps, 50);
        assert_eq!(c.scenario(Some(0.01)).unwrap().steps, 1000);
    }
}
