//! A complete, validated simulation setup: regime, signal, model
//! parameters, execution spec and grid.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{require_nonneg, require_positive, Error, Result};
use crate::instant::{ExecutionSpec, InstantModel, InstantStrategy};
use crate::signal::SignalParams;
use crate::transient::TransientModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Regime {
    InstantPenalized { varrho: f64 },
    InstantFuel,
    Transient { rho: f64 },
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::InstantPenalized { .. } => "instant-penalized",
            Regime::InstantFuel => "instant-fuel",
            Regime::Transient { .. } => "transient",
        }
    }

    pub fn is_transient(&self) -> bool {
        matches!(self, Regime::Transient { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// The regime's signal-adaptive optimum (penalized or fuel-constrained).
    Adaptive,
    /// Fuel-constrained adaptive optimum; only in the fuel regime.
    Fuel,
    /// Optimal static schedule computed from the initial signal.
    Static,
    /// Constant-rate liquidation without blocks.
    Twap,
    /// Static schedule re-planned at `n` equally spaced times (transient regime).
    MultiUpdate(usize),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Adaptive => f.write_str("adaptive"),
            Strategy::Fuel => f.write_str("fuel"),
            Strategy::Static => f.write_str("static"),
            Strategy::Twap => f.write_str("twap"),
            Strategy::MultiUpdate(n) => write!(f, "update-{n}"),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adaptive" => Ok(Strategy::Adaptive),
            "fuel" => Ok(Strategy::Fuel),
            "static" => Ok(Strategy::Static),
            "twap" => Ok(Strategy::Twap),
            _ => s
                .strip_prefix("update-")
                .and_then(|n| n.parse().ok())
                .filter(|&n: &usize| n >= 1)
                .map(Strategy::MultiUpdate)
                .ok_or_else(|| {
                    Error::param("strategy", format!("unknown strategy `{s}` (adaptive, fuel, static, twap, update-N)"))
                }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub regime: Regime,
    pub signal: SignalParams,
    pub kappa: f64,
    /// Risk leverage; ignored in the transient regime.
    pub phi_hat: f64,
    /// Price volatility; ignored in the transient regime.
    pub sigma_p: f64,
    pub spec: ExecutionSpec,
    /// Uniform time steps on `[0, T]`.
    pub steps: usize,
    /// Brownian component of the unaffected price (instantaneous regimes).
    pub price_noise: bool,
}

impl Scenario {
    /// `gamma = 0.1, sigma = 0.1, iota = 0.2, T = 10, kappa = 0.5,
    /// phi_hat = 0.1, sigma_P = 1, x0 = 10, P0 = 10`; `rho = 1` for transient impact.
    pub fn reference(regime: Regime) -> Self {
        Scenario {
            regime,
            signal: SignalParams { gamma: 0.1, sigma: 0.1, iota0: 0.2 },
            kappa: 0.5,
            phi_hat: 0.1,
            sigma_p: 1.0,
            spec: ExecutionSpec { x0: 10.0, horizon: 10.0, p0: 10.0, c0: 0.0 },
            steps: Self::default_steps(&regime),
            price_noise: true,
        }
    }

    /// `10^4` steps for instantaneous impact; 2004 (divisible by 1..=4 and 6) for transient.
    pub fn default_steps(regime: &Regime) -> usize {
        if regime.is_transient() {
            2004
        } else {
            10_000
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.signal.validate()?;
        self.spec.validate()?;
        require_positive("kappa", self.kappa)?;
        require_nonneg("phi_hat", self.phi_hat)?;
        require_nonneg("sigma_P", self.sigma_p)?;
        if self.steps == 0 {
            return Err(Error::param("steps", "must be >= 1"));
        }
        match self.regime {
            Regime::Transient { rho } => {
                TransientModel::new(self.kappa, rho)?;
            }
            _ => {
                self.instant_model()?;
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.spec.horizon / self.steps as f64
    }

    pub fn instant_model(&self) -> Result<InstantModel> {
        match self.regime {
            Regime::InstantPenalized { varrho } => InstantModel::penalized(self.kappa, self.phi_hat, self.sigma_p, varrho),
            Regime::InstantFuel => InstantModel::fuel(self.kappa, self.phi_hat, self.sigma_p),
            Regime::Transient { .. } => Err(Error::RegimeMismatch("transient scenario has no instant model".into())),
        }
    }

    pub fn transient_model(&self) -> Result<TransientModel> {
        match self.regime {
            Regime::Transient { rho } => TransientModel::new(self.kappa, rho),
            _ => Err(Error::RegimeMismatch("instantaneous scenario has no transient model".into())),
        }
    }

    /// The simulator strategy for `strategy` in an instantaneous regime.
    pub fn instant_strategy(&self, strategy: Strategy) -> Result<InstantStrategy> {
        let x0 = self.spec.x0;
        let horizon = self.spec.horizon;
        match (self.regime, strategy) {
            (Regime::Transient { .. }, _) => {
                Err(Error::RegimeMismatch("transient scenario has no instantaneous strategies".into()))
            }
            (Regime::InstantPenalized { .. }, Strategy::Adaptive) => Ok(InstantStrategy::Adaptive),
            (Regime::InstantFuel, Strategy::Adaptive | Strategy::Fuel) => Ok(InstantStrategy::Fuel),
            (_, Strategy::Static) => Ok(InstantStrategy::Static),
            (_, Strategy::Twap) => Ok(InstantStrategy::Custom(std::sync::Arc::new(move |_| x0 / horizon))),
            (regime, s) => Err(Error::RegimeMismatch(format!("strategy `{s}` is not available in the {} regime", regime.tag()))),
        }
    }

    /// Checks that `strategy` can run in this scenario's regime.
    pub fn check_strategy(&self, strategy: Strategy) -> Result<()> {
        match (self.regime, strategy) {
            (Regime::Transient { .. }, Strategy::Static | Strategy::Twap | Strategy::MultiUpdate(_)) => {
                if let Strategy::MultiUpdate(n) = strategy {
                    if n == 0 || self.steps % n != 0 {
                        return Err(Error::param(
                            "steps",
                            format!("{} steps cannot host {n} equally spaced updates", self.steps),
                        ));
                    }
                }
                Ok(())
            }
            (Regime::Transient { .. }, s) => {
                Err(Error::RegimeMismatch(format!("strategy `{s}` is not available in the transient regime")))
            }
            _ => self.instant_strategy(strategy).map(|_| ()),
        }
    }
}
