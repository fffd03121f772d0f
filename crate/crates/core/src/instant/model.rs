use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_nonneg, require_positive, Error, Result};

/// How unexecuted inventory at the horizon is treated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Terminal {
    /// Remaining inventory is marked at `P_T` and charged `varrho X_T^2`.
    Penalized { varrho: f64 },
    /// The schedule must finish flat, `X_T = 0`.
    Fuel,
}

/// Impact and risk parameters of the instantaneous regime.
///
/// Derived quantities (`phi`, `beta`, `zeta`) are always recomputed from the
/// stored inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstantModel {
    pub kappa: f64,
    pub phi_hat: f64,
    pub sigma_p: f64,
    pub terminal: Terminal,
}

impl InstantModel {
    pub fn penalized(kappa: f64, phi_hat: f64, sigma_p: f64, varrho: f64) -> Result<Self> {
        let model = InstantModel { kappa, phi_hat, sigma_p, terminal: Terminal::Penalized { varrho } };
        model.validate()?;
        Ok(model)
    }

    pub fn fuel(kappa: f64, phi_hat: f64, sigma_p: f64) -> Result<Self> {
        let model = InstantModel { kappa, phi_hat, sigma_p, terminal: Terminal::Fuel };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("kappa", self.kappa)?;
        require_nonneg("phi_hat", self.phi_hat)?;
        require_nonneg("sigma_p", self.sigma_p)?;
        if let Terminal::Penalized { varrho } = self.terminal {
            require_nonneg("varrho", varrho)?;
            let s = self.sqrt_kappa_phi();
            // zeta = (varrho + s) / (varrho - s) is undefined at varrho = s.
            if (varrho - s).abs() <= 1e-12 * s {
                return Err(Error::param(
                    "varrho",
                    format!("must differ from sqrt(kappa * phi) = {s}; zeta is singular there"),
                ));
            }
        }
        Ok(())
    }

    /// Running risk weight `phi = sigma_P^2 phi_hat`.
    pub fn phi(&self) -> f64 {
        self.sigma_p * self.sigma_p * self.phi_hat
    }

    /// `beta = sqrt(phi / kappa)`.
    pub fn beta(&self) -> f64 {
        (self.phi() / self.kappa).sqrt()
    }

    pub fn sqrt_kappa_phi(&self) -> f64 {
        (self.kappa * self.phi()).sqrt()
    }

    pub fn varrho(&self) -> Option<f64> {
        match self.terminal {
            Terminal::Penalized { varrho } => Some(varrho),
            Terminal::Fuel => None,
        }
    }

    /// `zeta = (varrho + sqrt(kappa phi)) / (varrho - sqrt(kappa phi))`; `None` in the fuel regime.
    pub fn zeta(&self) -> Option<f64> {
        let s = self.sqrt_kappa_phi();
        self.varrho().map(|r| (r + s) / (r - s))
    }

    pub fn is_fuel(&self) -> bool {
        matches!(self.terminal, Terminal::Fuel)
    }
}

/// Initial conditions and horizon of one liquidation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecutionSpec {
    /// Shares to sell.
    pub x0: f64,
    /// Horizon `T`.
    pub horizon: f64,
    /// Unaffected price at time 0.
    pub p0: f64,
    /// Initial cash.
    pub c0: f64,
}

impl ExecutionSpec {
    pub fn new(x0: f64, horizon: f64, p0: f64, c0: f64) -> Result<Self> {
        let spec = ExecutionSpec { x0, horizon, p0, c0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        require_nonneg("x0", self.x0)?;
        require_positive("T", self.horizon)?;
        require_finite("P0", self.p0)?;
        require_finite("c0", self.c0)?;
        Ok(())
    }
}
