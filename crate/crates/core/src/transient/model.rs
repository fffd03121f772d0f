use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result};

/// Impact scale `kappa` and resilience `rho`; risk aversion is zero in this regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransientModel {
    pub kappa: f64,
    pub rho: f64,
}

impl TransientModel {
    pub fn new(kappa: f64, rho: f64) -> Result<Self> {
        let model = TransientModel { kappa, rho };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("kappa", self.kappa)?;
        require_positive("rho", self.rho)?;
        Ok(())
    }
}
