//! Riccati coefficients of the value function `v0 + x v1 + x^2 v2`.
//!
//! `v2` solves `v2' + v2^2 / kappa - phi = 0` with `v2(T) = -varrho`; the
//! substitution `v2 = kappa w'/w` linearises it to `w'' = beta^2 w`. With
//! `tau = T - t` the normalised solution is
//!
//! ```text
//! penalized: w(tau) = kappa cosh(beta tau) + varrho sinh(beta tau) / beta
//! fuel:      w(tau) = sinh(beta tau) / beta
//! ```
//!
//! so the decay factor `exp(∫_t^s v2 / kappa)` is the ratio
//! `w(T - s) / w(T - t)` in both regimes, and `beta -> 0` is continuous.

use crate::error::{Error, Result};
use crate::oracles::{integrate, QuadTolerance};
use crate::signal::SignalParams;
use crate::special::{sinhc, tanhc, zcoth};

use super::model::{InstantModel, Terminal};

fn check_time(t: f64, horizon: f64) -> Result<()> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::param("T", format!("must be > 0, got {horizon}")));
    }
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::param("t", format!("must lie in [0, {horizon}], got {t}")));
    }
    Ok(())
}

impl InstantModel {
    /// Linearising potential `w(tau)` of the model's regime.
    pub(crate) fn potential(&self, tau: f64) -> f64 {
        let bt = self.beta() * tau;
        match self.terminal {
            Terminal::Penalized { varrho } => self.kappa * bt.cosh() + varrho * tau * sinhc(bt),
            Terminal::Fuel => tau * sinhc(bt),
        }
    }

    /// `v2(t)`; requires a terminal penalty.
    pub fn v2(&self, t: f64, horizon: f64) -> Result<f64> {
        let varrho = self
            .varrho()
            .ok_or_else(|| Error::RegimeMismatch("v2 needs a terminal penalty; use v2_bar".into()))?;
        check_time(t, horizon)?;
        let tau = horizon - t;
        let bt = self.beta() * tau;
        // sqrt(kappa phi) (1 + zeta e^{2 beta tau}) / (1 - zeta e^{2 beta tau}) rewritten without zeta
        let s = self.sqrt_kappa_phi();
        Ok(-(varrho + s * bt.tanh()) * self.kappa / (self.kappa + varrho * tau * tanhc(bt)))
    }

    /// `v2` in the `zeta` form; used to cross-check [`InstantModel::v2`].
    pub fn v2_zeta_form(&self, t: f64, horizon: f64) -> Result<f64> {
        let zeta = self.zeta().ok_or_else(|| Error::RegimeMismatch("zeta needs a terminal penalty".into()))?;
        check_time(t, horizon)?;
        let e = zeta * (2.0 * self.beta() * (horizon - t)).exp();
        Ok(self.sqrt_kappa_phi() * (1.0 + e) / (1.0 - e))
    }

    /// Fuel limit `-sqrt(kappa phi) coth(beta (T - t))`, defined for `t < T`.
    pub fn v2_bar(&self, t: f64, horizon: f64) -> Result<f64> {
        check_time(t, horizon)?;
        if t >= horizon {
            return Err(Error::param("t", format!("v2_bar diverges at the horizon; need t < {horizon}")));
        }
        let tau = horizon - t;
        Ok(-self.kappa / tau * zcoth(self.beta() * tau))
    }

    /// `v2` or its fuel limit, by regime.
    pub fn riccati(&self, t: f64, horizon: f64) -> Result<f64> {
        match self.terminal {
            Terminal::Penalized { .. } => self.v2(t, horizon),
            Terminal::Fuel => self.v2_bar(t, horizon),
        }
    }

    /// `exp((1/kappa) ∫_t^s v2(u) du)` for `t <= s <= T`.
    pub fn decay_factor(&self, t: f64, s: f64, horizon: f64) -> Result<f64> {
        check_time(t, horizon)?;
        check_time(s, horizon)?;
        if s < t {
            return Err(Error::param("s", format!("must be >= t = {t}, got {s}")));
        }
        if s == t {
            return Ok(1.0);
        }
        Ok(self.potential(horizon - s) / self.potential(horizon - t))
    }

    /// `∫_t^T e^{-gamma (s - t)} decay(t, s) ds`, the signal loading of the
    /// adaptive rate (so `v1(t, iota) = iota * signal_weight`).
    pub fn signal_weight(&self, gamma: f64, t: f64, horizon: f64) -> Result<f64> {
        check_time(t, horizon)?;
        let w0 = self.potential(horizon - t);
        if w0 == 0.0 {
            return Ok(0.0);
        }
        let integral = integrate(
            |s| (-gamma * (s - t)).exp() * self.potential(horizon - s),
            t,
            horizon,
            QuadTolerance { abs: 1e-12 * w0, rel: 1e-11 },
        )?;
        Ok(integral / w0)
    }

    /// `signal_weight` on every point of `grid` (ending at `T`) in one
    /// backward sweep of per-interval quadratures.
    pub fn signal_weights_on_grid(&self, gamma: f64, grid: &[f64]) -> Result<Vec<f64>> {
        let horizon = *grid.last().ok_or_else(|| Error::InvalidGrid("grid is empty".into()))?;
        let mut out = vec![0.0; grid.len()];
        // acc_k = ∫_{t_k}^T e^{-gamma (s - t_k)} w(T - s) ds
        let mut acc = 0.0;
        for k in (0..grid.len().saturating_sub(1)).rev() {
            let (a, b) = (grid[k], grid[k + 1]);
            let piece = integrate(
                |s| (-gamma * (s - a)).exp() * self.potential(horizon - s),
                a,
                b,
                QuadTolerance { abs: 1e-15 * self.potential(horizon - a).max(1e-300), rel: 1e-13 },
            )?;
            acc = piece + (-gamma * (b - a)).exp() * acc;
            out[k] = acc / self.potential(horizon - a);
        }
        Ok(out)
    }

    /// `v1(t, iota) = ∫_t^T E[I_s | I_t = iota] decay(t, s) ds`.
    pub fn v1(&self, signal: &SignalParams, t: f64, iota: f64, horizon: f64) -> Result<f64> {
        Ok(iota * self.signal_weight(signal.gamma, t, horizon)?)
    }

    /// `v0(t, iota) = (1 / 4 kappa) ∫_t^T E[v1(s, I_s)^2 | I_t = iota] ds`.
    ///
    /// `v1` is linear in the signal, so the inner expectation is
    /// `signal_weight(s)^2 E[I_s^2 | I_t = iota]`.
    pub fn v0(&self, signal: &SignalParams, t: f64, iota: f64, horizon: f64) -> Result<f64> {
        check_time(t, horizon)?;
        let mut failure = None;
        let integral = integrate(
            |s| match self.signal_weight(signal.gamma, s, horizon) {
                Ok(a) => a * a * signal.conditional_second_moment(iota, s - t),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            t,
            horizon,
            QuadTolerance::default(),
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(integral / (4.0 * self.kappa))
    }
}

/// Per-grid-point gains of a linear feedback rate
/// `r_k = inventory_gain[k] X + signal_gain[k] I`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackTable {
    pub inventory_gain: Vec<f64>,
    pub signal_gain: Vec<f64>,
}

impl FeedbackTable {
    /// Tabulates `-v2 / kappa` and `-signal_weight / 2 kappa`. In the fuel
    /// regime the horizon point is left as NaN: the rate diverges there.
    pub fn new(model: &InstantModel, signal: &SignalParams, grid: &[f64]) -> Result<Self> {
        let horizon = *grid.last().ok_or_else(|| Error::InvalidGrid("grid is empty".into()))?;
        let weights = model.signal_weights_on_grid(signal.gamma, grid)?;
        let mut inventory_gain = Vec::with_capacity(grid.len());
        let mut signal_gain = Vec::with_capacity(grid.len());
        for (k, &t) in grid.iter().enumerate() {
            if model.is_fuel() && k + 1 == grid.len() {
                inventory_gain.push(f64::NAN);
                signal_gain.push(f64::NAN);
                continue;
            }
            inventory_gain.push(-model.riccati(t, horizon)? / model.kappa);
            signal_gain.push(-weights[k] / (2.0 * model.kappa));
        }
        Ok(FeedbackTable { inventory_gain, signal_gain })
    }
}
