//! Linear instantaneous impact: execution at `S_t = P_t - kappa r_t`.
//!
//! The unaffected price is `P_t = P_0 + Y_t + sigma_P W_t` with `Y` the
//! integrated signal. The revenue-risk functional is
//! `C_T - phi ∫ X^2 dt + X_T (P_T - varrho X_T)` when a terminal penalty is
//! set ([`Terminal::Penalized`]) and `C_T - phi ∫ X^2 dt` subject to
//! `X_T = 0` otherwise ([`Terminal::Fuel`]).

mod coefficients;
mod deterministic;
mod euler_lagrange;
mod model;
mod simulate;
mod static_schedule;

pub use coefficients::FeedbackTable;
pub use deterministic::{deterministic_value, DeterministicValue};
pub use euler_lagrange::{euler_lagrange_residual, DeterministicSchedule, ResidualProfile, Twap};
pub use model::{ExecutionSpec, InstantModel, Terminal};
pub use simulate::{simulate, InstantSimulator, InstantStrategy, MarketPath, RateFn, SimPath};
pub use static_schedule::{static_inventory, StaticSchedule};

use crate::error::{Error, Result};
use crate::signal::SignalParams;

/// Optimal adaptive speed in the penalized regime,
/// `r* = -(2 v2(t) X + iota ∫_t^T decay(t, s) e^{-gamma (s - t)} ds) / 2 kappa`.
pub fn adaptive_rate(
    model: &InstantModel,
    signal: &SignalParams,
    t: f64,
    inventory: f64,
    iota: f64,
    horizon: f64,
) -> Result<f64> {
    if model.is_fuel() {
        return Err(Error::RegimeMismatch("adaptive rate needs a terminal penalty; use fuel_rate".into()));
    }
    let v2 = model.v2(t, horizon)?;
    let weight = model.signal_weight(signal.gamma, t, horizon)?;
    Ok(-(2.0 * v2 * inventory + iota * weight) / (2.0 * model.kappa))
}

/// Fuel-constrained limit of the adaptive speed (`varrho -> ∞`), defined for `t < T`.
pub fn fuel_rate(
    model: &InstantModel,
    signal: &SignalParams,
    t: f64,
    inventory: f64,
    iota: f64,
    horizon: f64,
) -> Result<f64> {
    if !model.is_fuel() {
        return Err(Error::RegimeMismatch("fuel rate needs the fuel-constrained model".into()));
    }
    let v2 = model.v2_bar(t, horizon)?;
    let weight = model.signal_weight(signal.gamma, t, horizon)?;
    Ok(-(2.0 * v2 * inventory + iota * weight) / (2.0 * model.kappa))
}
