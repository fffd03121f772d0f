//! Static versus signal-adaptive optimal execution.
//!
//! A trader liquidates `x0` shares over `[0, T]` while observing a
//! mean-reverting (Ornstein-Uhlenbeck) signal that drives the drift of the
//! unaffected price. The crate implements, for two impact regimes, the
//! optimal static schedule, the signal-adaptive strategy, a pathwise
//! simulator of the revenue functional, and a seeded Monte Carlo engine
//! that compares strategies on common random numbers.
//!
//! * [`signal`]: exact joint sampling of the signal and its time integral.
//! * [`instant`]: linear instantaneous impact `S = P - kappa r`, Riccati
//!   coefficients, adaptive and fuel-constrained feedback rates, the
//!   closed-form static schedule and its Euler-Lagrange certificate.
//! * [`transient`]: exponentially decaying impact, the revenue quadratic
//!   form, the static schedule and the n-update restart heuristic.
//! * [`montecarlo`]: estimates, paired comparisons and parameter sweeps.
//! * [`oracles`]: quadrature, a two-point BVP solver and finite-difference
//!   residuals used to certify the closed forms.

pub mod error;
pub mod instant;
pub mod montecarlo;
pub mod oracles;
pub mod rng;
pub mod scenario;
pub mod signal;
pub mod special;
pub mod transient;
pub mod validation;

pub use error::{Error, Result};
pub use instant::{ExecutionSpec, InstantModel, SimPath, Terminal};
pub use montecarlo::{PairedEstimate, RevenueEstimate};
pub use scenario::{Regime, Scenario, Strategy};
pub use signal::{OuState, SignalParams};
pub use transient::{TradeSchedule, TransientModel};
