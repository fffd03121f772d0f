//! Transient (exponentially decaying) impact.
//!
//! Trading `dX` displaces the execution price by `kappa rho ∫ e^{-rho (t - s)} dX_s`,
//! so a schedule's revenue is
//!
//! ```text
//! P0 x - ∫ Y_t dX_t - (kappa rho / 2) ∫∫ e^{-rho |t - s|} dX_t dX_s
//! ```
//!
//! with `Y` the integrated signal. Schedules mix block trades (atoms) with
//! continuous selling; both are discretised onto a time grid before pricing.

mod model;
mod multi_update;
mod path;
mod plan;
mod revenue;
mod schedule;

pub use model::TransientModel;
pub use multi_update::{multi_update_schedule, restart_nodes};
pub use path::SignalPath;
pub use plan::{basis, static_schedule, StaticPlan};
pub use revenue::{cash_on_grid, execution_revenue, impacted_price, kernel_energy, revenue, revenue_dense};
pub use schedule::{Atom, Trade, TradeSchedule};
