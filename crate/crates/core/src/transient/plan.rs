//! Optimal static schedule under transient impact with an OU signal.
//!
//! Starting at `s` with inventory `x` and signal `iota`, write `u = t - s`,
//! `tau = T - s` and `c = iota (rho^2 - gamma^2) / (2 kappa rho^2)`. The
//! optimum trades a block `J0` at `s`, sells continuously with
//! `X(u) = x + J0 + a u - c L2(u)` on `(0, tau]`, and closes the remainder
//! in a block at `T`, where `L2(u) = ∫_0^u ∫_0^v e^{-gamma w} dw dv` and
//!
//! ```text
//! a (2 / rho + tau) = -x - iota (rho + gamma) / (2 kappa rho^3)
//!                     + c (rho el(tau) + 1) / (rho (rho + gamma)) + c L2(tau)
//! J0 = a / rho + iota (rho + gamma) / (2 kappa rho^3)
//! ```
//!
//! with `el(u) = (1 - e^{-gamma u}) / gamma`. This form stays finite as
//! `gamma -> 0`; [`basis`] gives the equivalent `b0..b3` representation.

use crate::error::{Error, Result};
use crate::signal::{validate_grid, SignalParams};
use crate::special::{exp_double_integral, exp_integral};

use super::model::TransientModel;
use super::schedule::{Atom, TradeSchedule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticPlan {
    pub x: f64,
    pub start: f64,
    pub end: f64,
    pub iota: f64,
    gamma: f64,
    rho: f64,
    kappa: f64,
    slope: f64,
    curvature: f64,
    initial_block: f64,
}

impl StaticPlan {
    pub fn new(model: &TransientModel, gamma: f64, iota: f64, x: f64, start: f64, end: f64) -> Result<Self> {
        model.validate()?;
        if !(start < end) || !start.is_finite() || !end.is_finite() {
            return Err(Error::param("s", format!("start {start} must precede the horizon {end}")));
        }
        if !gamma.is_finite() || gamma < 0.0 || !iota.is_finite() || !x.is_finite() {
            return Err(Error::param("iota", "signal level, gamma and inventory must be finite, gamma >= 0"));
        }
        let (k, r, g) = (model.kappa, model.rho, gamma);
        let tau = end - start;
        let c = iota * (r * r - g * g) / (2.0 * k * r * r);
        let lead = iota * (r + g) / (2.0 * k * r * r * r);
        let tail = c * (r * exp_integral(g, tau) + 1.0) / (r * (r + g));
        let slope = (-x - lead + tail + c * exp_double_integral(g, tau)) / (2.0 / r + tau);
        Ok(StaticPlan {
            x,
            start,
            end,
            iota,
            gamma,
            rho: r,
            kappa: k,
            slope,
            curvature: c,
            initial_block: slope / r + lead,
        })
    }

    /// Block traded at the start (inventory change).
    pub fn initial_block(&self) -> f64 {
        self.initial_block
    }

    /// Block traded at the horizon, `-X(T)`.
    pub fn terminal_block(&self) -> f64 {
        -self.inventory_relative(self.end - self.start)
    }

    /// Closed form of [`StaticPlan::terminal_block`], kept as a consistency check.
    pub fn terminal_block_closed_form(&self) -> f64 {
        let (r, g, tau) = (self.rho, self.gamma, self.end - self.start);
        self.slope / r - self.curvature * (r * exp_integral(g, tau) + 1.0) / (r * (r + g))
    }

    /// Left-continuous inventory at `u = t - start`.
    pub fn inventory_relative(&self, u: f64) -> f64 {
        if u <= 0.0 {
            self.x
        } else if u > self.end - self.start {
            0.0
        } else {
            self.x + self.initial_block + self.slope * u - self.curvature * exp_double_integral(self.gamma, u)
        }
    }

    pub fn inventory(&self, t: f64) -> f64 {
        self.inventory_relative(t - self.start)
    }

    /// Continuous selling speed `-dX/dt` on `(start, end)`.
    pub fn rate(&self, t: f64) -> f64 {
        -self.slope + self.curvature * exp_integral(self.gamma, t - self.start)
    }

    /// Inventory from the `b0..b3` representation, for `gamma > 0`.
    pub fn inventory_from_basis(&self, t: f64) -> f64 {
        let (r, g, k) = (self.rho, self.gamma, self.kappa);
        let [b0, b1, b2, b3] = basis(t - self.start, self.end - self.start, r, g);
        (1.0 - b0) * self.x
            + self.iota / (2.0 * k * r * r * g) * ((r * r - g * g) / g * b1 - (r + g) * b2 - (r - g) * b3)
    }

    /// Writes this plan's trades on nodes `from..=to` of `grid` into `rates`
    /// and `atoms`, closing out at `to` when it is the horizon. Returns the
    /// inventory reached at node `to` (before any block there).
    pub(crate) fn fill(
        &self,
        grid: &[f64],
        from: usize,
        to: usize,
        rates: &mut [f64],
        atoms: &mut Vec<Atom>,
    ) -> f64 {
        atoms.push(Atom { node: from, time: grid[from], size: self.initial_block });
        let mut prev = self.x + self.initial_block;
        for i in from..to {
            let next = self.inventory(grid[i + 1]);
            rates[i] = (prev - next) / (grid[i + 1] - grid[i]);
            prev = next;
        }
        if to + 1 == grid.len() {
            atoms.push(Atom { node: to, time: grid[to], size: -prev });
        }
        prev
    }
}

/// `[b0, b1, b2, b3]` at relative time `t` on a horizon `T`. The smooth
/// parts are frozen at `T`, so every bracket vanishes after the horizon.
pub fn basis(t: f64, horizon: f64, rho: f64, gamma: f64) -> [f64; 4] {
    let after = |c: bool| if c { 1.0 } else { 0.0 };
    let s = t.min(horizon);
    let b0 = (after(t > 0.0) + after(t > horizon) + rho * s) / (2.0 + rho * horizon);
    let b1 = 1.0 - (-gamma * s).exp() - b0 * (1.0 - (-gamma * horizon).exp());
    let b2 = after(t > horizon) + rho * s - b0 * (1.0 + rho * horizon);
    let b3 = (b0 - after(t > horizon)) * (-gamma * horizon).exp();
    [b0, b1, b2, b3]
}

/// Node of `grid` equal to `t` (within rounding).
pub(crate) fn node_of(grid: &[f64], t: f64) -> Result<usize> {
    let tol = 1e-12 * grid.last().copied().unwrap_or(1.0).abs().max(1.0);
    let i = grid.partition_point(|&g| g < t - tol);
    if i < grid.len() && (grid[i] - t).abs() <= tol {
        Ok(i)
    } else {
        Err(Error::InvalidGrid(format!("t = {t} is not a grid node")))
    }
}

/// Static schedule started at node time `start` with inventory `x` and
/// signal `iota`, planned to the grid's last point. No trading before `start`.
pub fn static_schedule(
    model: &TransientModel,
    signal: &SignalParams,
    iota: f64,
    x: f64,
    start: f64,
    grid: &[f64],
) -> Result<TradeSchedule> {
    validate_grid(grid)?;
    let from = node_of(grid, start)?;
    let to = grid.len() - 1;
    if from >= to {
        return Err(Error::param("s", format!("start {start} must precede the horizon {}", grid[to])));
    }
    let plan = StaticPlan::new(model, signal.gamma, iota, x, grid[from], grid[to])?;
    let mut rates = vec![0.0; to];
    let mut atoms = Vec::with_capacity(2);
    plan.fill(grid, from, to, &mut rates, &mut atoms);
    TradeSchedule::new(x, grid.to_vec(), atoms, rates)
}
