use crate::error::{Error, Result};
use crate::oracles::{integrate, QuadTolerance};
use crate::signal::SignalParams;
use crate::special::exp_integral;

use super::model::{ExecutionSpec, InstantModel};

/// A deterministic instantaneous-impact schedule given by its inventory and
/// selling rate as functions of time.
pub trait DeterministicSchedule {
    fn horizon(&self) -> f64;
    fn inventory(&self, t: f64) -> f64;
    /// Selling rate `-dX/dt`.
    fn rate(&self, t: f64) -> f64;
}

/// Constant-rate liquidation `r = x0 / T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twap {
    pub x0: f64,
    pub horizon: f64,
}

impl DeterministicSchedule for Twap {
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn inventory(&self, t: f64) -> f64 {
        self.x0 * (1.0 - t / self.horizon)
    }
    fn rate(&self, _t: f64) -> f64 {
        self.x0 / self.horizon
    }
}

/// `lambda(t) = 2 kappa r_t + 2 phi ∫_0^t X_s ds - ∫_0^t E[I_s] ds` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualProfile {
    pub grid: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl ResidualProfile {
    pub fn mean(&self) -> f64 {
        self.lambda.iter().sum::<f64>() / self.lambda.len() as f64
    }

    pub fn stdev(&self) -> f64 {
        let m = self.mean();
        let n = self.lambda.len() as f64;
        (self.lambda.iter().map(|l| (l - m) * (l - m)).sum::<f64>() / n).sqrt()
    }

    /// `stdev / |mean|`; zero for a constant profile.
    pub fn relative_stdev(&self) -> f64 {
        self.stdev() / self.mean().abs()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.lambda.windows(2).all(|w| w[1] > w[0])
    }
}

/// Euler-Lagrange profile of a fuel-constrained deterministic schedule.
///
/// A schedule is optimal in the static class exactly when this profile is
/// constant. `points` is the number of grid points on `[0, T]`.
pub fn euler_lagrange_residual(
    model: &InstantModel,
    spec: &ExecutionSpec,
    signal: &SignalParams,
    schedule: &dyn DeterministicSchedule,
    points: usize,
) -> Result<ResidualProfile> {
    if points < 2 {
        return Err(Error::param("points", "need at least 2 grid points"));
    }
    let horizon = spec.horizon;
    if (schedule.horizon() - horizon).abs() > 1e-12 * horizon {
        return Err(Error::param("T", "schedule horizon differs from the execution horizon"));
    }
    let tol = 1e-9 * spec.x0.max(1.0);
    let start_gap = (schedule.inventory(0.0) - spec.x0).abs();
    let end_residual = schedule.inventory(horizon).abs();
    if start_gap > tol || end_residual > tol {
        return Err(Error::FuelConstraint { residual: start_gap.max(end_residual), tolerance: tol });
    }

    let phi = model.phi();
    let grid: Vec<f64> = (0..points)
        .map(|i| if i + 1 == points { horizon } else { horizon * i as f64 / (points - 1) as f64 })
        .collect();
    let mut lambda = Vec::with_capacity(points);
    let mut held = 0.0; // ∫_0^t X_s ds
    for (i, &t) in grid.iter().enumerate() {
        if i > 0 {
            held += integrate(|s| schedule.inventory(s), grid[i - 1], t, QuadTolerance { abs: 1e-14, rel: 1e-13 })?;
        }
        let drift = signal.iota0 * exp_integral(signal.gamma, t);
        lambda.push(2.0 * model.kappa * schedule.rate(t) + 2.0 * phi * held - drift);
    }
    Ok(ResidualProfile { grid, lambda })
}
