//! Pathwise simulation of the instantaneous-impact objective.
//!
//! A [`MarketPath`] (signal, integrated signal, unaffected price) is drawn
//! once and any number of strategies can be run against it, which is how
//! Monte Carlo comparisons share random numbers.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{path_stream, INSTANT_SALT};
use crate::signal::{uniform_grid, OuTransition, SignalParams};

use super::coefficients::FeedbackTable;
use super::model::{ExecutionSpec, InstantModel, Terminal};
use super::static_schedule::StaticSchedule;

/// Deterministic selling rate as a function of time.
pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum InstantStrategy {
    /// Signal-adaptive optimum of the penalized regime.
    Adaptive,
    /// Signal-adaptive optimum of the fuel-constrained regime.
    Fuel,
    /// Closed-form static fuel-constrained schedule.
    Static,
    /// Any deterministic rate, integrated with the trapezoidal rule.
    Custom(RateFn),
}

impl fmt::Debug for InstantStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstantStrategy::Adaptive => f.write_str("Adaptive"),
            InstantStrategy::Fuel => f.write_str("Fuel"),
            InstantStrategy::Static => f.write_str("Static"),
            InstantStrategy::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Exogenous randomness of one path on the simulator grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketPath {
    pub signal: Vec<f64>,
    pub integral: Vec<f64>,
    /// `P0 + Y_t + sigma_P W_t`.
    pub price: Vec<f64>,
}

/// One realised trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPath {
    pub grid: Vec<f64>,
    pub signal: Vec<f64>,
    pub price: Vec<f64>,
    pub inventory: Vec<f64>,
    pub cash: Vec<f64>,
    pub rate: Vec<f64>,
    pub objective: f64,
    /// Inventory liquidated in a block at the horizon (fuel regime only).
    pub terminal_block: f64,
}

/// Precomputed tables for repeated simulation on a uniform grid.
pub struct InstantSimulator {
    model: InstantModel,
    signal: SignalParams,
    spec: ExecutionSpec,
    grid: Vec<f64>,
    transition: OuTransition,
    table: FeedbackTable,
    schedule: StaticSchedule,
    static_inventory: Vec<f64>,
    static_rate: Vec<f64>,
    price_noise: bool,
}

impl InstantSimulator {
    pub fn new(model: &InstantModel, signal: &SignalParams, spec: &ExecutionSpec, steps: usize) -> Result<Self> {
        model.validate()?;
        signal.validate()?;
        spec.validate()?;
        if steps == 0 {
            return Err(Error::param("steps", "need at least one time step"));
        }
        let grid = uniform_grid(spec.horizon, steps);
        let transition = OuTransition::new(signal, spec.horizon / steps as f64)?;
        let table = FeedbackTable::new(model, signal, &grid)?;
        let schedule = StaticSchedule::new(model, spec, signal)?;
        let static_inventory = grid.iter().map(|&t| schedule.inventory(t)).collect();
        let static_rate = grid.iter().map(|&t| schedule.rate(t)).collect();
        Ok(InstantSimulator {
            model: *model,
            signal: *signal,
            spec: *spec,
            grid,
            transition,
            table,
            schedule,
            static_inventory,
            static_rate,
            price_noise: true,
        })
    }

    /// Switches the Brownian component of the unaffected price on or off.
    /// Random draws are consumed either way, so paths stay aligned.
    pub fn with_price_noise(mut self, on: bool) -> Self {
        self.price_noise = on;
        self
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn model(&self) -> &InstantModel {
        &self.model
    }

    pub fn spec(&self) -> &ExecutionSpec {
        &self.spec
    }

    pub fn static_schedule(&self) -> &StaticSchedule {
        &self.schedule
    }

    /// Draws three standard normals per step: two for the signal pair, one
    /// for the price.
    pub fn sample_market<R: Rng + ?Sized>(&self, rng: &mut R) -> MarketPath {
        let n = self.grid.len();
        let mut signal = Vec::with_capacity(n);
        let mut integral = Vec::with_capacity(n);
        let mut price = Vec::with_capacity(n);
        let mut state = crate::signal::OuState::initial(&self.signal);
        let sd = if self.price_noise { self.model.sigma_p * self.transition.dt().sqrt() } else { 0.0 };
        let mut noise = 0.0;
        signal.push(state.level);
        integral.push(0.0);
        price.push(self.spec.p0);
        for _ in 1..n {
            let z: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            state = self.transition.advance(&state, [z[0], z[1]]);
            noise += sd * z[2];
            signal.push(state.level);
            integral.push(state.integral);
            price.push(self.spec.p0 + state.integral + noise);
        }
        MarketPath { signal, integral, price }
    }

    /// Market path `index` of the stream keyed by `seed`.
    pub fn market(&self, seed: u64, index: u64) -> MarketPath {
        self.sample_market(&mut path_stream(seed, index, INSTANT_SALT))
    }

    /// Realised objective only, without recording the trajectory.
    pub fn objective(&self, market: &MarketPath, strategy: &InstantStrategy) -> Result<f64> {
        self.execute(market, strategy, None)
    }

    pub fn run(&self, market: &MarketPath, strategy: &InstantStrategy) -> Result<SimPath> {
        let n = self.grid.len();
        let mut rec = Record { inventory: vec![0.0; n], cash: vec![0.0; n], rate: vec![0.0; n], terminal_block: 0.0 };
        let objective = self.execute(market, strategy, Some(&mut rec))?;
        Ok(SimPath {
            grid: self.grid.clone(),
            signal: market.signal.clone(),
            price: market.price.clone(),
            inventory: rec.inventory,
            cash: rec.cash,
            rate: rec.rate,
            objective,
            terminal_block: rec.terminal_block,
        })
    }

    fn check_strategy(&self, strategy: &InstantStrategy) -> Result<()> {
        match (strategy, self.model.is_fuel()) {
            (InstantStrategy::Adaptive, true) => {
                Err(Error::RegimeMismatch("adaptive strategy needs a terminal penalty; use the fuel strategy".into()))
            }
            (InstantStrategy::Fuel, false) => {
                Err(Error::RegimeMismatch("fuel strategy needs the fuel-constrained model".into()))
            }
            _ => Ok(()),
        }
    }

    fn execute(&self, market: &MarketPath, strategy: &InstantStrategy, mut rec: Option<&mut Record>) -> Result<f64> {
        self.check_strategy(strategy)?;
        let n = self.grid.len();
        if market.price.len() != n || market.signal.len() != n {
            return Err(Error::InvalidGrid(format!(
                "market path has {} points, simulator grid has {n}",
                market.price.len()
            )));
        }
        let kappa = self.model.kappa;
        let h = self.transition.dt();
        let (gx, gi) = (&self.table.inventory_gain, &self.table.signal_gain);
        let p = &market.price;
        let iv = &market.signal;

        let mut x = self.spec.x0;
        let mut r = match strategy {
            InstantStrategy::Adaptive | InstantStrategy::Fuel => gx[0] * x + gi[0] * iv[0],
            InstantStrategy::Static => self.static_rate[0],
            InstantStrategy::Custom(f) => f(0.0),
        };
        let mut cash = self.spec.c0;
        let mut flow = (p[0] - kappa * r) * r;
        let mut held = 0.0; // ∫ X^2 dt
        let mut block = 0.0;
        if let Some(rec) = rec.as_deref_mut() {
            rec.inventory[0] = x;
            rec.cash[0] = cash;
            rec.rate[0] = r;
        }
        for k in 1..n {
            let last = k + 1 == n;
            let (x_next, r_next) = match strategy {
                InstantStrategy::Fuel if last => {
                    // The feedback gain diverges at T: sell the remainder at a constant rate.
                    let rate = x / h;
                    (0.0, rate)
                }
                InstantStrategy::Adaptive | InstantStrategy::Fuel => {
                    let x_next = (x - 0.5 * h * (r + gi[k] * iv[k])) / (1.0 + 0.5 * h * gx[k]);
                    (x_next, gx[k] * x_next + gi[k] * iv[k])
                }
                InstantStrategy::Static => (self.static_inventory[k], self.static_rate[k]),
                InstantStrategy::Custom(f) => {
                    let rate = f(self.grid[k]);
                    (x - 0.5 * h * (r + rate), rate)
                }
            };
            let flow_next = (p[k] - kappa * r_next) * r_next;
            if matches!(strategy, InstantStrategy::Fuel) && last {
                // Constant rate over the interval: cash = r h (P_{k-1} + P_k) / 2 - kappa r^2 h.
                cash += r_next * h * 0.5 * (p[k - 1] + p[k]) - kappa * r_next * r_next * h;
            } else {
                cash += 0.5 * h * (flow + flow_next);
            }
            held += 0.5 * h * (x * x + x_next * x_next);
            x = x_next;
            r = r_next;
            flow = flow_next;
            if let Some(rec) = rec.as_deref_mut() {
                rec.inventory[k] = x;
                rec.cash[k] = cash;
                rec.rate[k] = r;
            }
        }

        let p_end = p[n - 1];
        let phi = self.model.phi();
        match self.model.terminal {
            Terminal::Penalized { varrho } => Ok(cash - phi * held + x * (p_end - varrho * x)),
            Terminal::Fuel => {
                if x != 0.0 {
                    let tolerance = h * self.spec.x0;
                    if x.abs() > tolerance {
                        return Err(Error::FuelConstraint { residual: x.abs(), tolerance });
                    }
                    block = x;
                    cash += x * (p_end - kappa * x / h);
                    if let Some(rec) = rec.as_deref_mut() {
                        rec.inventory[n - 1] = 0.0;
                        rec.cash[n - 1] = cash;
                    }
                }
                if let Some(rec) = rec {
                    rec.terminal_block = block;
                }
                Ok(cash - phi * held)
            }
        }
    }
}

struct Record {
    inventory: Vec<f64>,
    cash: Vec<f64>,
    rate: Vec<f64>,
    terminal_block: f64,
}

/// Simulates one path with step `dt` (rounded so that it divides `T`).
pub fn simulate(
    model: &InstantModel,
    signal: &SignalParams,
    spec: &ExecutionSpec,
    strategy: &InstantStrategy,
    dt: f64,
    seed: u64,
    noise_on: bool,
) -> Result<SimPath> {
    let steps = steps_for(spec.horizon, dt)?;
    let sim = InstantSimulator::new(model, signal, spec, steps)?.with_price_noise(noise_on);
    sim.run(&sim.market(seed, 0), strategy)
}

/// Number of uniform steps whose length is closest to `dt`.
pub(crate) fn steps_for(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    let steps = (horizon / dt).round().max(1.0);
    if steps > 1e9 {
        return Err(Error::param("dt", format!("too small for horizon {horizon}")));
    }
    Ok(steps as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instant::deterministic_value;

    fn reference_signal(sigma: f64) -> SignalParams {
        SignalParams::new(0.1, sigma, 0.2).unwrap()
    }

    fn spec() -> ExecutionSpec {
        ExecutionSpec::new(10.0, 10.0, 10.0, 0.0).unwrap()
    }

    #[test]
    fn path_starts_at_initial_conditions() {
        let m = InstantModel::fuel(0.5, 0.1, 1.0).unwrap();
        let path = simulate(&m, &reference_signal(0.1), &spec(), &InstantStrategy::Fuel, 0.01, 3, true).unwrap();
        assert_eq!(path.inventory[0], 10.0);
        assert_eq!(path.cash[0], 0.0);
        assert_eq!(path.price[0], 10.0);
        assert_eq!(*path.inventory.last().unwrap(), 0.0);
        assert_eq!(*path.grid.last().unwrap(), 10.0);
    }

    #[test]
    fn static_objective_is_deterministic_without_noise() {
        let m = InstantModel::fuel(0.5, 0.1, 1.0).unwrap();
        let a = simulate(&m, &reference_signal(0.0), &spec(), &InstantStrategy::Static, 0.01, 1, false).unwrap();
        let b = simulate(&m, &reference_signal(0.0), &spec(), &InstantStrategy::Static, 0.01, 2, false).unwrap();
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn fuel_collapses_to_static_without_signal_noise() {
        let m = InstantModel::fuel(0.5, 0.1, 1.0).unwrap();
        let signal = reference_signal(0.0);
        let fuel = simulate(&m, &signal, &spec(), &InstantStrategy::Fuel, 1e-3, 5, false).unwrap();
        let stat = simulate(&m, &signal, &spec(), &InstantStrategy::Static, 1e-3, 5, false).unwrap();
        let sup = fuel.inventory.iter().zip(&stat.inventory).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-4, "sup = {sup}");
        assert!((fuel.objective - stat.objective).abs() < 1e-4);
    }

    #[test]
    fn penalized_value_matches_simulated_objective() {
        let m = InstantModel::penalized(0.5, 0.1, 1.0, 1.0).unwrap();
        let signal = reference_signal(0.0);
        let v = deterministic_value(&m, &spec(), |t| 0.2 * (-0.1 * t).exp()).unwrap();
        let path = simulate(&m, &signal, &spec(), &InstantStrategy::Adaptive, 1e-3, 0, false).unwrap();
        let rel = (path.objective - v.value()).abs() / v.value().abs();
        assert!(rel < 1e-6, "rel = {rel}");
    }

    #[test]
    fn static_mean_objective_is_unbiased_without_risk() {
        // Cash is linear in the price path for a fixed schedule, so the mean
        // over noisy paths must match the run on the mean path.
        let m = InstantModel::fuel(0.5, 0.0, 1.0).unwrap();
        let noisy = InstantSimulator::new(&m, &reference_signal(0.1), &spec(), 1000).unwrap();
        let exact = InstantSimulator::new(&m, &reference_signal(0.0), &spec(), 1000).unwrap().with_price_noise(false);
        let target = exact.objective(&exact.market(0, 0), &InstantStrategy::Static).unwrap();
        let samples: Vec<f64> =
            (0..100_000).map(|i| noisy.objective(&noisy.market(9, i), &InstantStrategy::Static).unwrap()).collect();
        let (mean, se) = crate::montecarlo::mean_stderr(&samples);
        assert!((mean - target).abs() < 3.0 * se, "mean {mean} target {target} se {se}");
    }

    #[test]
    fn custom_rate_matches_static_on_the_same_path() {
        let m = InstantModel::fuel(0.5, 0.1, 1.0).unwrap();
        let signal = reference_signal(0.1);
        let sim = InstantSimulator::new(&m, &signal, &spec(), 10_000).unwrap();
        let schedule = *sim.static_schedule();
        let custom = InstantStrategy::Custom(Arc::new(move |t| schedule.rate(t)));
        let market = sim.market(11, 0);
        let a = sim.run(&market, &custom).unwrap();
        let b = sim.run(&market, &InstantStrategy::Static).unwrap();
        assert!(a.terminal_block.abs() < 1e-6);
        assert!((a.objective - b.objective).abs() < 1e-5);
    }

    #[test]
    fn unfinished_custom_schedule_is_reported() {
        let m = InstantModel::fuel(0.5, 0.1, 1.0).unwrap();
        let half = InstantStrategy::Custom(Arc::new(|_| 0.5));
        let err = simulate(&m, &reference_signal(0.1), &spec(), &half, 0.01, 0, true).unwrap_err();
        assert!(matches!(err, Error::FuelConstraint { .. }));
    }

    #[test]
    fn regime_mismatch_rejected() {
        let fuel = InstantModel::fuel(0.5, 0.1, 1.0).unwrap();
        let pen = InstantModel::penalized(0.5, 0.1, 1.0, 1.0).unwrap();
        let s = reference_signal(0.1);
        assert!(simulate(&fuel, &s, &spec(), &InstantStrategy::Adaptive, 0.1, 0, true).is_err());
        assert!(simulate(&pen, &s, &spec(), &InstantStrategy::Fuel, 0.1, 0, true).is_err());
    }

    #[test]
    fn objective_matches_recorded_run() {
        let m = InstantModel::penalized(0.5, 0.1, 1.0, 1.0).unwrap();
        let sim = InstantSimulator::new(&m, &reference_signal(0.1), &spec(), 1000).unwrap();
        let market = sim.market(4, 2);
        let o = sim.objective(&market, &InstantStrategy::Adaptive).unwrap();
        assert_eq!(o, sim.run(&market, &InstantStrategy::Adaptive).unwrap().objective);
    }
}
