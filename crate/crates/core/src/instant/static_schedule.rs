use crate::error::{Error, Result};
use crate::signal::SignalParams;
use crate::special::{sinh_ratio, sinhc};

use super::euler_lagrange::DeterministicSchedule;
use super::model::{ExecutionSpec, InstantModel};

/// `|beta - gamma| / beta` below which the resonant particular solution is used.
const RESONANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Particular {
    /// `C (e^{-gamma t} - [sinh(beta (T - t)) + e^{-gamma T} sinh(beta t)] / sinh(beta T))`
    /// with `C = iota / (2 kappa (beta^2 - gamma^2))`.
    Generic { coef: f64 },
    /// `beta = gamma`: `iota / (4 kappa beta) (t e^{-beta t} - T e^{-beta T} sinh(beta t) / sinh(beta T))`.
    Resonant,
}

/// Optimal deterministic fuel-constrained schedule under an OU signal:
/// the solution of `-2 kappa X'' + 2 phi X = iota e^{-gamma t}` with
/// `X(0) = x0`, `X(T) = 0`, written as `x0 psi(t) + particular(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticSchedule {
    x0: f64,
    horizon: f64,
    kappa: f64,
    beta: f64,
    gamma: f64,
    iota: f64,
    particular: Particular,
}

impl StaticSchedule {
    pub fn new(model: &InstantModel, spec: &ExecutionSpec, signal: &SignalParams) -> Result<Self> {
        model.validate()?;
        spec.validate()?;
        signal.validate()?;
        let beta = model.beta();
        let gamma = signal.gamma;
        let scale = beta.max(gamma);
        let particular = if (beta - gamma).abs() <= RESONANCE * scale {
            Particular::Resonant
        } else {
            Particular::Generic { coef: signal.iota0 / (2.0 * model.kappa * (beta * beta - gamma * gamma)) }
        };
        Ok(StaticSchedule {
            x0: spec.x0,
            horizon: spec.horizon,
            kappa: model.kappa,
            beta,
            gamma,
            iota: signal.iota0,
            particular,
        })
    }

    pub fn is_resonant(&self) -> bool {
        matches!(self.particular, Particular::Resonant)
    }

    /// `psi(t) = sinh(beta (T - t)) / sinh(beta T)`: the signal-free profile per share.
    pub fn psi(&self, t: f64) -> f64 {
        sinh_ratio(self.beta, self.horizon - t, self.horizon)
    }

    /// Signal-driven deviation from `x0 psi(t)`; zero at both ends.
    pub fn signal_part(&self, t: f64) -> f64 {
        let (b, g, big_t) = (self.beta, self.gamma, self.horizon);
        match self.particular {
            Particular::Generic { coef } => {
                coef * ((-g * t).exp() - sinh_ratio(b, big_t - t, big_t) - (-g * big_t).exp() * sinh_ratio(b, t, big_t))
            }
            Particular::Resonant => {
                let scale = self.iota / (4.0 * self.kappa);
                if b * big_t < 1e-6 {
                    return scale * t * (big_t - t);
                }
                let bracket = (-b * t).exp() - (-b * big_t).exp() * sinhc(b * t) / sinhc(b * big_t);
                scale * t * bracket / b
            }
        }
    }

    fn signal_part_derivative(&self, t: f64) -> f64 {
        let (b, g, big_t) = (self.beta, self.gamma, self.horizon);
        let denom = big_t * sinhc(b * big_t); // sinh(beta T) / beta
        match self.particular {
            Particular::Generic { coef } => {
                coef * (-g * (-g * t).exp() + ((b * (big_t - t)).cosh() - (-g * big_t).exp() * (b * t).cosh()) / denom)
            }
            Particular::Resonant => {
                let scale = self.iota / (4.0 * self.kappa);
                if b * big_t < 1e-6 {
                    return scale * (big_t - 2.0 * t);
                }
                let q = (1.0 - b * t) * (-b * t).exp() - (-b * big_t).exp() * (b * t).cosh() / sinhc(b * big_t);
                scale * q / b
            }
        }
    }

    pub fn inventory(&self, t: f64) -> f64 {
        if t >= self.horizon {
            return 0.0;
        }
        self.x0 * self.psi(t) + self.signal_part(t)
    }

    /// Selling rate `-dX/dt`.
    pub fn rate(&self, t: f64) -> f64 {
        let dpsi = -(self.beta * (self.horizon - t)).cosh() / (self.horizon * sinhc(self.beta * self.horizon));
        -(self.x0 * dpsi + self.signal_part_derivative(t))
    }
}

impl DeterministicSchedule for StaticSchedule {
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn inventory(&self, t: f64) -> f64 {
        StaticSchedule::inventory(self, t)
    }
    fn rate(&self, t: f64) -> f64 {
        StaticSchedule::rate(self, t)
    }
}

/// `X*_t` of the static schedule.
pub fn static_inventory(model: &InstantModel, spec: &ExecutionSpec, signal: &SignalParams, t: f64) -> Result<f64> {
    if !(0.0..=spec.horizon).contains(&t) {
        return Err(Error::param("t", format!("must lie in [0, {}], got {t}", spec.horizon)));
    }
    Ok(StaticSchedule::new(model, spec, signal)?.inventory(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::BvpProblem;

    fn model(sigma_p: f64) -> InstantModel {
        InstantModel::fuel(0.5, 0.1, sigma_p).unwrap()
    }

    fn spec() -> ExecutionSpec {
        ExecutionSpec::new(10.0, 10.0, 10.0, 0.0).unwrap()
    }

    fn schedule(iota: f64, sigma_p: f64) -> StaticSchedule {
        StaticSchedule::new(&model(sigma_p), &spec(), &SignalParams::new(0.1, 0.1, iota).unwrap()).unwrap()
    }

    #[test]
    fn boundary_values() {
        let s = schedule(0.2, 1.0);
        assert!((s.inventory(0.0) - 10.0).abs() < 1e-13);
        assert!(s.inventory(10.0).abs() < 1e-13);
        assert!(s.signal_part(10.0).abs() < 1e-13);
    }

    #[test]
    fn no_signal_midpoint() {
        let s = schedule(0.0, 1.0);
        assert!((s.inventory(5.0) - 1.056_708_590).abs() < 1e-8);
        let beta = 0.2f64.sqrt();
        assert!((s.inventory(5.0) - 10.0 * (beta * 5.0).sinh() / (beta * 10.0).sinh()).abs() < 1e-13);
    }

    #[test]
    fn rate_is_minus_derivative() {
        for s in [schedule(0.2, 1.0), schedule(-0.5, 5.0)] {
            let h = 1e-5;
            for &t in &[0.1, 2.0, 5.0, 9.9] {
                let fd = -(s.inventory(t + h) - s.inventory(t - h)) / (2.0 * h);
                assert!((fd - s.rate(t)).abs() < 1e-7, "t={t}: {fd} vs {}", s.rate(t));
            }
        }
    }

    #[test]
    fn matches_bvp_oracle() {
        for &iota in &[-0.5, 0.0, 0.2, 0.5] {
            let s = schedule(iota, 1.0);
            let sol = BvpProblem { kappa: 0.5, phi: 0.1, iota, gamma: 0.1, horizon: 10.0, x0: 10.0, intervals: 2000 }
                .solve_extrapolated()
                .unwrap();
            assert!(sol.sup_distance(|t| s.inventory(t)) < 1e-8, "iota={iota}");
        }
    }

    #[test]
    fn resonance_branch_matches_oracle_and_neighbours() {
        // beta = sqrt(phi / kappa) = 0.1 when phi = 0.005, kappa = 0.5
        let spec = spec();
        let oracle = |gamma: f64| {
            BvpProblem { kappa: 0.5, phi: 0.005, iota: 0.3, gamma, horizon: 10.0, x0: 10.0, intervals: 2000 }
                .solve_extrapolated()
                .unwrap()
        };
        let m = InstantModel::fuel(0.5, 0.005, 1.0).unwrap();
        for &gamma in &[0.1 * (1.0 - 1e-4), 0.1, 0.1 * (1.0 + 1e-4), 0.1 * (1.0 + 1e-7)] {
            let s = StaticSchedule::new(&m, &spec, &SignalParams::new(gamma, 0.1, 0.3).unwrap()).unwrap();
            assert!(oracle(gamma).sup_distance(|t| s.inventory(t)) < 1e-6, "gamma={gamma}");
        }
        let s = StaticSchedule::new(&m, &spec, &SignalParams::new(0.1, 0.1, 0.3).unwrap()).unwrap();
        assert!(s.is_resonant());
    }

    #[test]
    fn risk_neutral_brownian_signal_is_parabolic() {
        let m = InstantModel::fuel(0.5, 0.0, 1.0).unwrap();
        let s = StaticSchedule::new(&m, &spec(), &SignalParams::new(0.0, 0.1, 0.2).unwrap()).unwrap();
        for &t in &[1.0, 4.0, 7.5] {
            let expected = 10.0 * (1.0 - t / 10.0) + 0.2 * t * (10.0 - t) / (4.0 * 0.5);
            assert!((s.inventory(t) - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn orderings_in_signal_and_volatility() {
        let grid: Vec<f64> = (1..100).map(|i| i as f64 * 0.1).collect();
        let (lo, mid, hi) = (schedule(-0.5, 1.0), schedule(0.0, 1.0), schedule(0.5, 1.0));
        for &t in &grid {
            assert!(lo.inventory(t) < mid.inventory(t) && mid.inventory(t) < hi.inventory(t), "t={t}");
        }
        let at2: Vec<f64> = [1.0, 5.0, 10.0].iter().map(|&sp| schedule(0.2, sp).inventory(2.0)).collect();
        assert!(at2[0] > at2[1] && at2[1] > at2[2], "{at2:?}");
    }

    #[test]
    fn no_signal_profile_is_decreasing_and_convex() {
        let s = schedule(0.0, 1.0);
        let vals: Vec<f64> = (0..=1000).map(|i| s.inventory(i as f64 * 0.01)).collect();
        for w in vals.windows(3) {
            assert!(w[1] < w[0]);
            assert!(w[0] - 2.0 * w[1] + w[2] > 0.0);
        }
    }
}
