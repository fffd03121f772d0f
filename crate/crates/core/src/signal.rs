//! Ornstein-Uhlenbeck signal `dI = -gamma I dt + sigma dW` and its time
//! integral `Y_t = ∫_0^t I_s ds`.
//!
//! Over a step of length `h` the pair `(I_{t+h}, Y_{t+h} - Y_t)` is jointly
//! Gaussian given `I_t`; [`OuTransition`] holds its mean factors and the
//! Cholesky factor of its covariance so paths are sampled exactly, with no
//! time-step bias. With `a = gamma h`:
//!
//! ```text
//! E[I']   = I e^{-a}                 Var[I']  = sigma^2 h (1 - e^{-2a}) / 2a
//! E[dY]   = I h (1 - e^{-a}) / a     Cov      = sigma^2 h^2 ((1 - e^{-a}) / a)^2 / 2
//! Var[dY] = sigma^2 (a - 2(1 - e^{-a}) + (1 - e^{-2a}) / 2) / gamma^3
//! ```
//!
//! All factors are evaluated through series near `a = 0`, so `gamma = 0`
//! (a Brownian signal) is the continuous limit rather than a special case.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_nonneg, Error, Result};
use crate::rng::{path_stream, SIGNAL_SALT};
use crate::special::decay_average;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalParams {
    /// Mean-reversion rate.
    pub gamma: f64,
    /// Signal volatility.
    pub sigma: f64,
    /// Initial signal level `I_0`.
    pub iota0: f64,
}

impl SignalParams {
    pub fn new(gamma: f64, sigma: f64, iota0: f64) -> Result<Self> {
        let params = SignalParams { gamma, sigma, iota0 };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        require_nonneg("gamma", self.gamma)?;
        require_nonneg("sigma", self.sigma)?;
        require_finite("iota0", self.iota0)?;
        Ok(())
    }

    /// `E[I_{t+tau} | I_t = iota] = iota e^{-gamma tau}`.
    pub fn conditional_mean(&self, iota: f64, tau: f64) -> Result<f64> {
        require_finite("iota", iota)?;
        require_nonneg("tau", tau)?;
        Ok(iota * (-self.gamma * tau).exp())
    }

    /// `Var[I_{t+tau} | I_t]`.
    pub fn conditional_variance(&self, tau: f64) -> f64 {
        self.sigma * self.sigma * tau * decay_average(2.0 * self.gamma * tau)
    }

    /// `E[I_{t+tau}^2 | I_t = iota]`.
    pub fn conditional_second_moment(&self, iota: f64, tau: f64) -> f64 {
        let m = iota * (-self.gamma * tau).exp();
        m * m + self.conditional_variance(tau)
    }

    /// `E[Y_{t+tau} - Y_t | I_t = iota]`.
    pub fn conditional_integral_mean(&self, iota: f64, tau: f64) -> f64 {
        iota * crate::special::exp_integral(self.gamma, tau)
    }
}

/// Joint state of the signal and its running integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuState {
    pub t: f64,
    /// Signal level `I_t`.
    pub level: f64,
    /// Integrated signal `Y_t`.
    pub integral: f64,
}

impl OuState {
    pub fn initial(params: &SignalParams) -> Self {
        OuState { t: 0.0, level: params.iota0, integral: 0.0 }
    }
}

/// Gaussian moments of one exact step of length `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMoments {
    /// `e^{-gamma dt}`: multiplies `I_t` in `E[I']`.
    pub level_factor: f64,
    /// Multiplies `I_t` in `E[dY]`.
    pub integral_factor: f64,
    pub var_level: f64,
    pub cov: f64,
    pub var_integral: f64,
}

impl StepMoments {
    pub fn new(params: &SignalParams, dt: f64) -> Self {
        let a = params.gamma * dt;
        let s2 = params.sigma * params.sigma;
        let avg = decay_average(a);
        StepMoments {
            level_factor: (-a).exp(),
            integral_factor: dt * avg,
            var_level: s2 * dt * decay_average(2.0 * a),
            cov: 0.5 * s2 * dt * dt * avg * avg,
            var_integral: s2 * dt * dt * dt * integral_variance_ratio(a),
        }
    }
}

/// `(a - 2(1 - e^{-a}) + (1 - e^{-2a}) / 2) / a^3`, equal to 1/3 at `a = 0`.
fn integral_variance_ratio(a: f64) -> f64 {
    if a < 1.0 {
        // sum_{n>=3} (-1)^{n+1} (2^{n-1} - 2) a^{n-3} / n!
        let mut power = 1.0 / 6.0; // a^{n-3} / n!
        let mut two = 4.0; // 2^{n-1}
        let mut sign = 1.0;
        let mut sum: f64 = 0.0;
        for n in 3..60 {
            let term = sign * (two - 2.0) * power;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            power *= a / (n as f64 + 1.0);
            two *= 2.0;
            sign = -sign;
        }
        sum
    } else {
        let e1 = -(-a).exp_m1();
        let e2 = -(-2.0 * a).exp_m1();
        (a - 2.0 * e1 + 0.5 * e2) / (a * a * a)
    }
}

/// Exact transition over a fixed step; reuse it across a uniform grid.
#[derive(Debug, Clone, Copy)]
pub struct OuTransition {
    dt: f64,
    moments: StepMoments,
    l11: f64,
    l21: f64,
    l22: f64,
}

impl OuTransition {
    pub fn new(params: &SignalParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        let moments = StepMoments::new(params, dt);
        let (l11, l21, l22) = if moments.var_level > 0.0 {
            let l11 = moments.var_level.sqrt();
            let l21 = moments.cov / l11;
            (l11, l21, (moments.var_integral - l21 * l21).max(0.0).sqrt())
        } else {
            (0.0, 0.0, 0.0)
        };
        Ok(OuTransition { dt, moments, l11, l21, l22 })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn moments(&self) -> &StepMoments {
        &self.moments
    }

    /// Advances with a pair of independent standard normals.
    #[inline]
    pub fn advance(&self, state: &OuState, noise: [f64; 2]) -> OuState {
        let m = &self.moments;
        OuState {
            t: state.t + self.dt,
            level: state.level * m.level_factor + self.l11 * noise[0],
            integral: state.integral
                + state.level * m.integral_factor
                + self.l21 * noise[0]
                + self.l22 * noise[1],
        }
    }
}

/// One exact step of length `dt`; `noise = [0, 0]` gives the conditional mean.
pub fn step(params: &SignalParams, state: &OuState, dt: f64, noise: [f64; 2]) -> Result<OuState> {
    Ok(OuTransition::new(params, dt)?.advance(state, noise))
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    match grid.first() {
        None => return Err(Error::InvalidGrid("grid is empty".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::InvalidGrid(format!("grid must start at 0, starts at {t0}")))
        }
        _ => {}
    }
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::InvalidGrid(format!(
                "grid not strictly increasing at index {}: {} -> {}",
                i + 1,
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}

/// Samples the exact path on `grid` using the supplied generator.
pub fn sample_path<R: Rng + ?Sized>(params: &SignalParams, grid: &[f64], rng: &mut R) -> Result<Vec<OuState>> {
    validate_grid(grid)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut state = OuState::initial(params);
    out.push(state);
    let mut transition: Option<OuTransition> = None;
    for w in grid.windows(2) {
        let dt = w[1] - w[0];
        let tr = match transition {
            Some(tr) if tr.dt() == dt => tr,
            _ => {
                let tr = OuTransition::new(params, dt)?;
                transition = Some(tr);
                tr
            }
        };
        let noise = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
        state = tr.advance(&state, noise);
        state.t = w[1];
        out.push(state);
    }
    Ok(out)
}

/// Exact path on `grid`, a deterministic function of `(params, grid, seed)`.
pub fn simulate_path(params: &SignalParams, grid: &[f64], seed: u64) -> Result<Vec<OuState>> {
    params.validate()?;
    let mut rng = path_stream(seed, 0, SIGNAL_SALT);
    sample_path(params, grid, &mut rng)
}

pub fn uniform_grid(horizon: f64, steps: usize) -> Vec<f64> {
    let h = horizon / steps as f64;
    let mut grid: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
    grid[steps] = horizon;
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> SignalParams {
        SignalParams::new(0.1, 0.1, 0.2).unwrap()
    }

    #[test]
    fn conditional_mean_examples() {
        let p = reference();
        assert!((p.conditional_mean(0.2, 5.0).unwrap() - 0.2 * (-0.5f64).exp()).abs() < 1e-15);
        assert!((p.conditional_mean(0.2, 5.0).unwrap() - 0.121_306).abs() < 1e-6);
        let flat = SignalParams::new(0.0, 0.1, 0.2).unwrap();
        assert_eq!(flat.conditional_mean(0.2, 7.0).unwrap(), 0.2);
        assert_eq!(p.conditional_mean(0.0, 3.0).unwrap(), 0.0);
        assert!(p.conditional_mean(f64::NAN, 1.0).is_err());
        assert!(p.conditional_mean(0.1, -1.0).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(SignalParams::new(-0.1, 0.1, 0.0).is_err());
        assert!(SignalParams::new(0.1, -0.1, 0.0).is_err());
        assert!(SignalParams::new(0.1, 0.1, f64::INFINITY).is_err());
    }

    #[test]
    fn zero_noise_step_is_conditional_mean() {
        let p = reference();
        let s = step(&p, &OuState::initial(&p), 5.0, [0.0, 0.0]).unwrap();
        assert!((s.level - 0.121_306).abs() < 1e-6);
        let dy = 0.2 * (1.0 - (-0.5f64).exp()) / 0.1;
        assert!((s.integral - dy).abs() < 1e-14);
        assert!((s.integral - 0.786_939).abs() < 1e-6);
        assert!(step(&p, &OuState::initial(&p), 0.0, [0.0, 0.0]).is_err());
        assert!(step(&p, &OuState::initial(&p), -1.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn deterministic_signal_ignores_noise() {
        let p = SignalParams::new(0.1, 0.0, 0.2).unwrap();
        let a = step(&p, &OuState::initial(&p), 1.0, [1.3, -0.7]).unwrap();
        let b = step(&p, &OuState::initial(&p), 1.0, [0.0, 0.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_path_is_exponential() {
        let p = SignalParams::new(0.1, 0.0, 0.2).unwrap();
        let grid = uniform_grid(10.0, 100);
        let path = simulate_path(&p, &grid, 3).unwrap();
        for s in &path {
            assert!((s.level - 0.2 * (-0.1 * s.t).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn same_seed_same_path() {
        let p = reference();
        let grid = uniform_grid(10.0, 50);
        assert_eq!(simulate_path(&p, &grid, 11).unwrap(), simulate_path(&p, &grid, 11).unwrap());
        assert_ne!(simulate_path(&p, &grid, 11).unwrap(), simulate_path(&p, &grid, 12).unwrap());
    }

    #[test]
    fn bad_grids_rejected() {
        let p = reference();
        assert!(simulate_path(&p, &[], 1).is_err());
        assert!(simulate_path(&p, &[0.5, 1.0], 1).is_err());
        assert!(simulate_path(&p, &[0.0, 1.0, 1.0], 1).is_err());
        assert!(simulate_path(&p, &[0.0, 2.0, 1.0], 1).is_err());
    }

    #[test]
    fn brownian_limit_is_continuous() {
        let dt = 1.0;
        let bm = StepMoments::new(&SignalParams::new(0.0, 0.3, 0.0).unwrap(), dt);
        let near = StepMoments::new(&SignalParams::new(1e-12, 0.3, 0.0).unwrap(), dt);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(near.var_level, bm.var_level) < 1e-6);
        assert!(rel(near.cov, bm.cov) < 1e-6);
        assert!(rel(near.var_integral, bm.var_integral) < 1e-6);
        assert!(rel(near.integral_factor, bm.integral_factor) < 1e-6);
        // Brownian formulas: sigma^2 h, sigma^2 h^2 / 2, sigma^2 h^3 / 3
        assert!(rel(bm.var_level, 0.09) < 1e-15);
        assert!(rel(bm.cov, 0.045) < 1e-15);
        assert!(rel(bm.var_integral, 0.03) < 1e-15);
    }

    #[test]
    fn variance_ratio_branches_agree() {
        for &a in &[0.9, 0.99, 1.0, 1.01, 1.2] {
            let e1 = -(-a as f64).exp_m1();
            let e2 = -(-2.0 * a as f64).exp_m1();
            let direct = (a - 2.0 * e1 + 0.5 * e2) / (a * a * a);
            assert!((integral_variance_ratio(a) - direct).abs() < 1e-13, "a={a}");
        }
    }

    #[test]
    fn trapezoid_integral_consistency() {
        let p = reference();
        let grid = uniform_grid(1.0, 10_000);
        let path = simulate_path(&p, &grid, 5).unwrap();
        let trap: f64 = path.windows(2).map(|w| 0.5 * (w[0].level + w[1].level) * (w[1].t - w[0].t)).sum();
        let exact = path.last().unwrap().integral;
        // Per-step discrepancy is the Brownian bridge area, O(sigma dt^{3/2}).
        assert!((trap - exact).abs() < 1e-4, "trap {trap} exact {exact}");
    }

    proptest! {
        #[test]
        fn noiseless_composition_matches_single_step(
            gamma in 0.0f64..2.0, iota in -1.0f64..1.0, t in 0.01f64..20.0, k in 1usize..40
        ) {
            let p = SignalParams::new(gamma, 0.4, iota).unwrap();
            let one = step(&p, &OuState::initial(&p), t, [0.0, 0.0]).unwrap();
            let tr = OuTransition::new(&p, t / k as f64).unwrap();
            let mut s = OuState::initial(&p);
            for _ in 0..k {
                s = tr.advance(&s, [0.0, 0.0]);
            }
            prop_assert!((s.level - one.level).abs() < 1e-12);
            prop_assert!((s.integral - one.integral).abs() < 1e-11 * (1.0 + one.integral.abs()));
        }

        #[test]
        fn covariance_is_positive_semidefinite(gamma in 0.0f64..5.0, dt in 1e-6f64..50.0) {
            let m = StepMoments::new(&SignalParams::new(gamma, 1.0, 0.0).unwrap(), dt);
            prop_assert!(m.var_level > 0.0 && m.var_integral > 0.0);
            prop_assert!(m.var_level * m.var_integral - m.cov * m.cov >= -1e-12 * m.var_level * m.var_integral);
        }
    }
}
