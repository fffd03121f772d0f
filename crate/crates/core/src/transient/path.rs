use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::signal::{validate_grid, OuState, OuTransition, SignalParams};

/// Signal sampled exactly at the grid nodes and interval midpoints, where
/// discretised schedules place their trades.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalPath {
    pub grid: Vec<f64>,
    /// `I` at slot `j`: node `j / 2` for even `j`, a midpoint for odd `j`.
    pub level: Vec<f64>,
    /// `Y` on the same slots.
    pub integral: Vec<f64>,
}

impl SignalPath {
    pub fn sample<R: Rng + ?Sized>(params: &SignalParams, grid: &[f64], rng: &mut R) -> Result<Self> {
        Self::build(params, grid, |_| [rng.sample(StandardNormal), rng.sample(StandardNormal)])
    }

    /// The path with all noise switched off, i.e. `E[I]` and `E[Y]`.
    pub fn expected(params: &SignalParams, grid: &[f64]) -> Result<Self> {
        Self::build(params, grid, |_| [0.0, 0.0])
    }

    fn build<F: FnMut(usize) -> [f64; 2]>(params: &SignalParams, grid: &[f64], mut noise: F) -> Result<Self> {
        params.validate()?;
        validate_grid(grid)?;
        let slots = 2 * grid.len() - 1;
        let mut level = Vec::with_capacity(slots);
        let mut integral = Vec::with_capacity(slots);
        let mut state = OuState::initial(params);
        level.push(state.level);
        integral.push(state.integral);
        let mut cached: Option<OuTransition> = None;
        for (i, w) in grid.windows(2).enumerate() {
            let half = 0.5 * (w[1] - w[0]);
            // Uniform grids differ from step to step only by rounding; reuse the transition.
            let tr = match cached {
                Some(tr) if (tr.dt() - half).abs() <= 1e-12 * half => tr,
                _ => {
                    let tr = OuTransition::new(params, half)?;
                    cached = Some(tr);
                    tr
                }
            };
            for j in 0..2 {
                state = tr.advance(&state, noise(2 * i + j));
                level.push(state.level);
                integral.push(state.integral);
            }
        }
        Ok(SignalPath { grid: grid.to_vec(), level, integral })
    }

    pub fn node_level(&self, node: usize) -> f64 {
        self.level[2 * node]
    }

    pub fn node_integral(&self, node: usize) -> f64 {
        self.integral[2 * node]
    }

    /// Time of slot `j`.
    pub fn slot_time(&self, slot: usize) -> f64 {
        if slot % 2 == 0 {
            self.grid[slot / 2]
        } else {
            0.5 * (self.grid[slot / 2] + self.grid[slot / 2 + 1])
        }
    }

    /// Slot of time `t`, if `t` is a node or a midpoint.
    pub fn slot_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * self.grid.last().copied().unwrap_or(1.0).max(1.0);
        let i = self.grid.partition_point(|&g| g < t - tol);
        if i < self.grid.len() && (self.grid[i] - t).abs() <= tol {
            return Ok(2 * i);
        }
        if i > 0 && i < self.grid.len() && (0.5 * (self.grid[i - 1] + self.grid[i]) - t).abs() <= tol {
            return Ok(2 * i - 1);
        }
        Err(Error::InvalidGrid(format!("t = {t} is neither a grid node nor a midpoint")))
    }

    pub(crate) fn check_grid(&self, grid: &[f64]) -> Result<()> {
        if self.grid.as_slice() != grid {
            return Err(Error::InvalidGrid("schedule and signal path use different grids".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_stream;
    use crate::signal::uniform_grid;

    #[test]
    fn expected_path_matches_closed_form() {
        let p = SignalParams::new(0.1, 0.3, 0.2).unwrap();
        let grid = uniform_grid(10.0, 20);
        let path = SignalPath::expected(&p, &grid).unwrap();
        for (j, (&i, &y)) in path.level.iter().zip(&path.integral).enumerate() {
            let t = path.slot_time(j);
            assert!((i - 0.2 * (-0.1 * t).exp()).abs() < 1e-14);
            assert!((y - p.conditional_integral_mean(0.2, t)).abs() < 1e-13);
        }
    }

    #[test]
    fn slots_round_trip() {
        let p = SignalParams::new(0.1, 0.1, 0.2).unwrap();
        let grid = uniform_grid(3.0, 6);
        let path = SignalPath::sample(&p, &grid, &mut path_stream(1, 0, 0)).unwrap();
        assert_eq!(path.level.len(), 13);
        for j in 0..13 {
            assert_eq!(path.slot_of(path.slot_time(j)).unwrap(), j);
        }
        assert!(path.slot_of(0.1).is_err());
    }
}
