use crate::error::{Error, Result};
use crate::oracles::{integrate, QuadTolerance};

use super::model::{ExecutionSpec, InstantModel};

/// Value function and optimal speed when the price drift `I(t)` is a known
/// deterministic function.
///
/// `V(0, p, x) = p x + v0(0) + x v1(0) + x^2 v2(0)` with
/// `v1(t) = ∫_t^T decay(t, u) I(u) du` and `v0(t) = (1/4 kappa) ∫_t^T v1(s)^2 ds`.
/// The optimal speed `-(v1(t) + 2 X_t v2(t)) / 2 kappa` is itself
/// deterministic.
pub struct DeterministicValue<F> {
    model: InstantModel,
    spec: ExecutionSpec,
    drift: F,
    value: f64,
}

pub fn deterministic_value<F: Fn(f64) -> f64>(
    model: &InstantModel,
    spec: &ExecutionSpec,
    drift: F,
) -> Result<DeterministicValue<F>> {
    if model.is_fuel() {
        return Err(Error::RegimeMismatch("deterministic value function needs a terminal penalty".into()));
    }
    spec.validate()?;
    let mut out = DeterministicValue { model: *model, spec: *spec, drift, value: 0.0 };
    let x = spec.x0;
    out.value = spec.p0 * x + out.v0_bar(0.0)? + x * out.v1_bar(0.0)? + x * x * model.v2(0.0, spec.horizon)?;
    Ok(out)
}

impl<F: Fn(f64) -> f64> DeterministicValue<F> {
    /// `V(0, P0, x0)`.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn v1_bar(&self, t: f64) -> Result<f64> {
        let horizon = self.spec.horizon;
        let w0 = self.model.potential(horizon - t);
        let integral = integrate(
            |u| self.model.potential(horizon - u) * (self.drift)(u),
            t,
            horizon,
            QuadTolerance { abs: 1e-13 * w0, rel: 1e-12 },
        )?;
        Ok(integral / w0)
    }

    pub fn v0_bar(&self, t: f64) -> Result<f64> {
        let mut failure = None;
        let integral = integrate(
            |s| match self.v1_bar(s) {
                Ok(v) => v * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            t,
            self.spec.horizon,
            QuadTolerance { abs: 1e-12, rel: 1e-11 },
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(integral / (4.0 * self.model.kappa)),
        }
    }

    pub fn v2(&self, t: f64) -> Result<f64> {
        self.model.v2(t, self.spec.horizon)
    }

    /// Optimal selling rate at inventory `x`.
    pub fn rate(&self, t: f64, x: f64) -> Result<f64> {
        Ok(-(self.v1_bar(t)? + 2.0 * x * self.v2(t)?) / (2.0 * self.model.kappa))
    }

    /// Optimal inventory and rate on `grid`, integrating the linear feedback
    /// ODE with the implicit trapezoidal rule.
    pub fn trajectory(&self, grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        crate::signal::validate_grid(grid)?;
        let horizon = self.spec.horizon;
        let mut offset = Vec::with_capacity(grid.len());
        let mut gain = Vec::with_capacity(grid.len());
        for &t in grid {
            offset.push(-self.v1_bar(t)? / (2.0 * self.model.kappa));
            gain.push(-self.model.v2(t.min(horizon), horizon)? / self.model.kappa);
        }
        let mut x = vec![self.spec.x0; grid.len()];
        let mut r = vec![offset[0] + gain[0] * self.spec.x0; grid.len()];
        for k in 1..grid.len() {
            let h = grid[k] - grid[k - 1];
            x[k] = (x[k - 1] - 0.5 * h * (r[k - 1] + offset[k])) / (1.0 + 0.5 * h * gain[k]);
            r[k] = offset[k] + gain[k] * x[k];
        }
        Ok((x, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{central_residual, max_abs};

    fn model() -> InstantModel {
        InstantModel::penalized(0.5, 0.1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_drift_zero_inventory_has_zero_value() {
        let spec = ExecutionSpec::new(0.0, 10.0, 10.0, 0.0).unwrap();
        let v = deterministic_value(&model(), &spec, |_| 0.0).unwrap();
        assert_eq!(v.value(), 0.0);
        assert_eq!(v.v1_bar(3.0).unwrap(), 0.0);
    }

    #[test]
    fn fuel_model_rejected() {
        let spec = ExecutionSpec::new(1.0, 10.0, 10.0, 0.0).unwrap();
        let m = InstantModel::fuel(0.5, 0.1, 1.0).unwrap();
        assert!(deterministic_value(&m, &spec, |_| 0.0).is_err());
    }

    #[test]
    fn coefficients_solve_the_ode_system() {
        let spec = ExecutionSpec::new(10.0, 10.0, 10.0, 0.0).unwrap();
        let drift = |t: f64| 0.2 * (-0.1 * t).exp();
        let m = model();
        let v = deterministic_value(&m, &spec, drift).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
        let v1: Vec<f64> = grid.iter().map(|&t| v.v1_bar(t).unwrap()).collect();
        let v0: Vec<f64> = grid.iter().map(|&t| v.v0_bar(t).unwrap()).collect();
        // Terminal values
        assert!(v1[40].abs() < 1e-15 && v0[40].abs() < 1e-15);
        // Coarse grid: only a smoke check; the tight residual check lives in the acceptance suite.
        let r1 = central_residual(&grid, &v1, |t, y| -m.v2(t, 10.0).unwrap() * y / m.kappa - drift(t)).unwrap();
        let r0 = central_residual(&grid, &v0, |t, _| {
            let a = v.v1_bar(t).unwrap();
            -a * a / (4.0 * m.kappa)
        })
        .unwrap();
        assert!(max_abs(&r1) < 1e-2 && max_abs(&r0) < 1e-2);
    }
}
