use crate::error::{Error, Result};

/// Central-difference residual `f'(t_i) - rhs(t_i, f(t_i))` at interior
/// points of a (possibly non-uniform) grid.
pub fn central_residual<R: Fn(f64, f64) -> f64>(grid: &[f64], samples: &[f64], rhs: R) -> Result<Vec<(f64, f64)>> {
    if grid.len() != samples.len() {
        return Err(Error::InvalidGrid(format!(
            "{} grid points but {} samples",
            grid.len(),
            samples.len()
        )));
    }
    if grid.len() < 3 {
        return Err(Error::InvalidGrid("need at least 3 points for central differences".into()));
    }
    Ok((1..grid.len() - 1)
        .map(|i| {
            let slope = (samples[i + 1] - samples[i - 1]) / (grid[i + 1] - grid[i - 1]);
            (grid[i], slope - rhs(grid[i], samples[i]))
        })
        .collect())
}

pub fn max_abs(residual: &[(f64, f64)]) -> f64 {
    residual.iter().map(|&(_, r)| r.abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_satisfies_linear_ode() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 1e-3).collect();
        let f: Vec<f64> = grid.iter().map(|t| (-2.0 * t).exp()).collect();
        let r = central_residual(&grid, &f, |_, y| -2.0 * y).unwrap();
        assert!(max_abs(&r) < 1e-5);
        assert!(central_residual(&grid[..2], &f[..2], |_, y| y).is_err());
    }
}
