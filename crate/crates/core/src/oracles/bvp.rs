use crate::error::{require_finite, require_nonneg, require_positive, Error, Result};

/// Two-point problem `-2 kappa X'' + 2 phi X - iota e^{-gamma t} = 0` on
/// `[0, T]` with `X(0) = x0`, `X(T) = 0`: the first-order condition of the
/// static fuel-constrained schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpProblem {
    pub kappa: f64,
    pub phi: f64,
    pub iota: f64,
    pub gamma: f64,
    pub horizon: f64,
    pub x0: f64,
    /// Number of grid intervals `M`.
    pub intervals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvpSolution {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl BvpSolution {
    pub fn sup_distance<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.grid.iter().zip(&self.values).map(|(&t, &v)| (v - f(t)).abs()).fold(0.0, f64::max)
    }
}

impl BvpProblem {
    fn validate(&self) -> Result<()> {
        require_positive("kappa", self.kappa)?;
        require_nonneg("phi", self.phi)?;
        require_nonneg("gamma", self.gamma)?;
        require_finite("iota", self.iota)?;
        require_finite("x0", self.x0)?;
        require_positive("T", self.horizon)?;
        if self.intervals < 2 {
            return Err(Error::param("intervals", "need at least 2 intervals (3 grid points)"));
        }
        Ok(())
    }

    /// Second-order central differences, one tridiagonal solve.
    pub fn solve(&self) -> Result<BvpSolution> {
        self.validate()?;
        let m = self.intervals;
        let h = self.horizon / m as f64;
        let grid: Vec<f64> = (0..=m).map(|i| if i == m { self.horizon } else { i as f64 * h }).collect();

        let n = m - 1;
        let off = -2.0 * self.kappa / (h * h);
        let diag = vec![4.0 * self.kappa / (h * h) + 2.0 * self.phi; n];
        let lower = vec![off; n.saturating_sub(1)];
        let upper = lower.clone();
        let mut rhs: Vec<f64> = (1..m).map(|i| self.iota * (-self.gamma * grid[i]).exp()).collect();
        rhs[0] -= off * self.x0;
        // X(T) = 0 contributes nothing to the last row.

        let interior = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        let mut values = Vec::with_capacity(m + 1);
        values.push(self.x0);
        values.extend(interior);
        values.push(0.0);
        Ok(BvpSolution { grid, values })
    }

    /// Richardson extrapolation of the `M` and `2M` solutions, reported on the `M` grid.
    pub fn solve_extrapolated(&self) -> Result<BvpSolution> {
        let coarse = self.solve()?;
        let fine = BvpProblem { intervals: 2 * self.intervals, ..*self }.solve()?;
        let values = coarse
            .values
            .iter()
            .enumerate()
            .map(|(i, &c)| (4.0 * fine.values[2 * i] - c) / 3.0)
            .collect();
        Ok(BvpSolution { grid: coarse.grid, values })
    }
}

/// Thomas algorithm for a tridiagonal system; `lower[i]` couples rows `i+1`
/// and `i`, `upper[i]` couples rows `i` and `i+1`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || rhs.len() != n || lower.len() + 1 != n || upper.len() + 1 != n {
        return Err(Error::Singular(format!(
            "inconsistent tridiagonal sizes: diag {n}, lower {}, upper {}, rhs {}",
            lower.len(),
            upper.len(),
            rhs.len()
        )));
    }
    let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs())).max(f64::MIN_POSITIVE);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() <= 1e-14 * scale {
        return Err(Error::Singular("zero pivot in row 0".into()));
    }
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot.abs() <= 1e-14 * scale {
            return Err(Error::Singular(format!("zero pivot in row {i}")));
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}
