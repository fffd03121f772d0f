use crate::error::{Error, Result};
use crate::signal::validate_grid;

/// Block trade at grid node `node`; `size` is the inventory change (negative when selling).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub node: usize,
    pub time: f64,
    pub size: f64,
}

/// One discretised trade. `slot` indexes the node-and-midpoint grid
/// (`2 i` for node `i`, `2 i + 1` for the midpoint of interval `i`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trade {
    pub time: f64,
    pub size: f64,
    pub slot: usize,
}

/// Block trades plus a piecewise-constant selling rate on a grid.
///
/// `rates[i]` is the selling speed `-dX/dt` on `(t_i, t_{i+1}]`. Inventory
/// is left-continuous: a block at `t` is reflected from `t+` on.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeSchedule {
    pub x0: f64,
    pub grid: Vec<f64>,
    pub atoms: Vec<Atom>,
    pub rates: Vec<f64>,
}

impl TradeSchedule {
    pub fn new(x0: f64, grid: Vec<f64>, atoms: Vec<Atom>, rates: Vec<f64>) -> Result<Self> {
        validate_grid(&grid)?;
        if grid.len() < 2 {
            return Err(Error::InvalidGrid("need at least one interval".into()));
        }
        if rates.len() + 1 != grid.len() {
            return Err(Error::InvalidGrid(format!("{} rates for {} intervals", rates.len(), grid.len() - 1)));
        }
        for a in &atoms {
            if a.node >= grid.len() || grid[a.node] != a.time {
                return Err(Error::InvalidGrid(format!("atom at t = {} is not on grid node {}", a.time, a.node)));
            }
            if !a.size.is_finite() {
                return Err(Error::param("atoms", "block sizes must be finite"));
            }
        }
        if rates.iter().any(|r| !r.is_finite()) {
            return Err(Error::param("rates", "rates must be finite"));
        }
        let mut atoms = atoms;
        atoms.sort_by_key(|a| a.node);
        Ok(TradeSchedule { x0, grid, atoms, rates })
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().expect("validated grid")
    }

    /// Trades in time order: atoms at their nodes, each interval's volume at its midpoint.
    pub fn discretize(&self) -> Vec<Trade> {
        let mut out = Vec::with_capacity(self.rates.len() + self.atoms.len());
        let mut atoms = self.atoms.iter().peekable();
        for i in 0..self.grid.len() {
            while let Some(a) = atoms.next_if(|a| a.node == i) {
                out.push(Trade { time: a.time, size: a.size, slot: 2 * i });
            }
            if let Some(&r) = self.rates.get(i) {
                let h = self.grid[i + 1] - self.grid[i];
                if r != 0.0 {
                    out.push(Trade { time: 0.5 * (self.grid[i] + self.grid[i + 1]), size: -r * h, slot: 2 * i + 1 });
                }
            }
        }
        out
    }

    /// Net inventory change over the whole schedule.
    pub fn total_traded(&self) -> f64 {
        self.discretize().iter().map(|t| t.size).sum()
    }

    /// `sum |blocks| + ∫ |rate| dt`.
    pub fn total_variation(&self) -> f64 {
        self.discretize().iter().map(|t| t.size.abs()).sum()
    }

    /// Inventory terminal value `X_{T+}`.
    pub fn terminal_inventory(&self) -> f64 {
        self.x0 + self.total_traded()
    }

    /// Left-continuous inventory `X_t`; beyond the horizon this is `X_{T+}`.
    pub fn inventory_at(&self, t: f64) -> f64 {
        let mut x = self.x0;
        for a in &self.atoms {
            if a.time < t {
                x += a.size;
            }
        }
        for (i, &r) in self.rates.iter().enumerate() {
            let (a, b) = (self.grid[i], self.grid[i + 1]);
            if t <= a {
                break;
            }
            x -= r * (t.min(b) - a);
        }
        if t > self.horizon() {
            x = self.terminal_inventory();
        }
        x
    }

    /// Inventory just after each node's blocks, `X_{t_i+}`.
    pub fn node_inventory(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.grid.len());
        let mut atoms = self.atoms.iter().peekable();
        let mut x = self.x0;
        for i in 0..self.grid.len() {
            while let Some(a) = atoms.next_if(|a| a.node == i) {
                x += a.size;
            }
            out.push(x);
            if let Some(&r) = self.rates.get(i) {
                x -= r * (self.grid[i + 1] - self.grid[i]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::uniform_grid;

    fn example() -> TradeSchedule {
        let grid = uniform_grid(4.0, 4);
        let atoms = vec![Atom { node: 4, time: 4.0, size: -1.0 }, Atom { node: 0, time: 0.0, size: -2.0 }];
        TradeSchedule::new(5.0, grid, atoms, vec![0.5; 4]).unwrap()
    }

    #[test]
    fn inventory_is_left_continuous() {
        let s = example();
        assert_eq!(s.inventory_at(0.0), 5.0);
        assert_eq!(s.inventory_at(1.0), 2.5);
        assert_eq!(s.inventory_at(4.0), 1.0);
        assert_eq!(s.inventory_at(4.5), 0.0);
        assert_eq!(s.node_inventory(), vec![3.0, 2.5, 2.0, 1.5, 0.0]);
    }

    #[test]
    fn discretization_orders_trades() {
        let s = example();
        let trades = s.discretize();
        assert_eq!(trades.len(), 6);
        assert!(trades.windows(2).all(|w| w[0].time <= w[1].time));
        assert_eq!(trades[1].slot, 1);
        assert_eq!(trades[5].slot, 8);
        assert_eq!(s.total_traded(), -5.0);
        assert_eq!(s.total_variation(), 5.0);
    }

    #[test]
    fn malformed_schedules_rejected() {
        let grid = uniform_grid(1.0, 2);
        assert!(TradeSchedule::new(1.0, grid.clone(), vec![], vec![1.0]).is_err());
        let off = Atom { node: 1, time: 0.3, size: -1.0 };
        assert!(TradeSchedule::new(1.0, grid, vec![off], vec![0.0; 2]).is_err());
    }
}
