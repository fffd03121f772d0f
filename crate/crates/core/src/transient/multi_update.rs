use crate::error::{Error, Result};
use crate::signal::SignalParams;

use super::model::TransientModel;
use super::path::SignalPath;
use super::plan::{node_of, StaticPlan};
use super::schedule::TradeSchedule;

/// Grid nodes of the update times `k T / n`, `k = 0..n`.
pub fn restart_nodes(grid: &[f64], n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::param("n", "need at least one update"));
    }
    let horizon = *grid.last().ok_or_else(|| Error::InvalidGrid("grid is empty".into()))?;
    (0..=n)
        .map(|k| {
            node_of(grid, horizon * k as f64 / n as f64).map_err(|_| {
                Error::InvalidGrid(format!("update time {k}T/{n} is not a grid node; use a step count divisible by {n}"))
            })
        })
        .collect()
}

/// The n-update strategy: at each `t_k = k T / n` re-plan the static
/// schedule to `T` from the observed signal and current inventory, and
/// follow it until the next update. Impact left over from earlier trades is
/// ignored when re-planning. `n = 1` is the static schedule.
pub fn multi_update_schedule(
    model: &TransientModel,
    signal: &SignalParams,
    n: usize,
    x0: f64,
    path: &SignalPath,
) -> Result<TradeSchedule> {
    let grid = &path.grid;
    let nodes = restart_nodes(grid, n)?;
    let last = grid.len() - 1;
    let mut rates = vec![0.0; last];
    let mut atoms = Vec::with_capacity(n + 1);
    let mut x = x0;
    for w in nodes.windows(2) {
        let (from, to) = (w[0], w[1]);
        let plan = StaticPlan::new(model, signal.gamma, path.node_level(from), x, grid[from], grid[last])?;
        x = plan.fill(grid, from, to, &mut rates, &mut atoms);
    }
    TradeSchedule::new(x0, grid.clone(), atoms, rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_stream;
    use crate::signal::uniform_grid;
    use crate::transient::static_schedule;

    fn ow() -> TransientModel {
        TransientModel::new(0.5, 1.0).unwrap()
    }

    #[test]
    fn one_update_is_the_static_schedule() {
        let params = SignalParams::new(0.1, 0.1, 0.2).unwrap();
        let grid = uniform_grid(10.0, 300);
        let path = SignalPath::sample(&params, &grid, &mut path_stream(3, 0, 0)).unwrap();
        let a = multi_update_schedule(&ow(), &params, 1, 10.0, &path).unwrap();
        let b = static_schedule(&ow(), &params, 0.2, 10.0, 0.0, &grid).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn restart_adds_a_block_at_the_update() {
        let params = SignalParams::new(0.1, 0.0, 0.2).unwrap();
        let grid = uniform_grid(10.0, 300);
        let path = SignalPath::expected(&params, &grid).unwrap();
        let s = multi_update_schedule(&ow(), &params, 2, 10.0, &path).unwrap();
        assert_eq!(s.atoms.len(), 3);
        let mid = s.atoms[1];
        assert_eq!(mid.node, 150);
        assert!(mid.size.abs() > 1e-3, "restart block {}", mid.size);
        // Inventory is continuous into the update; only the block moves it.
        let before = s.inventory_at(5.0);
        let left = s.inventory_at(5.0 - 1e-9);
        assert!((before - left).abs() < 1e-8);
        assert!((s.node_inventory()[150] - (before + mid.size)).abs() < 1e-12);
        assert!(s.terminal_inventory().abs() < 1e-10);
    }

    #[test]
    fn update_times_must_be_nodes() {
        let params = SignalParams::new(0.1, 0.1, 0.2).unwrap();
        let grid = uniform_grid(10.0, 100);
        let path = SignalPath::expected(&params, &grid).unwrap();
        assert!(multi_update_schedule(&ow(), &params, 3, 10.0, &path).is_err());
        assert!(multi_update_schedule(&ow(), &params, 0, 10.0, &path).is_err());
    }
}
