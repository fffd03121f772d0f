use crate::error::{Error, Result};

use super::model::TransientModel;
use super::path::SignalPath;
use super::schedule::{Trade, TradeSchedule};

/// `sum_i sum_j e^{-rho |t_i - t_j|} dx_i dx_j` for time-ordered trades, in
/// O(n) via the decayed running sum `D_{i+1} = e^{-rho (t_{i+1} - t_i)} (D_i + dx_i)`.
pub fn kernel_energy(rho: f64, trades: &[Trade]) -> f64 {
    let mut energy = 0.0;
    let mut decayed = 0.0;
    let mut prev = trades.first().map_or(0.0, |t| t.time);
    for t in trades {
        decayed *= (-rho * (t.time - prev)).exp();
        prev = t.time;
        energy += t.size * (t.size + 2.0 * decayed);
        decayed += t.size;
    }
    energy
}

fn signal_term(path: &SignalPath, trades: &[Trade]) -> f64 {
    trades.iter().map(|t| path.integral[t.slot] * t.size).sum()
}

/// Realised revenue `P0 x0 - sum Y(t_i) dx_i - (kappa rho / 2) sum_ij e^{-rho |t_i - t_j|} dx_i dx_j`.
pub fn revenue(model: &TransientModel, schedule: &TradeSchedule, path: &SignalPath, p0: f64) -> Result<f64> {
    path.check_grid(&schedule.grid)?;
    let trades = schedule.discretize();
    Ok(p0 * schedule.x0 - signal_term(path, &trades) - 0.5 * model.kappa * model.rho * kernel_energy(model.rho, &trades))
}

/// [`revenue`] with the kernel summed directly, O(n^2).
pub fn revenue_dense(model: &TransientModel, schedule: &TradeSchedule, path: &SignalPath, p0: f64) -> Result<f64> {
    path.check_grid(&schedule.grid)?;
    let trades = schedule.discretize();
    let mut energy = 0.0;
    for a in &trades {
        for b in &trades {
            energy += (-model.rho * (a.time - b.time).abs()).exp() * a.size * b.size;
        }
    }
    Ok(p0 * schedule.x0 - signal_term(path, &trades) - 0.5 * model.kappa * model.rho * energy)
}

/// Impacted price `S_t = P0 + Y_t + kappa rho sum_{s < t} e^{-rho (t - s)} dX_s`
/// at a node or midpoint `t` of the schedule's grid.
pub fn impacted_price(
    model: &TransientModel,
    schedule: &TradeSchedule,
    path: &SignalPath,
    p0: f64,
    t: f64,
) -> Result<f64> {
    path.check_grid(&schedule.grid)?;
    let slot = path.slot_of(t)?;
    let t = path.slot_time(slot);
    let displacement: f64 = schedule
        .discretize()
        .iter()
        .filter(|tr| tr.time < t)
        .map(|tr| (-model.rho * (t - tr.time)).exp() * tr.size)
        .sum();
    Ok(p0 + path.integral[slot] + model.kappa * model.rho * displacement)
}

/// Cash from executing the discretised schedule trade by trade against the
/// impacted price, each trade filling at the average of its pre- and
/// post-trade price. Independent of the quadratic form in [`revenue`].
pub fn execution_revenue(model: &TransientModel, schedule: &TradeSchedule, path: &SignalPath, p0: f64) -> Result<f64> {
    path.check_grid(&schedule.grid)?;
    let trades = schedule.discretize();
    let depth = model.kappa * model.rho;
    let mut cash = 0.0;
    for (j, tr) in trades.iter().enumerate() {
        let displacement: f64 =
            trades[..j].iter().map(|e| (-model.rho * (tr.time - e.time)).exp() * e.size).sum();
        let before = p0 + path.integral[tr.slot] + depth * displacement;
        let after = before + depth * tr.size;
        cash -= tr.size * 0.5 * (before + after);
    }
    if schedule.terminal_inventory().abs() > 1e-9 * schedule.x0.abs().max(1.0) {
        return Err(Error::FuelConstraint { residual: schedule.terminal_inventory().abs(), tolerance: 1e-9 });
    }
    Ok(cash)
}

/// Cumulative cash after each node's trades (midpoint volume of interval
/// `i` is credited at node `i + 1`), executing at the mid-impact price.
pub fn cash_on_grid(model: &TransientModel, schedule: &TradeSchedule, path: &SignalPath, p0: f64) -> Result<Vec<f64>> {
    path.check_grid(&schedule.grid)?;
    let depth = model.kappa * model.rho;
    let mut out = vec![0.0; schedule.grid.len()];
    let (mut cash, mut decayed, mut prev) = (0.0, 0.0, 0.0);
    let mut node = 0;
    for tr in schedule.discretize() {
        let at = (tr.slot + 1) / 2;
        while node < at {
            out[node] = cash;
            node += 1;
        }
        decayed *= (-model.rho * (tr.time - prev)).exp();
        prev = tr.time;
        let before = p0 + path.integral[tr.slot] + depth * decayed;
        cash -= tr.size * (before + 0.5 * depth * tr.size);
        decayed += tr.size;
    }
    for v in &mut out[node..] {
        *v = cash;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_stream;
    use crate::signal::{uniform_grid, SignalParams};
    use crate::transient::schedule::Atom;
    use proptest::prelude::*;
    use rand::Rng;

    fn ow() -> TransientModel {
        TransientModel::new(0.5, 1.0).unwrap()
    }

    fn quiet(grid: &[f64]) -> SignalPath {
        SignalPath::expected(&SignalParams::new(0.1, 0.0, 0.0).unwrap(), grid).unwrap()
    }

    #[test]
    fn single_block() {
        let grid = uniform_grid(10.0, 10);
        let s = TradeSchedule::new(10.0, grid.clone(), vec![Atom { node: 0, time: 0.0, size: -10.0 }], vec![0.0; 10])
            .unwrap();
        let path = quiet(&grid);
        assert!((revenue(&ow(), &s, &path, 10.0).unwrap() - 75.0).abs() < 1e-12);
        assert!((execution_revenue(&ow(), &s, &path, 10.0).unwrap() - 75.0).abs() < 1e-12);
        let cash = cash_on_grid(&ow(), &s, &path, 10.0).unwrap();
        assert!(cash.iter().all(|c| (c - 75.0).abs() < 1e-12));
        let s1 = impacted_price(&ow(), &s, &path, 10.0, 1.0).unwrap();
        assert!((s1 - (10.0 - 1.839_397)).abs() < 1e-6);
        assert_eq!(impacted_price(&ow(), &s, &path, 10.0, 0.0).unwrap(), 10.0);
    }

    #[test]
    fn empty_schedule_has_no_revenue() {
        let grid = uniform_grid(1.0, 4);
        let s = TradeSchedule::new(0.0, grid.clone(), vec![], vec![0.0; 4]).unwrap();
        assert_eq!(revenue(&ow(), &s, &quiet(&grid), 10.0).unwrap(), 0.0);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let s = TradeSchedule::new(0.0, uniform_grid(1.0, 4), vec![], vec![0.0; 4]).unwrap();
        assert!(revenue(&ow(), &s, &quiet(&uniform_grid(1.0, 5)), 10.0).is_err());
    }

    fn random_schedule(seed: u64) -> (TradeSchedule, SignalPath) {
        let mut rng = path_stream(seed, 0, 99);
        let grid = uniform_grid(5.0, 50);
        let mut rates: Vec<f64> = (0..50).map(|_| rng.random_range(-0.5..1.5)).collect();
        rates[rng.random_range(0..50)] = 0.0;
        let mut atoms = vec![Atom { node: 0, time: 0.0, size: rng.random_range(-3.0..0.0) }];
        let mid = rng.random_range(1..50);
        atoms.push(Atom { node: mid, time: grid[mid], size: rng.random_range(-2.0..1.0) });
        let x0 = 8.0;
        let traded: f64 = atoms.iter().map(|a| a.size).sum::<f64>() - rates.iter().map(|r| r * 0.1).sum::<f64>();
        atoms.push(Atom { node: 50, time: 5.0, size: -(x0 + traded) });
        let params = SignalParams::new(0.2, 0.2, 0.3).unwrap();
        let path = SignalPath::sample(&params, &grid, &mut rng).unwrap();
        (TradeSchedule::new(x0, grid, atoms, rates).unwrap(), path)
    }

    #[test]
    fn quadratic_form_matches_execution() {
        for seed in 0..20 {
            let (s, path) = random_schedule(seed);
            let q = revenue(&ow(), &s, &path, 10.0).unwrap();
            let d = revenue_dense(&ow(), &s, &path, 10.0).unwrap();
            let e = execution_revenue(&ow(), &s, &path, 10.0).unwrap();
            assert!((q - e).abs() <= 1e-8 * e.abs(), "seed {seed}: {q} vs {e}");
            assert!((q - d).abs() <= 1e-10 * d.abs());
            let cash = cash_on_grid(&ow(), &s, &path, 10.0).unwrap();
            assert!((cash.last().unwrap() - e).abs() <= 1e-9 * e.abs());
        }
    }

    proptest! {
        #[test]
        fn kernel_is_positive_definite(sizes in prop::collection::vec(-5.0f64..5.0, 1..40), gap in 0.01f64..2.0) {
            prop_assume!(sizes.iter().any(|s| s.abs() > 1e-6));
            let trades: Vec<Trade> = sizes.iter().enumerate()
                .map(|(i, &size)| Trade { time: gap * i as f64, size, slot: 0 })
                .collect();
            prop_assert!(kernel_energy(1.0, &trades) > 0.0);
        }
    }
}
