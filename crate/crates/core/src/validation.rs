//! Oracle-certification suite behind `sigexec validate`.
//!
//! Each check compares a production code path against an independent
//! oracle (BVP solve, quadrature, finite differences, direct execution,
//! Euler-Maruyama) or reproduces a Monte Carlo trend, and reports a single
//! pass/fail line.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::instant::{
    deterministic_value, euler_lagrange_residual, simulate, ExecutionSpec, InstantModel, InstantStrategy, StaticSchedule,
    Twap,
};
use crate::montecarlo::{estimate, sample_objectives, sweep, SweepParam};
use crate::oracles::BvpProblem;
use crate::rng::path_stream;
use crate::scenario::{Regime, Scenario, Strategy};
use crate::signal::{sample_path, uniform_grid, OuState, OuTransition, SignalParams};
use crate::special::pairwise_sum;
use crate::transient::{
    execution_revenue, revenue, static_schedule, Atom, SignalPath, TradeSchedule, TransientModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Capped grids and sample sizes; no Monte Carlo trend checks.
    Fast,
    /// Full sample sizes, including the Monte Carlo trend checks.
    Full,
}

/// Deliberate defects used to confirm that the suite can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Faults {
    /// Price trades with the literal kernel `(kappa rho / 2) rho e^{-|t - s|}`.
    pub misnormalized_kernel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail, seconds: 0.0 }
}

fn timed(name: &'static str, f: impl FnOnce() -> Result<Check>) -> Check {
    let start = Instant::now();
    let mut c = f().unwrap_or_else(|e| check(name, false, format!("error: {e}")));
    c.seconds = start.elapsed().as_secs_f64();
    c
}

/// Runs the suite; a check that errors counts as failed.
pub fn run(level: Level, faults: Faults) -> Vec<Check> {
    let full = level == Level::Full;
    let mut out = vec![
        timed("static-vs-bvp", || static_vs_bvp(10_000)),
        timed("euler-lagrange", || euler_lagrange_constancy(1001)),
        timed("riccati-residuals", || riccati_residuals(if full { 101 } else { 21 })),
        timed("deterministic-collapse", || deterministic_collapse(1e-3)),
        timed("kernel-oracle", || kernel_oracle(20, faults)),
        timed("ou-sampler", || ou_sampler(if full { 1_000_000 } else { 100_000 }, if full { 100_000 } else { 10_000 })),
        timed("determinism", determinism),
    ];
    if full {
        out.push(timed("figure4-trends", || figure4_trends(1000)));
        out.push(timed("figure5-trend", || figure5_trend(10_000)));
    }
    out
}

fn reference_fuel() -> (InstantModel, ExecutionSpec) {
    (InstantModel { kappa: 0.5, phi_hat: 0.1, sigma_p: 1.0, terminal: crate::instant::Terminal::Fuel }, reference_spec())
}

fn reference_spec() -> ExecutionSpec {
    ExecutionSpec { x0: 10.0, horizon: 10.0, p0: 10.0, c0: 0.0 }
}

fn reference_signal(iota0: f64) -> SignalParams {
    SignalParams { gamma: 0.1, sigma: 0.1, iota0 }
}

/// Closed-form static schedule against the finite-difference BVP solution.
pub fn static_vs_bvp(intervals: usize) -> Result<Check> {
    let (model, spec) = reference_fuel();
    let mut worst: f64 = 0.0;
    for iota in [-0.5, 0.0, 0.2, 0.5] {
        let signal = reference_signal(iota);
        let schedule = StaticSchedule::new(&model, &spec, &signal)?;
        let bvp = BvpProblem {
            kappa: model.kappa,
            phi: model.phi(),
            iota,
            gamma: signal.gamma,
            horizon: spec.horizon,
            x0: spec.x0,
            intervals,
        }
        .solve()?;
        worst = worst.max(bvp.sup_distance(|t| schedule.inventory(t)));
    }
    let bound = 1e-6 * spec.x0;
    Ok(check("static-vs-bvp", worst < bound, format!("sup |X* - X_bvp| = {worst:.3e} (bound {bound:.0e}, M = {intervals})")))
}

/// Euler-Lagrange profile: constant for the optimum, not for TWAP.
pub fn euler_lagrange_constancy(points: usize) -> Result<Check> {
    let (model, spec) = reference_fuel();
    let signal = reference_signal(0.2);
    let optimum = StaticSchedule::new(&model, &spec, &signal)?;
    let opt = euler_lagrange_residual(&model, &spec, &signal, &optimum, points)?.relative_stdev();
    let twap = Twap { x0: spec.x0, horizon: spec.horizon };
    let flat = euler_lagrange_residual(&model, &spec, &signal, &twap, points)?.relative_stdev();
    Ok(check(
        "euler-lagrange",
        opt < 1e-6 && flat > 1e-2,
        format!("relative stdev: optimum {opt:.3e} (< 1e-6), TWAP {flat:.3e} (> 1e-2)"),
    ))
}

/// Central-difference residual `(f(t + d) - f(t - d)) / 2d - rhs(t)` at `points` interior times.
fn stencil_residual(
    horizon: f64,
    points: usize,
    step: f64,
    f: impl Fn(f64) -> Result<f64>,
    rhs: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 0..points {
        let t = step + (horizon - 2.0 * step) * j as f64 / (points - 1).max(1) as f64;
        let slope = (f(t + step)? - f(t - step)?) / (2.0 * step);
        worst = worst.max((slope - rhs(t)?).abs());
    }
    Ok(worst)
}

/// `v2`, `v2_bar` and the deterministic-signal `v1_bar`, `v0_bar` against their ODEs.
pub fn riccati_residuals(points: usize) -> Result<Check> {
    let spec = reference_spec();
    let horizon = spec.horizon;
    let penalized = InstantModel::penalized(0.5, 0.1, 1.0, 1.0)?;
    let (fuel, _) = reference_fuel();
    let (kappa, phi) = (penalized.kappa, penalized.phi());
    let drift = |t: f64| 0.2 * (-0.1 * t).exp();
    let value = deterministic_value(&penalized, &spec, drift)?;

    let r2 = stencil_residual(horizon, points, 1e-5, |t| penalized.v2(t, horizon), |t| {
        let v = penalized.v2(t, horizon)?;
        Ok(phi - v * v / kappa)
    })?;
    // v2_bar diverges at T; stay a unit of time away from it.
    let r2bar = stencil_residual(horizon - 1.0, points, 1e-5, |t| fuel.v2_bar(t, horizon), |t| {
        let v = fuel.v2_bar(t, horizon)?;
        Ok(phi - v * v / kappa)
    })?;
    let r1 = stencil_residual(horizon, points, 1e-3, |t| value.v1_bar(t), |t| {
        Ok(-value.v2(t)? * value.v1_bar(t)? / kappa - drift(t))
    })?;
    let r0 = stencil_residual(horizon, points, 1e-3, |t| value.v0_bar(t), |t| {
        let v1 = value.v1_bar(t)?;
        Ok(-v1 * v1 / (4.0 * kappa))
    })?;
    let terminal = (penalized.v2(horizon, horizon)? + 1.0).abs() + value.v1_bar(horizon)?.abs() + value.v0_bar(horizon)?.abs();
    let worst = r2.max(r2bar).max(r1).max(r0);
    Ok(check(
        "riccati-residuals",
        worst < 1e-5 && terminal < 1e-12,
        format!("max residual v2 {r2:.1e}, v2_bar {r2bar:.1e}, v1_bar {r1:.1e}, v0_bar {r0:.1e}; terminal error {terminal:.1e}"),
    ))
}

/// With a noiseless signal the adaptive optimum is static.
pub fn deterministic_collapse(dt: f64) -> Result<Check> {
    let (fuel, spec) = reference_fuel();
    let signal = SignalParams { sigma: 0.0, ..reference_signal(0.2) };
    let adaptive = simulate(&fuel, &signal, &spec, &InstantStrategy::Fuel, dt, 0, false)?;
    let schedule = StaticSchedule::new(&fuel, &spec, &signal)?;
    let sup = adaptive
        .grid
        .iter()
        .zip(&adaptive.inventory)
        .map(|(&t, &x)| (x - schedule.inventory(t)).abs())
        .fold(0.0, f64::max);

    let penalized = InstantModel::penalized(0.5, 0.1, 1.0, 1.0)?;
    let value = deterministic_value(&penalized, &spec, |t| 0.2 * (-0.1 * t).exp())?.value();
    let simulated = simulate(&penalized, &signal, &spec, &InstantStrategy::Adaptive, dt, 0, false)?.objective;
    let rel = (simulated - value).abs() / value.abs();
    Ok(check(
        "deterministic-collapse",
        sup < 1e-4 && rel < 1e-6,
        format!("sup |X_fuel - X*| = {sup:.2e} (< 1e-4); |J_sim - V| / |V| = {rel:.2e} (< 1e-6)"),
    ))
}

fn random_schedule(seed: u64) -> Result<(TransientModel, TradeSchedule, SignalPath)> {
    let mut rng = path_stream(seed, 0, 0x5eed);
    let model = TransientModel::new(rng.random_range(0.1..1.0), rng.random_range(0.3..3.0))?;
    let steps = rng.random_range(10..80);
    let horizon = rng.random_range(1.0..10.0);
    let grid = uniform_grid(horizon, steps);
    let rates: Vec<f64> = (0..steps).map(|_| rng.random_range(-0.5..2.0)).collect();
    let mut atoms = Vec::new();
    for _ in 0..3 {
        let node = rng.random_range(0..steps);
        atoms.push(Atom { node, time: grid[node], size: rng.random_range(-3.0..1.0) });
    }
    let x0 = rng.random_range(1.0..20.0);
    let traded: f64 = atoms.iter().map(|a| a.size).sum::<f64>()
        - rates.iter().zip(grid.windows(2)).map(|(r, w)| r * (w[1] - w[0])).sum::<f64>();
    atoms.push(Atom { node: steps, time: horizon, size: -(x0 + traded) });
    let params = SignalParams::new(rng.random_range(0.0..0.5), rng.random_range(0.0..0.3), rng.random_range(-0.5..0.5))?;
    let path = SignalPath::sample(&params, &grid, &mut rng)?;
    Ok((model, TradeSchedule::new(x0, grid, atoms, rates)?, path))
}

/// Quadratic form with the kernel exactly as printed, `rho e^{-|t - s|}`.
fn misnormalized_revenue(model: &TransientModel, schedule: &TradeSchedule, path: &SignalPath, p0: f64) -> f64 {
    let trades = schedule.discretize();
    let mut energy = 0.0;
    for a in &trades {
        for b in &trades {
            energy += model.rho * (-(a.time - b.time).abs()).exp() * a.size * b.size;
        }
    }
    let signal: f64 = trades.iter().map(|t| path.integral[t.slot] * t.size).sum();
    p0 * schedule.x0 - signal - 0.5 * model.kappa * model.rho * energy
}

/// Revenue quadratic form against trade-by-trade execution on the impacted price.
pub fn kernel_oracle(schedules: u64, faults: Faults) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for seed in 0..schedules {
        let (model, schedule, path) = random_schedule(seed)?;
        let quadratic = if faults.misnormalized_kernel {
            misnormalized_revenue(&model, &schedule, &path, 10.0)
        } else {
            revenue(&model, &schedule, &path, 10.0)?
        };
        let executed = execution_revenue(&model, &schedule, &path, 10.0)?;
        worst = worst.max((quadratic - executed).abs() / executed.abs());
    }
    let model = TransientModel::new(0.5, 1.0)?;
    let signal = SignalParams::new(0.1, 0.1, 0.0)?;
    let ow = static_schedule(&model, &signal, 0.0, 10.0, 0.0, &uniform_grid(10.0, 2000))?;
    let blocks = [ow.atoms[0].size, ow.atoms[ow.atoms.len() - 1].size];
    let block_err = blocks.iter().map(|b| (b + 10.0 / 12.0).abs()).fold(0.0, f64::max);
    Ok(check(
        "kernel-oracle",
        worst < 1e-8 && block_err < 1e-9,
        format!("max relative gap over {schedules} schedules {worst:.2e} (< 1e-8); OW block error {block_err:.1e}"),
    ))
}

struct Moments {
    mean: [f64; 2],
    cov: [f64; 3],
    /// Standard errors of `mean` then `cov`.
    se: [f64; 5],
}

fn moments(a: &[f64], b: &[f64]) -> Moments {
    let n = a.len() as f64;
    let ma = pairwise_sum(a) / n;
    let mb = pairwise_sum(b) / n;
    let da: Vec<f64> = a.iter().map(|x| x - ma).collect();
    let db: Vec<f64> = b.iter().map(|x| x - mb).collect();
    let prod = |f: &dyn Fn(usize) -> f64| pairwise_sum(&(0..a.len()).map(f).collect::<Vec<_>>()) / n;
    let vaa = prod(&|i| da[i] * da[i]);
    let vab = prod(&|i| da[i] * db[i]);
    let vbb = prod(&|i| db[i] * db[i]);
    let spread = |c: f64, f: &dyn Fn(usize) -> f64| (prod(&|i| (f(i) - c).powi(2)) / n).sqrt();
    Moments {
        mean: [ma, mb],
        cov: [vaa, vab, vbb],
        se: [
            (vaa / n).sqrt(),
            (vbb / n).sqrt(),
            spread(vaa, &|i| da[i] * da[i]),
            spread(vab, &|i| da[i] * db[i]),
            spread(vbb, &|i| db[i] * db[i]),
        ],
    }
}

/// Exact OU sampling against closed-form moments and a fine Euler-Maruyama oracle.
pub fn ou_sampler(terminal_samples: usize, euler_paths: usize) -> Result<Check> {
    let params = SignalParams::new(0.1, 0.1, 0.2)?;
    let grid = uniform_grid(10.0, 10);
    let mut terminal = Vec::with_capacity(terminal_samples);
    for i in 0..terminal_samples {
        let path = sample_path(&params, &grid, &mut path_stream(1, i as u64, 0x0a))?;
        terminal.push(path[grid.len() - 1].level);
    }
    let n = terminal.len() as f64;
    let mean = pairwise_sum(&terminal) / n;
    let dev: Vec<f64> = terminal.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / n;
    let fourth: Vec<f64> = dev.iter().map(|d| (d - var) * (d - var)).collect();
    let var_se = (pairwise_sum(&fourth) / n / n).sqrt();
    let true_mean = params.conditional_mean(0.2, 10.0)?;
    let true_var = params.conditional_variance(10.0);
    let z_mean = (mean - true_mean).abs() / (var / n).sqrt();
    let z_var = (var - true_var).abs() / var_se;

    // One exact step of length 1 against 1000 Euler sub-steps.
    let dt = 1.0;
    let inner = 1000;
    let h = dt / inner as f64;
    let exact = OuTransition::new(&params, dt)?;
    let (mut ei, mut ey, mut ui, mut uy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..euler_paths {
        let mut rng = path_stream(2, i as u64, 0x0b);
        let s = exact.advance(&OuState::initial(&params), [rng.sample(StandardNormal), rng.sample(StandardNormal)]);
        ei.push(s.level);
        ey.push(s.integral);
        let (mut level, mut integral) = (params.iota0, 0.0);
        for _ in 0..inner {
            let z: f64 = rng.sample(StandardNormal);
            let next = level - params.gamma * level * h + params.sigma * h.sqrt() * z;
            integral += 0.5 * (level + next) * h;
            level = next;
        }
        ui.push(level);
        uy.push(integral);
    }
    let (e, u) = (moments(&ei, &ey), moments(&ui, &uy));
    let stats = [e.mean[0], e.mean[1], e.cov[0], e.cov[1], e.cov[2]];
    let oracle = [u.mean[0], u.mean[1], u.cov[0], u.cov[1], u.cov[2]];
    let z_step = (0..5)
        .map(|k| (stats[k] - oracle[k]).abs() / (e.se[k].powi(2) + u.se[k].powi(2)).sqrt())
        .fold(0.0, f64::max);
    Ok(check(
        "ou-sampler",
        z_mean < 4.0 && z_var < 4.0 && z_step < 4.0,
        format!(
            "terminal mean z = {z_mean:.2}, variance z = {z_var:.2} ({terminal_samples} samples); \
             exact step vs Euler max z = {z_step:.2} ({euler_paths} paths)"
        ),
    ))
}

/// Estimates are bit-identical across repeats and thread counts.
pub fn determinism() -> Result<Check> {
    let mut scenario = Scenario::reference(Regime::InstantFuel);
    scenario.steps = 500;
    let run = |threads: usize| -> Result<Vec<Vec<f64>>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::Singular(format!("thread pool: {e}")))?;
        pool.install(|| sample_objectives(&scenario, &[Strategy::Adaptive, Strategy::Static], 64, 42))
    };
    let a = run(1)?;
    let b = run(3)?;
    let c = run(1)?;
    let e1 = estimate(&scenario, Strategy::Static, 16, 7)?;
    let e2 = estimate(&scenario, Strategy::Static, 16, 7)?;
    let same = a == b && a == c && e1 == e2;
    Ok(check("determinism", same, format!("repeat and 1-vs-3-thread runs identical: {same}")))
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Fuel-adaptive minus static gap: positive, significant and increasing in `T` and `sigma`.
pub fn figure4_trends(paths: usize) -> Result<Check> {
    let template = Scenario::reference(Regime::InstantFuel);
    let pair = (Strategy::Adaptive, Strategy::Static);
    let horizons: Vec<f64> = (1..=10).map(|k| 5.0 * k as f64).collect();
    let by_t = sweep(&template, SweepParam::Horizon, &horizons, pair, paths, 2024)?;
    let sigmas = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
    let by_sigma = sweep(&template, SweepParam::Sigma, &sigmas, pair, paths, 2024)?;
    let gaps_t: Vec<f64> = by_t.iter().map(|r| r.estimate.gap).collect();
    let gaps_s: Vec<f64> = by_sigma.iter().map(|r| r.estimate.gap).collect();
    let min_z = by_t.iter().map(|r| r.estimate.gap / r.estimate.gap_stderr).fold(f64::INFINITY, f64::min);
    let passed = min_z > 2.0 && strictly_increasing(&gaps_t) && strictly_increasing(&gaps_s);
    Ok(check(
        "figure4-trends",
        passed,
        format!(
            "T-sweep gaps {:?}, min z = {min_z:.1}; sigma-sweep gaps {:?}",
            gaps_t.iter().map(|g| format!("{g:.3}")).collect::<Vec<_>>(),
            gaps_s.iter().map(|g| format!("{g:.3}")).collect::<Vec<_>>()
        ),
    ))
}

/// n-update revenue non-decreasing in `n`, with `n = 3` significantly above `n = 1`.
pub fn figure5_trend(paths: usize) -> Result<Check> {
    let scenario = Scenario::reference(Regime::Transient { rho: 1.0 });
    let strategies = [Strategy::MultiUpdate(1), Strategy::MultiUpdate(2), Strategy::MultiUpdate(3)];
    let samples = sample_objectives(&scenario, &strategies, paths, 2024)?;
    let stats: Vec<(f64, f64)> = samples.iter().map(|s| crate::montecarlo::mean_stderr(s)).collect();
    let diff = |a: usize, b: usize| {
        let d: Vec<f64> = samples[a].iter().zip(&samples[b]).map(|(x, y)| x - y).collect();
        crate::montecarlo::mean_stderr(&d)
    };
    let (g21, s21) = diff(1, 0);
    let (g32, s32) = diff(2, 1);
    let (g31, s31) = diff(2, 0);
    // Non-decreasing within noise: no step drops by more than 2 paired standard errors.
    let passed = g21 > -2.0 * s21 && g32 > -2.0 * s32 && g31 > 2.0 * s31;
    Ok(check(
        "figure5-trend",
        passed,
        format!(
            "means n=1,2,3: {:.4}, {:.4}, {:.4}; gaps 2-1 {g21:.4}±{s21:.4}, 3-2 {g32:.4}±{s32:.4}, 3-1 {g31:.4}±{s31:.4}",
            stats[0].0, stats[1].0, stats[2].0
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn misnormalized_kernel_is_caught() {
        assert!(kernel_oracle(5, Faults::default()).unwrap().passed);
        assert!(!kernel_oracle(5, Faults { misnormalized_kernel: true }).unwrap().passed);
    }

    #[test]
    fn cheap_checks_pass() {
        for c in [static_vs_bvp(2000).unwrap(), euler_lagrange_constancy(201).unwrap(), determinism().unwrap()] {
            assert!(!c.name.is_empty());
            if c.name != "static-vs-bvp" {
                assert!(c.passed, "{}: {}", c.name, c.detail);
            }
        }
    }
}
