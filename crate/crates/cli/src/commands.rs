use std::path::{Path, PathBuf};

use sigexec_core::instant::{InstantSimulator, StaticSchedule};
use sigexec_core::montecarlo::{mean_stderr, sample_objectives, sweep, transient_schedule, PairedEstimate, SweepParam};
use sigexec_core::rng::{path_stream, TRANSIENT_SALT};
use sigexec_core::signal::uniform_grid;
use sigexec_core::transient::{cash_on_grid, revenue, SignalPath};
use sigexec_core::validation::{self, Faults, Level};
use sigexec_core::{Error, Regime, Scenario, Strategy};

use crate::config::{Config, ConfigError};
use crate::output::{quantile, render, write, Fingerprint};

/// Failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError { code: EXIT_CONFIG, message: e.to_string() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_invalid_input() { EXIT_CONFIG } else { EXIT_NUMERIC };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: EXIT_NUMERIC, message: format!("i/o: {e}") }
    }
}

pub type CliResult = Result<(), CliError>;

fn parse_strategy(name: &str) -> Result<Strategy, CliError> {
    name.parse().map_err(|e: Error| CliError { code: EXIT_CONFIG, message: e.to_string() })
}

pub struct Common<'a> {
    pub config: &'a Config,
    pub seed: u64,
    pub dt: Option<f64>,
    pub paths: Option<usize>,
}

impl Common<'_> {
    fn fingerprint(&self, command: &str) -> Fingerprint {
        let command = format!("{command} dt={:?} paths={:?}", self.dt, self.paths);
        Fingerprint::new(&self.config.canonical(), self.seed, &command)
    }

    fn paths(&self, default: usize) -> Result<usize, CliError> {
        let n = self.paths.or(self.config.simulation.paths).unwrap_or(default);
        if n < 2 {
            return Err(CliError { code: EXIT_CONFIG, message: format!("invalid parameter `paths`: need at least 2, got {n}") });
        }
        Ok(n)
    }
}

pub fn simulate(common: &Common, strategy: Option<&str>, out: Option<&Path>) -> CliResult {
    let scenario = common.config.scenario(common.dt)?;
    let strategy = match strategy {
        Some(s) => parse_strategy(s)?,
        None if scenario.regime.is_transient() => Strategy::Static,
        None => Strategy::Adaptive,
    };
    scenario.check_strategy(strategy)?;
    let columns: Vec<String> = ["t", "I", "P", "X", "C", "rate"].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    let objective;
    if let Regime::Transient { .. } = scenario.regime {
        let model = scenario.transient_model()?;
        let grid = uniform_grid(scenario.spec.horizon, scenario.steps);
        let path = SignalPath::sample(&scenario.signal, &grid, &mut path_stream(common.seed, 0, TRANSIENT_SALT))?;
        let schedule = transient_schedule(&model, &scenario, strategy, &path)?;
        let inventory = schedule.node_inventory();
        let cash = cash_on_grid(&model, &schedule, &path, scenario.spec.p0)?;
        for (i, &t) in grid.iter().enumerate() {
            let rate = schedule.rates.get(i).copied().unwrap_or(0.0);
            let price = scenario.spec.p0 + path.node_integral(i);
            rows.push(vec![t, path.node_level(i), price, inventory[i], scenario.spec.c0 + cash[i], rate]);
        }
        objective = revenue(&model, &schedule, &path, scenario.spec.p0)?;
    } else {
        let sim = InstantSimulator::new(&scenario.instant_model()?, &scenario.signal, &scenario.spec, scenario.steps)?
            .with_price_noise(scenario.price_noise);
        let path = sim.run(&sim.market(common.seed, 0), &scenario.instant_strategy(strategy)?)?;
        for i in 0..path.grid.len() {
            rows.push(vec![path.grid[i], path.signal[i], path.price[i], path.inventory[i], path.cash[i], path.rate[i]]);
        }
        objective = path.objective;
    }
    let fp = common.fingerprint(&format!("simulate {strategy} steps={}", scenario.steps));
    write(out, &render(&fp, &columns, &rows))?;
    eprintln!("{} {strategy}: objective = {objective:.10}", scenario.regime.tag());
    Ok(())
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn fuel_scenario(common: &Common) -> Result<Scenario, CliError> {
    Ok(common.config.scenario_for(Regime::InstantFuel, common.dt)?)
}

/// Every `stride`-th index of `0..len`, always including the last.
fn thinned(len: usize, target: usize) -> Vec<usize> {
    let stride = (len / target.max(1)).max(1);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if *idx.last().unwrap() != len - 1 {
        idx.push(len - 1);
    }
    idx
}

/// Rows `t, q05, q50, q95` over `paths[k][i]` at the selected indices.
fn envelope(grid: &[f64], idx: &[usize], paths: &[Vec<f64>]) -> Vec<[f64; 4]> {
    idx.iter()
        .map(|&i| {
            let mut col: Vec<f64> = paths.iter().map(|p| p[i]).collect();
            col.sort_by(f64::total_cmp);
            [grid[i], quantile(&col, 0.05), quantile(&col, 0.5), quantile(&col, 0.95)]
        })
        .collect()
}

const FAN_POINTS: usize = 1000;
const RAW_PATH_CAP: usize = 100;
const ENVELOPE_PATH_CAP: usize = 1000;

pub fn figure(common: &Common, n: u8, dir: &Path) -> CliResult {
    let fp = common.fingerprint(&format!("figure {n}"));
    let emit = |name: &str, columns: Vec<String>, rows: Vec<Vec<f64>>| -> CliResult {
        let path: PathBuf = dir.join(name);
        write(Some(&path), &render(&fp, &columns, &rows))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    };
    match n {
        1 | 2 => {
            let base = fuel_scenario(common)?;
            let grid = uniform_grid(base.spec.horizon, FAN_POINTS);
            let variants: Vec<(String, Scenario)> = if n == 1 {
                [0.5, 0.0, -0.5]
                    .iter()
                    .map(|&iota| {
                        let mut s = base;
                        s.signal.iota0 = iota;
                        (format!("X_iota_{iota}"), s)
                    })
                    .collect()
            } else {
                [1.0, 5.0, 10.0]
                    .iter()
                    .map(|&sp| {
                        let mut s = base;
                        s.sigma_p = sp;
                        (format!("X_sigmaP_{sp}"), s)
                    })
                    .collect()
            };
            let mut schedules = Vec::new();
            for (_, s) in &variants {
                schedules.push(StaticSchedule::new(&s.instant_model()?, &s.spec, &s.signal)?);
            }
            let mut columns = vec!["t".to_string()];
            columns.extend(variants.iter().map(|(name, _)| name.clone()));
            let rows = grid
                .iter()
                .map(|&t| std::iter::once(t).chain(schedules.iter().map(|s| s.inventory(t))).collect())
                .collect();
            emit(&format!("fig{n}_static_inventory.csv"), columns, rows)
        }
        3 => {
            let scenario = fuel_scenario(common)?;
            let paths = common.paths(1000)?;
            let sim = InstantSimulator::new(&scenario.instant_model()?, &scenario.signal, &scenario.spec, scenario.steps)?
                .with_price_noise(scenario.price_noise);
            let strategy = scenario.instant_strategy(Strategy::Adaptive)?;
            let idx = thinned(sim.grid().len(), FAN_POINTS);
            let inventories: Vec<Vec<f64>> = {
                use rayon::prelude::*;
                (0..paths)
                    .into_par_iter()
                    .map(|i| {
                        let run = sim.run(&sim.market(common.seed, i as u64), &strategy)?;
                        Ok(idx.iter().map(|&k| run.inventory[k]).collect())
                    })
                    .collect::<Result<_, Error>>()?
            };
            let grid: Vec<f64> = idx.iter().map(|&k| sim.grid()[k]).collect();
            let all: Vec<usize> = (0..grid.len()).collect();
            let schedule = sim.static_schedule();
            let rows = envelope(&grid, &all, &inventories)
                .into_iter()
                .map(|[t, a, b, c]| vec![t, a, b, c, schedule.inventory(t)])
                .collect();
            emit("fig3_envelope.csv", names(&["t", "q05", "q50", "q95", "static"]), rows)?;
            let raw = paths.min(RAW_PATH_CAP);
            let mut columns = vec!["t".to_string()];
            columns.extend((0..raw).map(|i| format!("path_{i}")));
            let rows = (0..grid.len())
                .map(|k| std::iter::once(grid[k]).chain(inventories[..raw].iter().map(|p| p[k])).collect())
                .collect();
            emit("fig3_paths.csv", columns, rows)
        }
        4 => {
            let template = fuel_scenario(common)?;
            let paths = common.paths(1000)?;
            let pair = (Strategy::Adaptive, Strategy::Static);
            let horizons: Vec<f64> = (1..=10).map(|k| 5.0 * k as f64).collect();
            let sigmas = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
            let row = |v: f64, e: &PairedEstimate| vec![v, e.b.mean, e.b.stderr, e.a.mean, e.a.stderr, e.gap, e.gap_stderr];
            let tail = ["static_mean", "static_stderr", "adaptive_mean", "adaptive_stderr", "gap", "gap_stderr"];
            for (param, values, name, label) in [
                (SweepParam::Horizon, &horizons[..], "fig4_horizon.csv", "T"),
                (SweepParam::Sigma, &sigmas[..], "fig4_sigma.csv", "sigma"),
            ] {
                let table = sweep(&template, param, values, pair, paths, common.seed)?;
                let mut columns = vec![label.to_string()];
                columns.extend(names(&tail));
                emit(name, columns, table.iter().map(|r| row(r.value, &r.estimate)).collect())?;
            }
            Ok(())
        }
        5 => {
            let rho = common.config.regime.rho;
            let scenario = common.config.scenario_for(Regime::Transient { rho }, common.dt)?;
            let paths = common.paths(10_000)?;
            let model = scenario.transient_model()?;
            let strategies = [Strategy::MultiUpdate(1), Strategy::MultiUpdate(2), Strategy::MultiUpdate(3)];
            for &s in &strategies {
                scenario.check_strategy(s)?;
            }
            let grid = uniform_grid(scenario.spec.horizon, scenario.steps);
            let inventories = |i: usize| -> Result<Vec<Vec<f64>>, Error> {
                let path = SignalPath::sample(&scenario.signal, &grid, &mut path_stream(common.seed, i as u64, TRANSIENT_SALT))?;
                strategies.iter().map(|&s| Ok(transient_schedule(&model, &scenario, s, &path)?.node_inventory())).collect()
            };
            let first = inventories(0)?;
            let rows = (0..grid.len()).map(|k| vec![grid[k], first[0][k], first[1][k], first[2][k]]).collect();
            emit("fig5_trajectories.csv", names(&["t", "X_n1", "X_n2", "X_n3"]), rows)?;

            let fan = paths.min(ENVELOPE_PATH_CAP);
            let idx = thinned(grid.len(), FAN_POINTS);
            let per_path: Vec<Vec<Vec<f64>>> = {
                use rayon::prelude::*;
                (0..fan).into_par_iter().map(inventories).collect::<Result<_, Error>>()?
            };
            let mut columns = vec!["t".to_string()];
            let mut blocks = Vec::new();
            for (k, n) in [1, 2, 3].iter().enumerate() {
                columns.extend([format!("n{n}_q05"), format!("n{n}_q50"), format!("n{n}_q95")]);
                let series: Vec<Vec<f64>> = per_path.iter().map(|p| p[k].clone()).collect();
                blocks.push(envelope(&grid, &idx, &series));
            }
            let rows = (0..idx.len())
                .map(|r| {
                    let mut row = vec![blocks[0][r][0]];
                    for b in &blocks {
                        row.extend_from_slice(&b[r][1..]);
                    }
                    row
                })
                .collect();
            emit("fig5_envelope.csv", columns, rows)?;

            let samples = sample_objectives(&scenario, &strategies, paths, common.seed)?;
            let step = (paths / 100).max(1);
            let mut rows = Vec::new();
            let mut k = step.max(2);
            loop {
                let mut row = vec![k as f64];
                for s in &samples {
                    let (m, se) = mean_stderr(&s[..k]);
                    row.extend([m, se]);
                }
                rows.push(row);
                if k == paths {
                    break;
                }
                k = (k + step).min(paths);
            }
            emit(
                "fig5_convergence.csv",
                names(&["paths", "mean_n1", "stderr_n1", "mean_n2", "stderr_n2", "mean_n3", "stderr_n3"]),
                rows,
            )
        }
        _ => Err(CliError { code: EXIT_CONFIG, message: format!("invalid parameter `figure`: {n} is not in 1..=5") }),
    }
}

pub fn run_sweep(common: &Common, param: &str, values: &[f64], strategies: Option<&str>, out: Option<&Path>) -> CliResult {
    let param = match param {
        "T" => SweepParam::Horizon,
        "sigma" => SweepParam::Sigma,
        "n" => SweepParam::Updates,
        other => {
            return Err(CliError { code: EXIT_CONFIG, message: format!("invalid parameter `param`: `{other}` (T, sigma, n)") })
        }
    };
    let scenario = common.config.scenario(common.dt)?;
    let pair = match strategies {
        Some(s) => {
            let parts: Vec<&str> = s.split(',').collect();
            if parts.len() != 2 {
                return Err(CliError {
                    code: EXIT_CONFIG,
                    message: "invalid parameter `strategy`: sweeps take two strategies, e.g. adaptive,static".into(),
                });
            }
            (parse_strategy(parts[0])?, parse_strategy(parts[1])?)
        }
        None if scenario.regime.is_transient() => (Strategy::MultiUpdate(2), Strategy::MultiUpdate(1)),
        None => (Strategy::Adaptive, Strategy::Static),
    };
    let paths = common.paths(1000)?;
    let table = sweep(&scenario, param, values, pair, paths, common.seed)?;
    let columns = names(&["value", "a_mean", "a_stderr", "b_mean", "b_stderr", "gap", "gap_stderr"]);
    let rows: Vec<Vec<f64>> = table
        .iter()
        .map(|r| {
            let e = &r.estimate;
            vec![r.value, e.a.mean, e.a.stderr, e.b.mean, e.b.stderr, e.gap, e.gap_stderr]
        })
        .collect();
    let fp = common.fingerprint(&format!("sweep {param:?} {values:?} {} {} {paths}", pair.0, pair.1));
    write(out, &render(&fp, &columns, &rows))?;
    Ok(())
}

pub fn validate(level: Level, faults: Faults) -> CliResult {
    let checks = validation::run(level, faults);
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut failed = 0;
    for c in &checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!("{verdict}  {:width$}  {:>7.2}s  {}", c.name, c.seconds, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(CliError { code: EXIT_VALIDATION, message: format!("{failed} of {} checks failed", checks.len()) });
    }
    println!("all {} checks passed", checks.len());
    Ok(())
}
