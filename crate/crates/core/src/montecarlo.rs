//! Seeded, order-independent Monte Carlo over [`Scenario`]s.
//!
//! Path `i` draws from stream `(seed, i, regime salt)`; all strategies in
//! one call see the same market path (common random numbers) unless
//! [`Pairing::Independent`] is requested. Paths are evaluated in parallel
//! and reduced in index order, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instant::{InstantSimulator, InstantStrategy};
use crate::rng::{path_stream, INDEPENDENT_SALT, INSTANT_SALT, TRANSIENT_SALT};
use crate::scenario::{Regime, Scenario, Strategy};
use crate::signal::uniform_grid;
use crate::special::pairwise_sum;
use crate::transient::{multi_update_schedule, revenue, SignalPath, TradeSchedule, TransientModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevenueEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
    pub regime: String,
    pub strategy: String,
}

/// Estimate of `E[objective_a - objective_b]` together with both marginals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedEstimate {
    pub a: RevenueEstimate,
    pub b: RevenueEstimate,
    pub gap: f64,
    pub gap_stderr: f64,
    pub paired: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// Both strategies run on the same market path.
    Common,
    /// The second strategy draws from an unrelated stream.
    Independent,
}

/// Sample mean and standard error (`sd / sqrt(n)`), pairwise-summed. `samples` must be non-empty.
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    // Shifting by the first sample keeps identical samples exactly zero-variance.
    let shift = samples[0];
    let centred: Vec<f64> = samples.iter().map(|v| v - shift).collect();
    let offset = pairwise_sum(&centred) / n;
    if samples.len() < 2 {
        return (shift + offset, 0.0);
    }
    let sq: Vec<f64> = centred.iter().map(|v| (v - offset) * (v - offset)).collect();
    (shift + offset, (pairwise_sum(&sq) / (n - 1.0) / n).sqrt())
}

enum Engine {
    Instant { sim: InstantSimulator, strategies: Vec<InstantStrategy> },
    Transient { model: TransientModel, scenario: Scenario, grid: Vec<f64>, strategies: Vec<Strategy> },
}

impl Engine {
    fn new(scenario: &Scenario, strategies: &[Strategy]) -> Result<Self> {
        scenario.validate()?;
        for &s in strategies {
            scenario.check_strategy(s)?;
        }
        if let Regime::Transient { .. } = scenario.regime {
            Ok(Engine::Transient {
                model: scenario.transient_model()?,
                scenario: *scenario,
                grid: uniform_grid(scenario.spec.horizon, scenario.steps),
                strategies: strategies.to_vec(),
            })
        } else {
            let sim = InstantSimulator::new(&scenario.instant_model()?, &scenario.signal, &scenario.spec, scenario.steps)?
                .with_price_noise(scenario.price_noise);
            let strategies = strategies.iter().map(|&s| scenario.instant_strategy(s)).collect::<Result<_>>()?;
            Ok(Engine::Instant { sim, strategies })
        }
    }

    fn salt(&self) -> u64 {
        match self {
            Engine::Instant { .. } => INSTANT_SALT,
            Engine::Transient { .. } => TRANSIENT_SALT,
        }
    }

    /// Objectives of strategies `which` on the path drawn from `(seed, index, salt)`.
    fn evaluate(&self, seed: u64, index: u64, salt: u64, which: std::ops::Range<usize>) -> Result<Vec<f64>> {
        let mut rng = path_stream(seed, index, salt);
        match self {
            Engine::Instant { sim, strategies } => {
                let market = sim.sample_market(&mut rng);
                strategies[which].iter().map(|s| sim.objective(&market, s)).collect()
            }
            Engine::Transient { model, scenario, grid, strategies } => {
                let path = SignalPath::sample(&scenario.signal, grid, &mut rng)?;
                strategies[which]
                    .iter()
                    .map(|&s| {
                        let schedule = transient_schedule(model, scenario, s, &path)?;
                        revenue(model, &schedule, &path, scenario.spec.p0)
                    })
                    .collect()
            }
        }
    }
}

/// Schedule of `strategy` on a sampled transient-regime path.
pub fn transient_schedule(
    model: &TransientModel,
    scenario: &Scenario,
    strategy: Strategy,
    path: &SignalPath,
) -> Result<TradeSchedule> {
    let x0 = scenario.spec.x0;
    match strategy {
        Strategy::Static => multi_update_schedule(model, &scenario.signal, 1, x0, path),
        Strategy::MultiUpdate(n) => multi_update_schedule(model, &scenario.signal, n, x0, path),
        Strategy::Twap => {
            let rate = x0 / scenario.spec.horizon;
            TradeSchedule::new(x0, path.grid.clone(), vec![], vec![rate; path.grid.len() - 1])
        }
        s => Err(Error::RegimeMismatch(format!("strategy `{s}` is not available in the transient regime"))),
    }
}

/// Per-path objectives, `samples[k][i]` for strategy `k` on path `i`, all
/// strategies sharing each path.
pub fn sample_objectives(scenario: &Scenario, strategies: &[Strategy], n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let engine = Engine::new(scenario, strategies)?;
    let salt = engine.salt();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            engine
                .evaluate(seed, i as u64, salt, 0..strategies.len())
                .map_err(|e| Error::Path { index: i, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    Ok((0..strategies.len()).map(|k| rows.iter().map(|r| r[k]).collect()).collect())
}

fn check_count(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::param("paths", format!("need at least 2 paths, got {n}")));
    }
    Ok(())
}

fn summarize(scenario: &Scenario, strategy: Strategy, samples: &[f64], seed: u64) -> RevenueEstimate {
    let (mean, stderr) = mean_stderr(samples);
    RevenueEstimate {
        mean,
        stderr,
        n: samples.len(),
        seed,
        regime: scenario.regime.tag().to_string(),
        strategy: strategy.to_string(),
    }
}

pub fn estimate(scenario: &Scenario, strategy: Strategy, n: usize, seed: u64) -> Result<RevenueEstimate> {
    check_count(n)?;
    let samples = sample_objectives(scenario, &[strategy], n, seed)?;
    Ok(summarize(scenario, strategy, &samples[0], seed))
}

pub fn compare(
    scenario: &Scenario,
    a: Strategy,
    b: Strategy,
    n: usize,
    seed: u64,
    pairing: Pairing,
) -> Result<PairedEstimate> {
    check_count(n)?;
    let (sa, sb) = match pairing {
        Pairing::Common => {
            let mut s = sample_objectives(scenario, &[a, b], n, seed)?;
            let sb = s.pop().expect("two strategies");
            (s.pop().expect("two strategies"), sb)
        }
        Pairing::Independent => {
            let engine = Engine::new(scenario, &[a, b])?;
            let salt = engine.salt();
            let rows: Vec<(f64, f64)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let wrap = |e| Error::Path { index: i, source: Box::new(e) };
                    let ya = engine.evaluate(seed, i as u64, salt, 0..1).map_err(wrap)?[0];
                    let yb = engine.evaluate(seed, i as u64, salt ^ INDEPENDENT_SALT, 1..2).map_err(wrap)?[0];
                    Ok((ya, yb))
                })
                .collect::<Result<_>>()?;
            rows.into_iter().unzip()
        }
    };
    let diff: Vec<f64> = sa.iter().zip(&sb).map(|(x, y)| x - y).collect();
    let (gap, gap_stderr) = mean_stderr(&diff);
    Ok(PairedEstimate {
        a: summarize(scenario, a, &sa, seed),
        b: summarize(scenario, b, &sb, seed),
        gap,
        gap_stderr,
        paired: pairing == Pairing::Common,
    })
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Horizon `T`; the step size is held fixed at the template's `dt`.
    Horizon,
    /// Signal volatility `sigma`.
    Sigma,
    /// Update count `n`: compares `update-n` against `update-1`.
    Updates,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub estimate: PairedEstimate,
}

/// One paired estimate of `a - b` per value, every value using the same seed.
pub fn sweep(
    template: &Scenario,
    param: SweepParam,
    values: &[f64],
    strategies: (Strategy, Strategy),
    n: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::param("values", "sweep needs at least one value"));
    }
    let dt = template.dt();
    values
        .iter()
        .map(|&value| {
            let mut scenario = *template;
            let (a, b) = match param {
                SweepParam::Horizon => {
                    scenario.spec.horizon = value;
                    scenario.steps = (value / dt).round().max(1.0) as usize;
                    strategies
                }
                SweepParam::Sigma => {
                    scenario.signal.sigma = value;
                    strategies
                }
                SweepParam::Updates => {
                    if value < 1.0 || value.fract() != 0.0 {
                        return Err(Error::param("n", format!("update counts must be positive integers, got {value}")));
                    }
                    (Strategy::MultiUpdate(value as usize), Strategy::MultiUpdate(1))
                }
            };
            let estimate = compare(&scenario, a, b, n, seed, Pairing::Common)?;
            Ok(SweepRow { value, estimate })
        })
        .collect()
}
