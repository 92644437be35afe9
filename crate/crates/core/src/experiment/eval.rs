use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policies::Policy;
use crate::protocol::{run_episode, EpisodeConfig, EpisodeSummary, Outcome};
use crate::rng;

/// Aggregate metrics of one policy over a batch of episodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub policy: String,
    pub params: String,
    pub episodes: usize,
    pub seed: u64,
    pub latency_ms: f64,
    pub latency_se: f64,
    pub e_b: f64,
    pub e_b_se: f64,
    pub uder: f64,
    pub uder_lo: f64,
    pub uder_hi: f64,
    pub drop_rate: f64,
    pub objective: f64,
    pub objective_se: f64,
    pub objective_gamma: f64,
    pub mean_retx: f64,
    pub mean_reward: f64,
}

/// Seeds of episodes `0..n` under `master`.
pub fn episode_seeds(master: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| rng::episode_seed(master, i)).collect()
}

/// Runs one episode per seed, in parallel, returning summaries in seed order.
pub fn simulate(cfg: &EpisodeConfig, policy: &Policy, seeds: &[u64]) -> Result<Vec<EpisodeSummary>> {
    cfg.validate()?;
    policy.validate(cfg.code.len(), cfg.code.field().bits())?;
    seeds
        .par_iter()
        .map(|&s| run_episode(cfg, policy, s).map(|r| r.trace.summary()))
        .collect()
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample mean of `E_b * gamma^T` over `(E_b, retransmissions)` pairs.
pub fn discounted_objective(rows: &[(f64, usize)], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid(format!("discount {gamma} outside (0, 1]")));
    }
    if rows.is_empty() {
        return Err(Error::invalid("objective of an empty sample"));
    }
    Ok(rows.iter().map(|&(e, t)| e * gamma.powi(t as i32)).sum::<f64>() / rows.len() as f64)
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z * Z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

pub fn summarize(
    policy: &Policy,
    rows: &[EpisodeSummary],
    gamma: f64,
    seed: u64,
) -> Result<ResultRow> {
    if rows.is_empty() {
        return Err(Error::invalid("cannot summarize zero episodes"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid(format!("discount {gamma} outside (0, 1]")));
    }
    let n = rows.len();
    let (latency_ms, latency_se) = mean_se(rows.iter().map(|r| r.latency_ms));
    let (e_b, e_b_se) = mean_se(rows.iter().map(|r| r.e_b));
    let (objective, objective_se) = mean_se(rows.iter().map(|r| r.e_b * gamma.powi(r.retransmissions() as i32)));
    let undetected = rows.iter().filter(|r| r.outcome == Outcome::UndetectedError).count();
    let dropped = rows.iter().filter(|r| r.outcome == Outcome::Dropped).count();
    let (uder_lo, uder_hi) = wilson_interval(undetected, n);
    Ok(ResultRow {
        policy: policy.name().into(),
        params: policy.params(),
        episodes: n,
        seed,
        latency_ms,
        latency_se,
        e_b,
        e_b_se,
        uder: undetected as f64 / n as f64,
        uder_lo,
        uder_hi,
        drop_rate: dropped as f64 / n as f64,
        objective,
        objective_se,
        objective_gamma: gamma,
        mean_retx: rows.iter().map(|r| r.retransmissions() as f64).sum::<f64>() / n as f64,
        mean_reward: rows.iter().map(|r| r.reward).sum::<f64>() / n as f64,
    })
}

/// Monte Carlo evaluation over `episodes` seeds derived from `seed`.
pub fn evaluate(cfg: &EpisodeConfig, policy: &Policy, episodes: usize, seed: u64, gamma: f64) -> Result<ResultRow> {
    if episodes == 0 {
        return Err(Error::invalid("evaluation needs at least one episode"));
    }
    let rows = simulate(cfg, policy, &episode_seeds(seed, episodes))?;
    summarize(policy, &rows, gamma, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub rows: Vec<ResultRow>,
    /// Index of the row with the largest objective (first on ties).
    pub best: usize,
}

impl GridResult {
    pub fn best_row(&self) -> &ResultRow {
        &self.rows[self.best]
    }
}

/// Evaluates every policy on the same episode seeds.
pub fn grid_search(
    cfg: &EpisodeConfig,
    grid: &[Policy],
    episodes: usize,
    seed: u64,
    gamma: f64,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::invalid("empty parameter grid"));
    }
    let rows = grid
        .iter()
        .map(|p| evaluate(cfg, p, episodes, seed, gamma))
        .collect::<Result<Vec<_>>>()?;
    let best = rows
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.objective > rows[b].objective { i } else { b });
    Ok(GridResult { rows, best })
}

/// Mean retransmission count of the one-symbol-per-round policy.
pub fn calibrate_f0(cfg: &EpisodeConfig, episodes: usize, seed: u64) -> Result<f64> {
    let row = evaluate(cfg, &Policy::Naive, episodes, seed, 1.0)?;
    Ok(row.mean_retx)
}

/// Extra battery lifetime in months for an efficiency ratio over a baseline.
pub fn lifetime_gain(baseline_years: f64, ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) {
        return Err(Error::invalid(format!("efficiency ratio must be positive, got {ratio}")));
    }
    Ok(12.0 * baseline_years * (ratio - 1.0))
}
