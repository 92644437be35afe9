//! Experiment orchestration: configuration, Monte Carlo evaluation, grid
//! search, Pareto analysis and result persistence.

mod config;
mod demo;
mod eval;
mod pareto;
mod store;

pub use config::ExperimentConfig;
pub use demo::{appendix_demo, DemoCheck, DemoReport};
pub use eval::{
    calibrate_f0, discounted_objective, episode_seeds, evaluate, grid_search, lifetime_gain, simulate, summarize,
    wilson_interval, GridResult, ResultRow,
};
pub use pareto::{pareto_frontier, ParetoPoint, ParetoSet};
pub use store::{read_csv, read_csv_from, write_csv, write_csv_to, TraceRow};
