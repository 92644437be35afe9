use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use raf_harq::deeprl::train;
use raf_harq::experiment::{
    appendix_demo, calibrate_f0, grid_search, pareto_frontier, read_csv, simulate, summarize, write_csv,
    episode_seeds, ExperimentConfig, ParetoPoint, ResultRow, TraceRow,
};
use raf_harq::phy::ChannelKind;
use raf_harq::policies::PolicyKind;
use raf_harq::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "raf", version, about = "Rich-feedback HARQ link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    policy: Option<PolicyKind>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Preamble length in channel uses.
    #[arg(long)]
    lp: Option<f64>,
    #[arg(long = "snr-db", allow_negative_numbers = true)]
    snr_db: Option<f64>,
    #[arg(long)]
    channel: Option<ChannelKind>,
    /// Episode count for the subcommand.
    #[arg(long)]
    episodes: Option<u64>,
    /// RAF checkpoint to evaluate.
    #[arg(long, value_name = "PATH")]
    agent: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train the DQN agent.
    Train(Common),
    /// Evaluate one policy.
    Eval(Common),
    /// Grid-search a baseline's parameter.
    Grid(Common),
    /// Pareto frontier of result rows.
    Pareto {
        #[command(flatten)]
        common: Common,
        /// Result CSVs; defaults to every result CSV under --out.
        #[arg(long, num_args = 1..)]
        input: Vec<PathBuf>,
    },
    /// Binary single-feedback example.
    DemoAppendix,
    /// Measure the mean retransmissions of the one-symbol policy.
    CalibrateF0(Common),
}

fn usage_error(msg: &str) -> ! {
    Cli::command().error(ErrorKind::MissingRequiredArgument, msg).exit()
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let Some(path) = &common.config else {
        usage_error("--config <PATH> is required for this subcommand");
    };
    if !path.is_file() {
        usage_error(&format!("config file {} not found", path.display()));
    }
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out_dir = o.clone();
    }
    if let Some(p) = common.policy {
        cfg.policy = p;
    }
    if let Some(a) = common.alpha {
        cfg.alpha = a;
    }
    if let Some(lp) = common.lp {
        cfg.preamble_uses = lp;
    }
    if let Some(snr) = common.snr_db {
        cfg.snr_db = snr;
    }
    if let Some(ch) = common.channel {
        cfg.channel = ch;
    }
    if let Some(a) = &common.agent {
        cfg.agent_path = Some(a.clone());
    }
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    Ok(cfg)
}

fn print_row(r: &ResultRow) {
    println!(
        "{:<6} {:<10} E_b {:>8.4} +- {:.4}  latency {:>7.4} ms  UDER {:.2e} [{:.1e}, {:.1e}]  drop {:.2e}  objective {:>8.4}",
        r.policy, r.params, r.e_b, r.e_b_se, r.latency_ms, r.uder, r.uder_lo, r.uder_hi, r.drop_rate, r.objective
    );
}

fn cmd_train(common: &Common) -> Result<()> {
    let mut cfg = load(common)?;
    if let Some(n) = common.episodes {
        cfg.train_episodes = n;
    }
    let env = cfg.episode_config()?;
    let outcome = train(&env, &cfg.train_config(), cfg.seed, |p| {
        if let Some(v) = p.validation {
            eprintln!("episode {:>7}  eps {:.2}  mean reward {:+.4}  validation {:.4}", p.episode, p.epsilon, p.mean_reward, v);
        }
    })?;
    outcome.best.save(&cfg.out_dir.join("agent.json"))?;
    outcome.last.save(&cfg.out_dir.join("agent_last.json"))?;
    write_csv(&cfg.out_dir.join("learning_curve.csv"), &outcome.curve)?;
    println!(
        "best checkpoint at episode {} (objective {:.4}) -> {}",
        outcome.best.episodes,
        outcome.best.objective.unwrap_or(f64::NAN),
        cfg.out_dir.join("agent.json").display()
    );
    Ok(())
}

fn cmd_eval(common: &Common) -> Result<()> {
    let mut cfg = load(common)?;
    if let Some(n) = common.episodes {
        cfg.test_episodes = n as usize;
    }
    if cfg.test_episodes == 0 {
        return Err(Error::invalid("evaluation needs at least one episode"));
    }
    let env = cfg.episode_config()?;
    let policy = cfg.policy()?;
    let seeds = episode_seeds(cfg.seed, cfg.test_episodes);
    let episodes = simulate(&env, &policy, &seeds)?;
    let row = summarize(&policy, &episodes, cfg.objective_gamma, cfg.seed)?;
    let traces: Vec<TraceRow> = episodes
        .iter()
        .enumerate()
        .map(|(i, s)| TraceRow::new(i as u64, policy.name(), cfg.alpha, cfg.preamble_uses, s))
        .collect();
    let name = policy.name();
    write_csv(&cfg.out_dir.join(format!("eval_{name}.csv")), std::slice::from_ref(&row))?;
    write_csv(&cfg.out_dir.join(format!("traces_{name}.csv")), &traces)?;
    print_row(&row);
    Ok(())
}

fn cmd_grid(common: &Common) -> Result<()> {
    let mut cfg = load(common)?;
    if let Some(n) = common.episodes {
        cfg.test_episodes = n as usize;
    }
    let env = cfg.episode_config()?;
    let grid = cfg.grid(cfg.policy)?;
    let result = grid_search(&env, &grid, cfg.test_episodes, cfg.seed, cfg.objective_gamma)?;
    for r in &result.rows {
        print_row(r);
    }
    let best = result.best_row();
    println!("best: {} {} (objective {:.4})", best.policy, best.params, best.objective);
    write_csv(&cfg.out_dir.join(format!("grid_{}.csv", cfg.policy)), &result.rows)
}

fn result_csvs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".csv") && (name.starts_with("eval_") || name.starts_with("grid_"))
        })
        .collect();
    files.sort();
    Ok(files)
}

#[derive(serde::Serialize)]
struct FrontierRow<'a> {
    label: &'a str,
    e_b: f64,
    latency_ms: f64,
    frontier: bool,
}

fn cmd_pareto(common: &Common, input: &[PathBuf]) -> Result<()> {
    let cfg = load(common)?;
    let files = if input.is_empty() { result_csvs(&cfg.out_dir)? } else { input.to_vec() };
    if files.is_empty() {
        return Err(Error::invalid("no result CSVs to analyse"));
    }
    let mut points = Vec::new();
    for f in &files {
        for r in read_csv::<ResultRow>(f)? {
            points.push(ParetoPoint::new(format!("{} {}", r.policy, r.params), r.e_b, r.latency_ms));
        }
    }
    let set = pareto_frontier(points);
    let rows: Vec<FrontierRow> = set
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| FrontierRow {
            label: &p.label,
            e_b: p.e_b,
            latency_ms: p.latency_ms,
            frontier: set.contains(i),
        })
        .collect();
    for p in set.frontier_points() {
        println!("{:<16} E_b {:>8.4}  latency {:>7.4} ms", p.label, p.e_b, p.latency_ms);
    }
    write_csv(&cfg.out_dir.join("pareto.csv"), &rows)
}

#[derive(serde::Serialize)]
struct CalibrationRow {
    episodes: u64,
    seed: u64,
    snr_db: f64,
    configured: f64,
    measured: f64,
    relative_gap: f64,
    adopted: f64,
}

fn cmd_calibrate(common: &Common) -> Result<()> {
    let mut cfg = load(common)?;
    let episodes = common.episodes.unwrap_or(10_000);
    let env = cfg.episode_config()?;
    let measured = calibrate_f0(&env, episodes as usize, cfg.seed)?;
    let configured = cfg.f0_mean_retx;
    let gap = if configured > 0.0 { (measured - configured).abs() / configured } else { f64::INFINITY };
    let adopted = if gap > 0.1 { measured } else { configured };
    cfg.f0_mean_retx = adopted;
    let row = CalibrationRow {
        episodes,
        seed: cfg.seed,
        snr_db: cfg.snr_db,
        configured,
        measured,
        relative_gap: gap,
        adopted,
    };
    write_csv(&cfg.out_dir.join("calibration.csv"), &[row])?;
    cfg.save(&cfg.out_dir.join("config.toml"))?;
    println!("mean retransmissions {measured:.4} (configured {configured}); normalizer uses {adopted}");
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Train(c) => cmd_train(c)?,
        Command::Eval(c) => cmd_eval(c)?,
        Command::Grid(c) => cmd_grid(c)?,
        Command::Pareto { common, input } => cmd_pareto(common, input)?,
        Command::CalibrateF0(c) => cmd_calibrate(c)?,
        Command::DemoAppendix => {
            let report = appendix_demo()?;
            print!("{report}");
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
