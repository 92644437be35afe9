//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! `cargo test --release --test acceptance -- 3 8` runs a subset.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use raf_harq::deeprl::{epsilon_at, train, EpsilonSchedule, Experience, QNetwork, ReplayBuffer};
use raf_harq::experiment::{
    appendix_demo, calibrate_f0, episode_seeds, evaluate, grid_search, pareto_frontier, simulate, ExperimentConfig,
    ParetoPoint, ResultRow,
};
use raf_harq::galois::GaloisField;
use raf_harq::ldpc::MotherCode;
use raf_harq::phy::ChannelKind;
use raf_harq::policies::{Policy, PolicyKind};
use raf_harq::protocol::{EnergyModel, EpisodeConfig, Outcome};

/// Evaluation seed shared by every policy in the learning comparisons.
const TEST_SEED: u64 = 2024;
const TEST_EPISODES: usize = 10_000;
/// Episodes per grid point when choosing baseline parameters.
const GRID_EPISODES: usize = 2_000;
const TRAIN_EPISODES: u64 = 100_000;
const TRAIN_SEED: u64 = 1;
/// Episodes per fixed-`L_static` point on the fading channel.
const FADING_BASELINE_EPISODES: usize = 3_000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn reference() -> ExperimentConfig {
    ExperimentConfig::default()
}

fn env_at(snr_db: f64, channel: ChannelKind) -> EpisodeConfig {
    ExperimentConfig {
        snr_db,
        channel,
        ..reference()
    }
    .episode_config()
    .unwrap()
}

fn c1_appendix() -> Verdict {
    let t = Instant::now();
    let report = appendix_demo().unwrap();
    let failed: Vec<_> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.to_string()).collect();
    let elapsed = t.elapsed();
    verdict(
        failed.is_empty() && within(elapsed, 1.0),
        format!(
            "{} checks, failed {:?}, {:.3} s (limit 1 s)",
            report.checks.len(),
            failed,
            elapsed.as_secs_f64()
        ),
    )
}

fn c2_field_code() -> Verdict {
    let t = Instant::now();
    let code = MotherCode::construct(1, 15, 5, GaloisField::new(256).unwrap()).unwrap();
    let results = [
        ("GF(16) exhaustive triples", common::gf_axioms_exhaustive(16)),
        ("GF(256) random triples", common::gf_axioms_random(256, 100_000, 21)),
        ("encode/syndrome", common::encode_syndrome(&code, 10_000, 4)),
        ("MR seed-round pairs", common::mr_bijection(&code, 8, 4)),
    ];
    let elapsed = t.elapsed();
    let mut pass = within(elapsed, 30.0);
    let mut parts = Vec::new();
    for (name, r) in results {
        match r {
            Ok(n) => parts.push(format!("{name} {n} ok")),
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    verdict(pass, format!("{}; {:.1} s (limit 30 s)", parts.join(", "), elapsed.as_secs_f64()))
}

fn c3_energy() -> Verdict {
    let m = EnergyModel::new(0.04, 0.1, 1.0, 2.0, 1.0).unwrap();
    let e = m.round_energy(5.0);
    let n = m.naive_normalizer(7.7, 15.0, 1.0);
    let rel = |x: f64, want: f64| ((x - want) / want).abs();
    let pass = rel(e, 0.252) <= 1e-12 && rel(n, 1.3604) <= 1e-12;
    let cfg = reference();
    let n_cfg = cfg.normalizer().unwrap();
    verdict(
        pass && rel(n_cfg, 1.3604) <= 1e-12,
        format!("E(t) = {e:.15} mJ, normalizer = {n:.15} mJ, reference config {n_cfg:.15} mJ (rel tol 1e-12)"),
    )
}

fn c4_calibration() -> Verdict {
    let t = Instant::now();
    let env = env_at(6.0, ChannelKind::Awgn);
    let retx = calibrate_f0(&env, 10_000, 7).unwrap();
    let rel = (retx - 7.7) / 7.7;
    let elapsed = t.elapsed();
    verdict(
        rel.abs() <= 0.30 && within(elapsed, 600.0),
        format!(
            "naive mean retransmissions {retx:.3} over 10^4 episodes vs 7.7 ({:+.1}%, tol 30%); {:.0} s",
            100.0 * rel,
            elapsed.as_secs_f64()
        ),
    )
}

fn c5_dqn() -> Verdict {
    let t = Instant::now();
    let grad_err = common::gradient_check(1e-5);
    let losses = common::fixed_batch_losses(10);
    let monotone = losses.windows(2).all(|w| w[1] < w[0]);

    let mut replay = ReplayBuffer::new(3);
    let exp = |a: usize| Experience {
        state: vec![0.0; 15],
        action: a,
        reward: 0.0,
        next_state: vec![0.0; 15],
        terminal: true,
    };
    for a in 1..=5 {
        replay.push(exp(a));
    }
    let kept: Vec<usize> = (0..replay.len()).map(|i| replay.get(i).unwrap().action).collect();
    let fifo = kept == [3, 4, 5];

    let s = EpsilonSchedule::default();
    let eps = [0, 16_000, 96_000, 200_000].map(|e| epsilon_at(e, &s));
    let eps_ok = eps == [1.0, 0.9, 0.4, 0.4];
    let elapsed = t.elapsed();
    verdict(
        grad_err < 1e-4 && monotone && fifo && eps_ok && within(elapsed, 60.0),
        format!(
            "grad rel err {grad_err:.2e} (<1e-4), loss {:.4} -> {:.4} monotone {monotone}, FIFO kept {kept:?}, eps {eps:?}; {:.1} s",
            losses[0],
            losses[losses.len() - 1],
            elapsed.as_secs_f64()
        ),
    )
}

fn c6_decoding() -> Verdict {
    let t = Instant::now();
    let hi = env_at(30.0, ChannelKind::Awgn);
    let rows = simulate(&hi, &Policy::Harq { l_static: 8 }, &episode_seeds(30, 1000)).unwrap();
    let first = rows.iter().filter(|r| r.outcome == Outcome::Success && r.t_rounds == 1).count();
    let mut pass = first * 1000 >= 999 * rows.len();
    let mut parts = vec![format!("30 dB round-0 success {first}/1000")];

    let env = env_at(6.0, ChannelKind::Awgn);
    let seeds = episode_seeds(6, 2000);
    let policies = [
        Policy::Harq { l_static: 8 },
        Policy::St { l_static: 7 },
        Policy::Dharq { threshold: 5.61 },
        Policy::Ta { threshold: 5.39 },
    ];
    for p in policies {
        let rows = simulate(&env, &p, &seeds).unwrap();
        let bad = rows.iter().filter(|r| r.outcome != Outcome::Success).count();
        let rate = bad as f64 / rows.len() as f64;
        pass &= rate < 0.01;
        parts.push(format!("{} {} fail {rate:.4}", p.name(), p.params()));
    }
    verdict(
        pass,
        format!("{}; 6 dB over 2000 episodes each; {:.0} s", parts.join(", "), t.elapsed().as_secs_f64()),
    )
}

struct Learned {
    agent: Arc<QNetwork>,
    train_secs: f64,
}

fn learned_agent() -> &'static Learned {
    static AGENT: OnceLock<Learned> = OnceLock::new();
    AGENT.get_or_init(|| {
        let cfg = reference();
        let env = cfg.episode_config().unwrap();
        let train_cfg = raf_harq::deeprl::TrainConfig {
            episodes: TRAIN_EPISODES,
            ..cfg.train_config()
        };
        assert_eq!(train_cfg.gamma_dqn, 0.5);
        let t = Instant::now();
        let outcome = train(&env, &train_cfg, TRAIN_SEED, |_| {}).unwrap();
        Learned {
            agent: Arc::new(outcome.best.network().unwrap()),
            train_secs: t.elapsed().as_secs_f64(),
        }
    })
}

fn raf_policy(agent: &Arc<QNetwork>) -> Policy {
    Policy::Raf {
        agent: Arc::clone(agent),
        epsilon: 0.0,
    }
}

fn c7_learning() -> Verdict {
    let t = Instant::now();
    let cfg = reference();
    let env = cfg.episode_config().unwrap();
    let gamma = cfg.objective_gamma;

    let mut baselines: Vec<ResultRow> = Vec::new();
    for kind in PolicyKind::BASELINES {
        let grid = cfg.grid(kind).unwrap();
        let chosen = grid_search(&env, &grid, GRID_EPISODES, TEST_SEED + 1, gamma).unwrap();
        let best = &grid[chosen.best];
        baselines.push(evaluate(&env, best, TEST_EPISODES, TEST_SEED, gamma).unwrap());
    }
    let learned = learned_agent();
    let raf = evaluate(&env, &raf_policy(&learned.agent), TEST_EPISODES, TEST_SEED, gamma).unwrap();
    let best = baselines.iter().max_by(|a, b| a.objective.total_cmp(&b.objective)).unwrap();
    let pass = raf.objective >= best.objective - best.objective_se;
    let summary: Vec<String> = baselines
        .iter()
        .map(|r| format!("{} {} {:.3}", r.policy, r.params, r.objective))
        .collect();
    verdict(
        pass,
        format!(
            "RAF {:.3} +- {:.3} vs best baseline {} {} {:.3} +- {:.3} [{}]; {TRAIN_EPISODES} training episodes in {:.0} s, total {:.0} s",
            raf.objective,
            raf.objective_se,
            best.policy,
            best.params,
            best.objective,
            best.objective_se,
            summary.join(", "),
            learned.train_secs,
            t.elapsed().as_secs_f64()
        ),
    )
}

fn c8_pareto() -> Verdict {
    let t = Instant::now();
    let pt = |label: &str, e_b: f64, latency_ms: f64| ParetoPoint {
        label: label.into(),
        e_b,
        latency_ms,
    };
    let worked = pareto_frontier(vec![pt("a", 36.0, 1.5), pt("b", 35.0, 1.4), pt("c", 34.0, 1.6)]);
    let worked_ok = worked.frontier == [0, 1];

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..40);
        let points: Vec<ParetoPoint> = (0..n)
            .map(|i| pt(&i.to_string(), rng.random_range(0..12) as f64, rng.random_range(0..12) as f64 * 0.25))
            .collect();
        let brute: BTreeSet<usize> = (0..n)
            .filter(|&i| {
                (0..n).all(|j| points[i].e_b >= points[j].e_b || points[i].latency_ms <= points[j].latency_ms)
            })
            .collect();
        let fast: BTreeSet<usize> = pareto_frontier(points).frontier.into_iter().collect();
        mismatches += usize::from(brute != fast);
    }
    let elapsed = t.elapsed();
    verdict(
        worked_ok && mismatches == 0 && within(elapsed, 1.0),
        format!(
            "worked example frontier {:?}, {mismatches} mismatches over 1000 random sets, {:.3} s",
            worked.frontier,
            elapsed.as_secs_f64()
        ),
    )
}

fn c9_fading() -> Verdict {
    let t = Instant::now();
    let cfg = reference();
    let env = env_at(cfg.snr_db, ChannelKind::Rayleigh);
    let gamma = cfg.objective_gamma;
    let learned = learned_agent();
    let raf = evaluate(&env, &raf_policy(&learned.agent), TEST_EPISODES, TEST_SEED, gamma).unwrap();

    let mut points = vec![ParetoPoint {
        label: "raf".into(),
        e_b: raf.e_b,
        latency_ms: raf.latency_ms,
    }];
    for kind in [PolicyKind::Harq, PolicyKind::St] {
        let grid = cfg.grid(kind).unwrap();
        let rows = grid_search(&env, &grid, FADING_BASELINE_EPISODES, TEST_SEED, gamma).unwrap().rows;
        points.extend(rows.iter().map(|r| ParetoPoint {
            label: format!("{} {}", r.policy, r.params),
            e_b: r.e_b,
            latency_ms: r.latency_ms,
        }));
    }
    let dominators: Vec<&str> = points[1..]
        .iter()
        .filter(|p| p.dominates(&points[0]))
        .map(|p| p.label.as_str())
        .collect();
    let set = pareto_frontier(points.clone());
    let pass = raf.episodes == TEST_EPISODES && dominators.is_empty() && set.frontier.contains(&0);
    verdict(
        pass,
        format!(
            "RAF E_b {:.3} latency {:.3} ms over {} Rayleigh episodes; dominated by {:?}; frontier {:?}; {:.0} s",
            raf.e_b,
            raf.latency_ms,
            raf.episodes,
            dominators,
            set.frontier_points().map(|p| p.label.as_str()).collect::<Vec<_>>(),
            t.elapsed().as_secs_f64()
        ),
    )
}

fn run_cli(args: &[&str], out: &Path) -> bool {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/reference.toml");
    Command::new(env!("CARGO_BIN_EXE_raf"))
        .args(args)
        .args(["--config", config, "--seed", "77", "--out"])
        .arg(out)
        .output()
        .is_ok_and(|o| o.status.success())
}

fn c10_determinism() -> Verdict {
    let runs: [(&[&str], &[&str]); 3] = [
        (&["eval", "--policy", "ta", "--episodes", "300"], &["eval_ta.csv", "traces_ta.csv"]),
        (&["grid", "--policy", "harq", "--episodes", "40"], &["grid_harq.csv"]),
        (&["train", "--episodes", "400"], &["learning_curve.csv", "agent.json"]),
    ];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut pass = true;
    let mut compared = Vec::new();
    for (args, files) in runs {
        if !run_cli(args, a.path()) || !run_cli(args, b.path()) {
            return verdict(false, format!("`raf {}` failed", args.join(" ")));
        }
        for f in files {
            let same = std::fs::read(a.path().join(f)).ok().zip(std::fs::read(b.path().join(f)).ok());
            let identical = same.is_some_and(|(x, y)| x == y);
            pass &= identical;
            compared.push(format!("{f} {}", if identical { "identical" } else { "DIFFERS" }));
        }
    }
    verdict(pass, compared.join(", "))
}

type Criterion = (u32, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 10] = [
    (1, "appendix golden example", c1_appendix),
    (2, "field and code properties", c2_field_code),
    (3, "energy model arithmetic", c3_energy),
    (4, "naive policy calibration", c4_calibration),
    (5, "DQN mechanics", c5_dqn),
    (6, "end-to-end decoding sanity", c6_decoding),
    (7, "learned policy vs tuned baselines", c7_learning),
    (8, "Pareto tooling", c8_pareto),
    (9, "fading generalization", c9_fading),
    (10, "CLI determinism", c10_determinism),
];

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.trim_start_matches('C').parse().ok()).collect();
    let mut failures = 0;
    for (id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let v = check();
        failures += usize::from(!v.pass);
        println!("{} C{id:<2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
