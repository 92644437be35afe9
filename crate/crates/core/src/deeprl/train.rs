use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Checkpoint, DqnAgent, EpsilonSchedule, QNetwork};
use crate::error::{Error, Result};
use crate::experiment::{discounted_objective, episode_seeds, simulate};
use crate::policies::Policy;
use crate::protocol::{run_episode, EpisodeConfig, Outcome};
use crate::rng::{self, domain};

/// DQN hyperparameters; the defaults are the reference settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub gamma_dqn: f64,
    pub batch_size: usize,
    pub grad_clip: f64,
    /// Episodes between training sessions.
    pub train_every: u64,
    /// Minibatch steps per session.
    pub steps_per_update: usize,
    /// Sessions between target-network syncs.
    pub target_sync_every: u64,
    pub epsilon: EpsilonSchedule,
    pub replay_capacity: usize,
    pub episodes: u64,
    pub hidden: Vec<usize>,
    /// Episodes between validation runs of the greedy policy.
    pub validate_every: u64,
    pub validate_episodes: usize,
    /// Discount of the validation objective.
    pub objective_gamma: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            gamma_dqn: 0.5,
            batch_size: 64,
            grad_clip: 5.0,
            train_every: 100,
            steps_per_update: 15,
            target_sync_every: 10,
            epsilon: EpsilonSchedule::default(),
            replay_capacity: 60_000,
            episodes: 270_000,
            hidden: vec![64, 32, 16],
            validate_every: 10_000,
            validate_episodes: 2_000,
            objective_gamma: 0.92,
        }
    }
}

impl TrainConfig {
    pub fn widths(&self, l0: usize) -> Vec<usize> {
        std::iter::once(l0)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(l0))
            .collect()
    }
}

/// One row of the learning curve, emitted after each training session and
/// at each validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: u64,
    pub session: u64,
    pub epsilon: f64,
    pub loss: Option<f64>,
    /// Mean terminal reward over the episodes since the previous row.
    pub mean_reward: f64,
    pub success_rate: f64,
    pub validation: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Snapshot with the best validation objective.
    pub best: Checkpoint,
    pub last: Checkpoint,
    pub curve: Vec<CurvePoint>,
}

fn validate(env: &EpisodeConfig, net: &QNetwork, seeds: &[u64], gamma: f64) -> Result<f64> {
    let policy = Policy::Raf {
        agent: Arc::new(net.clone()),
        epsilon: 0.0,
    };
    let rows = simulate(env, &policy, seeds)?;
    let pairs: Vec<(f64, usize)> = rows.iter().map(|r| (r.e_b, r.retransmissions())).collect();
    discounted_objective(&pairs, gamma)
}

/// Trains an agent on `env` with epsilon-greedy exploration.
pub fn train(
    env: &EpisodeConfig,
    cfg: &TrainConfig,
    seed: u64,
    mut progress: impl FnMut(&CurvePoint),
) -> Result<TrainOutcome> {
    env.validate()?;
    if cfg.batch_size == 0 || cfg.train_every == 0 {
        return Err(Error::invalid("batch size and training frequency must be positive"));
    }
    let l0 = env.code.len();
    let mut agent = DqnAgent::new(QNetwork::new(&cfg.widths(l0), seed)?, cfg);
    let train_master = rng::derive_seed(seed, &[domain::TRAIN]);
    let val_seeds = episode_seeds(rng::derive_seed(seed, &[domain::VALIDATE]), cfg.validate_episodes);
    let mut replay_rng = rng::stream(seed, &[domain::REPLAY]);

    let mut snapshot = Arc::new(agent.online.clone());
    let mut curve = Vec::new();
    let mut best: Option<(f64, QNetwork, u64)> = None;
    let (mut reward_sum, mut successes, mut window) = (0.0, 0usize, 0usize);

    for episode in 0..cfg.episodes {
        let epsilon = cfg.epsilon.at(episode);
        let policy = Policy::Raf {
            agent: Arc::clone(&snapshot),
            epsilon,
        };
        let run = run_episode(env, &policy, rng::episode_seed(train_master, episode))?;
        reward_sum += run.trace.reward;
        successes += usize::from(run.trace.outcome == Outcome::Success);
        window += 1;
        for e in run.experiences {
            agent.replay.push(e);
        }

        let done = episode + 1;
        let session_due = done % cfg.train_every == 0;
        let validation_due =
            (cfg.validate_every > 0 && done % cfg.validate_every == 0) || (done == cfg.episodes && best.is_none());
        if !session_due && !validation_due {
            continue;
        }

        let mut loss = None;
        if session_due && !agent.replay.is_empty() {
            loss = Some(agent.train_session(cfg.steps_per_update, cfg.batch_size, &mut replay_rng));
            snapshot = Arc::new(agent.online.clone());
        }
        let mut validation = None;
        if validation_due && !val_seeds.is_empty() {
            let v = validate(env, &agent.online, &val_seeds, cfg.objective_gamma)?;
            if best.as_ref().is_none_or(|(b, _, _)| v > *b) {
                best = Some((v, agent.online.clone(), done));
            }
            validation = Some(v);
        }
        let point = CurvePoint {
            episode: done,
            session: agent.sessions(),
            epsilon,
            loss,
            mean_reward: reward_sum / window.max(1) as f64,
            success_rate: successes as f64 / window.max(1) as f64,
            validation,
        };
        progress(&point);
        curve.push(point);
        (reward_sum, successes, window) = (0.0, 0, 0);
    }

    let last = Checkpoint::new(&agent.online, cfg.gamma_dqn, cfg.episodes, seed, None);
    let best = match best {
        Some((v, net, at)) => Checkpoint::new(&net, cfg.gamma_dqn, at, seed, Some(v)),
        None => last.clone(),
    };
    Ok(TrainOutcome { best, last, curve })
}
