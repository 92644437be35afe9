//! Deep Q-learning agent that picks the number of symbols to request.

mod adam;
mod checkpoint;
mod network;
mod replay;
mod train;

pub use adam::Adam;
pub use checkpoint::Checkpoint;
pub use network::{Dense, Gradients, QNetwork};
pub use replay::{Experience, ReplayBuffer};
pub use train::{train, CurvePoint, TrainConfig, TrainOutcome};

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Staircase exploration schedule: `max(min, start - decay * floor(episode / every))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub decay: f64,
    pub every: u64,
    pub min: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule {
            start: 1.0,
            decay: 0.05,
            every: 8000,
            min: 0.4,
        }
    }
}

impl EpsilonSchedule {
    pub fn at(&self, episode: u64) -> f64 {
        let steps = (episode / self.every.max(1)) as f64;
        (self.start - self.decay * steps).max(self.min)
    }
}

pub fn epsilon_at(episode: u64, schedule: &EpsilonSchedule) -> f64 {
    schedule.at(episode)
}

/// Bootstrapped regression targets `r + gamma * max_a' Q_B(h', a')`,
/// with no bootstrap on terminal transitions.
pub fn td_targets(batch: &[&Experience], target: &QNetwork, gamma: f64) -> Vec<f64> {
    batch
        .iter()
        .map(|e| {
            if e.terminal || gamma == 0.0 {
                e.reward
            } else {
                let best = target.forward(&e.next_state).into_iter().fold(f64::NEG_INFINITY, f64::max);
                e.reward + gamma * best
            }
        })
        .collect()
}

/// Copies the online parameters into the target network.
pub fn sync_target(online: &QNetwork, target: &mut QNetwork) {
    target.clone_from(online);
}

/// Online network, frozen target network, optimizer and replay memory.
#[derive(Clone, Debug)]
pub struct DqnAgent {
    pub online: QNetwork,
    target: QNetwork,
    pub adam: Adam,
    pub replay: ReplayBuffer,
    pub gamma: f64,
    pub grad_clip: f64,
    sessions: u64,
    sync_every: u64,
}

impl DqnAgent {
    pub fn new(online: QNetwork, cfg: &TrainConfig) -> Self {
        DqnAgent {
            target: online.clone(),
            adam: Adam::new(&online, cfg.learning_rate),
            replay: ReplayBuffer::new(cfg.replay_capacity),
            gamma: cfg.gamma_dqn,
            grad_clip: cfg.grad_clip,
            sessions: 0,
            sync_every: cfg.target_sync_every,
            online,
        }
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn sessions(&self) -> u64 {
        self.sessions
    }

    /// One optimizer step on `batch`; returns the loss before the step.
    pub fn train_step(&mut self, batch: &[&Experience]) -> f64 {
        let targets = td_targets(batch, &self.target, self.gamma);
        let states: Vec<&[f64]> = batch.iter().map(|e| e.state.as_slice()).collect();
        let actions: Vec<usize> = batch.iter().map(|e| e.action - 1).collect();
        let (loss, mut grads) = self.online.loss_and_gradient(&states, &actions, &targets);
        grads.clip_norm(self.grad_clip);
        self.adam.apply(&mut self.online, &grads);
        loss
    }

    /// `steps` minibatch updates, then a target sync on every
    /// `sync_every`-th session. Returns the mean loss.
    pub fn train_session<R: Rng + ?Sized>(&mut self, steps: usize, batch_size: usize, rng: &mut R) -> f64 {
        let mut total = 0.0;
        for _ in 0..steps {
            let idx = self.replay.sample_indices(batch_size, rng);
            let batch: Vec<Experience> = idx.iter().filter_map(|&i| self.replay.get(i).cloned()).collect();
            let refs: Vec<&Experience> = batch.iter().collect();
            total += self.train_step(&refs);
        }
        self.sessions += 1;
        if self.sessions % self.sync_every.max(1) == 0 {
            sync_target(&self.online, &mut self.target);
        }
        total / steps.max(1) as f64
    }
}
