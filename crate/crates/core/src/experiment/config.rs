use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::deeprl::{Checkpoint, EpsilonSchedule, TrainConfig};
use crate::error::{Error, Result};
use crate::galois::GaloisField;
use crate::ldpc::MotherCode;
use crate::phy::{ChannelKind, ChannelSpec, ModulationSpec};
use crate::policies::{l_static_grid, threshold_grid, Policy, PolicyKind};
use crate::protocol::{derive_ps, EnergyModel, EpisodeConfig};

/// Flat experiment description. Every key has a default; the defaults are
/// the reference scenario and DQN settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    // scenario
    pub k_bits: usize,
    pub l0: usize,
    pub field_order: usize,
    pub modulation_order: usize,
    pub snr_db: f64,
    pub channel: ChannelKind,
    pub bp_iters: usize,
    pub t_max: usize,
    pub slot_ms: f64,
    pub e_first_mj: f64,
    pub preamble_uses: f64,
    pub alpha: f64,
    pub code_seed: u64,
    /// Mean retransmissions of the one-symbol policy, for the reward normalizer.
    pub f0_mean_retx: f64,

    // policy
    pub policy: PolicyKind,
    pub l_static: usize,
    pub h_th: f64,
    /// RAF checkpoint; relative paths resolve against the config file.
    pub agent_path: Option<PathBuf>,
    pub l_static_grid: Vec<usize>,
    pub h_th_grid: Vec<f64>,
    pub gamma_dqn_grid: Vec<f64>,

    // training
    pub learning_rate: f64,
    pub gamma_dqn: f64,
    pub batch_size: usize,
    pub grad_clip: f64,
    pub train_every: u64,
    pub steps_per_update: usize,
    pub target_sync_every: u64,
    pub eps_start: f64,
    pub eps_decay: f64,
    pub eps_every: u64,
    pub eps_min: f64,
    pub replay_capacity: usize,
    pub train_episodes: u64,
    pub hidden: Vec<usize>,
    pub validate_every: u64,
    pub validate_episodes: usize,

    // evaluation
    pub test_episodes: usize,
    pub seed: u64,
    pub objective_gamma: f64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        ExperimentConfig {
            k_bits: 40,
            l0: 15,
            field_order: 256,
            modulation_order: 256,
            snr_db: 6.0,
            channel: ChannelKind::Awgn,
            bp_iters: 5,
            t_max: 15,
            slot_ms: 1.0,
            e_first_mj: 0.6,
            preamble_uses: 1.0,
            alpha: 0.1,
            code_seed: 1,
            f0_mean_retx: 7.7,
            policy: PolicyKind::Harq,
            l_static: 8,
            h_th: 5.39,
            agent_path: None,
            l_static_grid: l_static_grid(15),
            h_th_grid: threshold_grid(2.9, 7.1, 0.2),
            gamma_dqn_grid: threshold_grid(0.1, 0.9, 0.1),
            learning_rate: train.learning_rate,
            gamma_dqn: train.gamma_dqn,
            batch_size: train.batch_size,
            grad_clip: train.grad_clip,
            train_every: train.train_every,
            steps_per_update: train.steps_per_update,
            target_sync_every: train.target_sync_every,
            eps_start: train.epsilon.start,
            eps_decay: train.epsilon.decay,
            eps_every: train.epsilon.every,
            eps_min: train.epsilon.min,
            replay_capacity: train.replay_capacity,
            train_episodes: train.episodes,
            hidden: train.hidden,
            validate_every: train.validate_every,
            validate_episodes: train.validate_episodes,
            test_episodes: 30_000,
            seed: 1,
            objective_gamma: 0.92,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and resolves `agent_path` relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(agent), Some(dir)) = (&cfg.agent_path, path.parent()) {
            if agent.is_relative() {
                cfg.agent_path = Some(dir.join(agent));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn field_bits(&self) -> u32 {
        self.field_order.trailing_zeros()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !self.field_order.is_power_of_two() || !(2..=256).contains(&self.field_order) {
            return bad(format!("field_order {} is not a power of two in 2..=256", self.field_order));
        }
        let bits = self.field_bits() as usize;
        if self.k_bits == 0 || self.k_bits % bits != 0 {
            return bad(format!("k_bits {} is not a positive multiple of {bits}", self.k_bits));
        }
        if self.k_bits / bits >= self.l0 {
            return bad(format!("k_bits {} leaves no parity in l0 = {}", self.k_bits, self.l0));
        }
        if self.t_max == 0 {
            return bad("t_max must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} outside [0, 1]", self.alpha));
        }
        if !(self.objective_gamma > 0.0 && self.objective_gamma <= 1.0) {
            return bad(format!("objective_gamma {} outside (0, 1]", self.objective_gamma));
        }
        if !(0.0..1.0).contains(&self.gamma_dqn) {
            return bad(format!("gamma_dqn {} outside [0, 1)", self.gamma_dqn));
        }
        if self.f0_mean_retx < 0.0 {
            return bad("f0_mean_retx must be nonnegative".into());
        }
        if self.l_static_grid.iter().any(|&l| l == 0 || l > self.l0) {
            return bad(format!("l_static_grid entries must lie in 1..={}", self.l0));
        }
        ModulationSpec::qam(self.modulation_order)?.uses_per_symbol(self.field_bits())?;
        Ok(())
    }

    pub fn modulation(&self) -> Result<ModulationSpec> {
        ModulationSpec::qam(self.modulation_order)
    }

    pub fn channel_spec(&self) -> ChannelSpec {
        ChannelSpec {
            kind: self.channel,
            snr_db: self.snr_db,
        }
    }

    pub fn mother_code(&self) -> Result<MotherCode> {
        let field = GaloisField::new(self.field_order)?;
        MotherCode::construct(self.code_seed, self.l0, self.k_bits / self.field_bits() as usize, field)
    }

    /// Energy model with `Ps` derived from the initial-frame cost.
    pub fn energy_model(&self) -> Result<EnergyModel> {
        let uses = self.modulation()?.uses_per_symbol(self.field_bits())?;
        EnergyModel::new(
            derive_ps(self.e_first_mj, self.l0, uses),
            self.alpha,
            self.preamble_uses,
            0.0,
            self.slot_ms,
        )
    }

    /// Reward normalizer: expected total energy of the one-symbol policy.
    pub fn normalizer(&self) -> Result<f64> {
        let uses = self.modulation()?.uses_per_symbol(self.field_bits())?;
        let lf = PolicyKind::Naive.feedback_symbols(self.l0, self.field_bits());
        let model = self.energy_model()?.with_feedback_uses((lf * uses) as f64);
        Ok(model.naive_normalizer(self.f0_mean_retx, (self.l0 * uses) as f64, uses as f64))
    }

    pub fn episode_config(&self) -> Result<EpisodeConfig> {
        self.validate()?;
        let cfg = EpisodeConfig {
            code: Arc::new(self.mother_code()?),
            modulation: self.modulation()?,
            channel: self.channel_spec(),
            energy: self.energy_model()?,
            t_max: self.t_max,
            bp_iters: self.bp_iters,
            normalizer: self.normalizer()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            gamma_dqn: self.gamma_dqn,
            batch_size: self.batch_size,
            grad_clip: self.grad_clip,
            train_every: self.train_every,
            steps_per_update: self.steps_per_update,
            target_sync_every: self.target_sync_every,
            epsilon: EpsilonSchedule {
                start: self.eps_start,
                decay: self.eps_decay,
                every: self.eps_every,
                min: self.eps_min,
            },
            replay_capacity: self.replay_capacity,
            episodes: self.train_episodes,
            hidden: self.hidden.clone(),
            validate_every: self.validate_every,
            validate_episodes: self.validate_episodes,
            objective_gamma: self.objective_gamma,
        }
    }

    /// The configured single policy. RAF requires `agent_path`.
    pub fn policy(&self) -> Result<Policy> {
        self.policy_of(self.policy)
    }

    pub fn policy_of(&self, kind: PolicyKind) -> Result<Policy> {
        Ok(match kind {
            PolicyKind::Harq => Policy::Harq { l_static: self.l_static },
            PolicyKind::Dharq => Policy::Dharq { threshold: self.h_th },
            PolicyKind::St => Policy::St { l_static: self.l_static },
            PolicyKind::Ta => Policy::Ta { threshold: self.h_th },
            PolicyKind::Naive => Policy::Naive,
            PolicyKind::Raf => {
                let path = self
                    .agent_path
                    .as_ref()
                    .ok_or_else(|| Error::Config("policy `raf` needs agent_path".into()))?;
                Policy::Raf {
                    agent: Arc::new(Checkpoint::load(path)?.network()?),
                    epsilon: 0.0,
                }
            }
        })
    }

    /// Parameter grid of a baseline kind.
    pub fn grid(&self, kind: PolicyKind) -> Result<Vec<Policy>> {
        Ok(match kind {
            PolicyKind::Harq => self.l_static_grid.iter().map(|&l| Policy::Harq { l_static: l }).collect(),
            PolicyKind::St => self.l_static_grid.iter().map(|&l| Policy::St { l_static: l }).collect(),
            PolicyKind::Dharq => self.h_th_grid.iter().map(|&h| Policy::Dharq { threshold: h }).collect(),
            PolicyKind::Ta => self.h_th_grid.iter().map(|&h| Policy::Ta { threshold: h }).collect(),
            PolicyKind::Naive => vec![Policy::Naive],
            PolicyKind::Raf => vec![self.policy_of(PolicyKind::Raf)?],
        })
    }
}
