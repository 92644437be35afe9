//! Round-based HARQ episodes with energy, latency and reward accounting.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bpdec::{BpDecoder, DecodeResult, DecoderOptions, IntrinsicState};
use crate::deeprl::Experience;
use crate::error::{Error, Result};
use crate::galois::GfSymbol;
use crate::ldpc::{mr_symbols, MotherCode, MrExtension, PuncturePattern};
use crate::phy::{apply_channel, demodulate, map_symbols, ChannelSpec, ModulationSpec};
use crate::policies::Policy;
use crate::rng::{self, domain};

/// Transmit energy per channel use such that the initial frame alone costs `e_first`.
pub fn derive_ps(e_first: f64, l0: usize, uses_per_symbol: usize) -> f64 {
    e_first / (l0 * uses_per_symbol) as f64
}

/// Device-side energy accounting, all energies in mJ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    /// Energy per transmitted channel use.
    pub ps: f64,
    /// Reception cost relative to transmission.
    pub alpha: f64,
    pub preamble_uses: f64,
    pub feedback_uses: f64,
    pub slot_ms: f64,
}

impl EnergyModel {
    pub fn new(ps: f64, alpha: f64, preamble_uses: f64, feedback_uses: f64, slot_ms: f64) -> Result<Self> {
        if !(ps > 0.0) {
            return Err(Error::invalid(format!("Ps must be positive, got {ps}")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if preamble_uses < 0.0 || feedback_uses < 0.0 || !(slot_ms > 0.0) {
            return Err(Error::invalid("channel-use counts and slot length must be nonnegative"));
        }
        Ok(EnergyModel {
            ps,
            alpha,
            preamble_uses,
            feedback_uses,
            slot_ms,
        })
    }

    pub fn with_feedback_uses(self, feedback_uses: f64) -> Self {
        EnergyModel { feedback_uses, ..self }
    }

    /// `E(t) = Ps (Lp + Lt) + alpha Ps (Lp + Lf)` for `data_uses` uplink uses.
    pub fn round_energy(&self, data_uses: f64) -> f64 {
        self.ps * (self.preamble_uses + data_uses) + self.alpha * self.ps * (self.preamble_uses + self.feedback_uses)
    }

    /// Expected total energy of the one-symbol-per-round policy, given its
    /// mean number of retransmissions.
    pub fn naive_normalizer(&self, mean_retx: f64, initial_uses: f64, uses_per_symbol: f64) -> f64 {
        let overhead = self.preamble_uses * (1.0 + self.alpha) + self.alpha * self.feedback_uses;
        mean_retx * self.ps * (overhead + uses_per_symbol) + self.ps * (overhead + initial_uses)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    #[serde(rename = "undetected")]
    UndetectedError,
    Dropped,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::UndetectedError => "undetected",
            Outcome::Dropped => "dropped",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "success" => Ok(Outcome::Success),
            "undetected" => Ok(Outcome::UndetectedError),
            "dropped" => Ok(Outcome::Dropped),
            _ => Err(Error::Parse(format!("unknown outcome `{s}`"))),
        }
    }
}

pub fn classify_outcome(result: &DecodeResult, codeword: &[GfSymbol]) -> Outcome {
    match (result.valid, result.hard_decision == codeword) {
        (true, true) => Outcome::Success,
        (true, false) => Outcome::UndetectedError,
        (false, _) => Outcome::Dropped,
    }
}

/// `(2 * 1[success] - 1) - E_tot / normalizer`.
pub fn reward(outcome: Outcome, e_tot: f64, normalizer: f64) -> f64 {
    let hit = if outcome == Outcome::Success { 1.0 } else { -1.0 };
    hit - e_tot / normalizer
}

/// Everything an episode needs apart from the policy and the seed.
#[derive(Clone, Debug)]
pub struct EpisodeConfig {
    pub code: Arc<MotherCode>,
    pub modulation: ModulationSpec,
    pub channel: ChannelSpec,
    /// Energy model; its feedback size is replaced by the policy's.
    pub energy: EnergyModel,
    pub t_max: usize,
    pub bp_iters: usize,
    /// Reward normalizer in mJ.
    pub normalizer: f64,
}

impl EpisodeConfig {
    pub fn uses_per_symbol(&self) -> usize {
        self.modulation
            .uses_per_symbol(self.code.field().bits())
            .expect("modulation validated at construction")
    }

    pub fn validate(&self) -> Result<()> {
        self.modulation.uses_per_symbol(self.code.field().bits())?;
        if self.t_max == 0 {
            return Err(Error::invalid("T_max must be at least 1"));
        }
        if !(self.normalizer > 0.0) {
            return Err(Error::invalid("reward normalizer must be positive"));
        }
        Ok(())
    }

    /// Energy model with the feedback size of `policy`.
    pub fn energy_for(&self, policy: &Policy) -> EnergyModel {
        let field = self.code.field();
        let lf = policy.feedback_symbols(self.code.len(), field.bits());
        self.energy
            .with_feedback_uses((lf * self.uses_per_symbol()) as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    /// Requested symbols `L_t` (`L0` in the initial round).
    pub action: usize,
    pub pattern: PuncturePattern,
    /// Entropy vector after decoding this round.
    pub entropy: Vec<f64>,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeTrace {
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
    pub outcome: Outcome,
    /// Initial transmission plus retransmissions.
    pub t_rounds: usize,
    pub e_tot: f64,
    /// Delivered bits per mJ.
    pub e_b: f64,
    pub latency_ms: f64,
    pub reward: f64,
}

impl EpisodeTrace {
    pub fn retransmissions(&self) -> usize {
        self.t_rounds - 1
    }

    pub fn summary(&self) -> EpisodeSummary {
        EpisodeSummary {
            seed: self.seed,
            outcome: self.outcome,
            t_rounds: self.t_rounds,
            e_tot: self.e_tot,
            e_b: self.e_b,
            latency_ms: self.latency_ms,
            reward: self.reward,
            symbols_sent: self.rounds.iter().map(|r| r.action).sum(),
        }
    }
}

/// Per-episode scalars, without the round records.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub outcome: Outcome,
    pub t_rounds: usize,
    pub e_tot: f64,
    pub e_b: f64,
    pub latency_ms: f64,
    pub reward: f64,
    pub symbols_sent: usize,
}

impl EpisodeSummary {
    pub fn retransmissions(&self) -> usize {
        self.t_rounds - 1
    }
}

/// Noisy observation of the `L0` candidate symbols of one round. The channel
/// stream depends only on `(seed, round)`, so every policy sees the same
/// noise on a given episode.
fn observe_round(
    cfg: &EpisodeConfig,
    symbols: &[GfSymbol],
    pattern: &PuncturePattern,
    seed: u64,
    round: usize,
) -> Result<crate::prob::ProbMatrix> {
    let bits = cfg.code.field().bits();
    let uses = cfg.uses_per_symbol();
    let x = map_symbols(symbols, &cfg.modulation, bits)?;
    let mut ch = rng::stream(seed, &[domain::CHANNEL, round as u64]);
    let (y, beta) = apply_channel(&x, &cfg.channel, &mut ch);
    let kept: Vec<_> = pattern
        .indices()
        .flat_map(|i| y[i * uses..(i + 1) * uses].iter().copied())
        .collect();
    demodulate(&kept, beta, cfg.channel.noise_var(), &cfg.modulation, bits)
}

/// Result of [`run_episode`]: the trace and one experience per decision.
#[derive(Clone, Debug)]
pub struct EpisodeRun {
    pub trace: EpisodeTrace,
    pub experiences: Vec<Experience>,
}

/// Plays one message through at most `T_max` rounds.
pub fn run_episode(cfg: &EpisodeConfig, policy: &Policy, seed: u64) -> Result<EpisodeRun> {
    let code = cfg.code.as_ref();
    let field = code.field();
    let l0 = code.len();
    let uses = cfg.uses_per_symbol() as f64;
    let energy = cfg.energy_for(policy);
    let opts = DecoderOptions::new(cfg.bp_iters);

    let mut msg_rng = rng::stream(seed, &[domain::MESSAGE]);
    let bits: Vec<bool> = (0..code.message_bits()).map(|_| msg_rng.random()).collect();
    let codeword = code.encode(&bits)?;
    let mut policy_rng = rng::stream(seed, &[domain::POLICY]);
    let mut decoder = BpDecoder::new(code);

    let full = PuncturePattern::all_ones(l0);
    let mut state = IntrinsicState::from_probs(observe_round(cfg, &codeword, &full, seed, 0)?);
    let mut result = decoder.decode(state.probs(), opts)?;
    let mut rounds = vec![RoundRecord {
        round: 0,
        action: l0,
        pattern: full,
        entropy: result.entropy.clone(),
        energy: energy.round_energy(l0 as f64 * uses),
    }];
    let mut experiences = Vec::new();

    while !result.valid && rounds.len() < cfg.t_max {
        let t = rounds.len();
        let decision = policy.decide(&result.entropy, t, &mut policy_rng);
        let ext = MrExtension::new(field, l0, seed, t);
        let symbols = mr_symbols(field, &codeword, &ext)?;
        let like = observe_round(cfg, &symbols, &decision.pattern, seed, t)?;
        state.combine(field, &like, &ext, &decision.pattern)?;
        let next = decoder.decode(state.probs(), opts)?;
        experiences.push(Experience {
            state: std::mem::take(&mut result.entropy),
            action: decision.count,
            reward: 0.0,
            next_state: next.entropy.clone(),
            terminal: false,
        });
        rounds.push(RoundRecord {
            round: t,
            action: decision.count,
            pattern: decision.pattern,
            entropy: next.entropy.clone(),
            energy: energy.round_energy(decision.count as f64 * uses),
        });
        result = next;
    }

    let outcome = classify_outcome(&result, &codeword);
    let e_tot: f64 = rounds.iter().map(|r| r.energy).sum();
    let r = reward(outcome, e_tot, cfg.normalizer);
    if let Some(last) = experiences.last_mut() {
        last.reward = r;
        last.terminal = true;
    }
    let t_rounds = rounds.len();
    let e_b = match outcome {
        Outcome::Success => code.message_bits() as f64 / e_tot,
        _ => 0.0,
    };
    Ok(EpisodeRun {
        trace: EpisodeTrace {
            seed,
            rounds,
            outcome,
            t_rounds,
            e_tot,
            e_b,
            latency_ms: t_rounds as f64 * energy.slot_ms,
            reward: r,
        },
        experiences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::GaloisField;
    use crate::phy::ChannelKind;

    fn table_model() -> EnergyModel {
        EnergyModel::new(0.04, 0.1, 1.0, 2.0, 1.0).unwrap()
    }

    pub(crate) fn config(snr_db: f64, kind: ChannelKind) -> EpisodeConfig {
        let field = GaloisField::new(256).unwrap();
        let code = MotherCode::construct(1, 15, 5, field).unwrap();
        let energy = EnergyModel::new(derive_ps(0.6, 15, 1), 0.1, 1.0, 2.0, 1.0).unwrap();
        EpisodeConfig {
            code: Arc::new(code),
            modulation: ModulationSpec::qam256(),
            channel: ChannelSpec { kind, snr_db },
            normalizer: energy.naive_normalizer(7.7, 15.0, 1.0),
            energy,
            t_max: 15,
            bp_iters: 5,
        }
    }

    #[test]
    fn ps_derivation() {
        assert!((derive_ps(0.6, 15, 1) - 0.04).abs() < 1e-15);
        assert!((derive_ps(0.6, 15, 4) - 0.01).abs() < 1e-15);
        let m = EnergyModel::new(derive_ps(0.6, 15, 1), 0.0, 0.0, 2.0, 1.0).unwrap();
        assert!((m.round_energy(15.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn round_energy_examples() {
        let m = table_model();
        assert!((m.round_energy(5.0) - 0.252).abs() < 1e-12 * 0.252);
        let no_rx = EnergyModel { alpha: 0.0, ..m };
        assert_eq!(no_rx.round_energy(5.0), 0.04 * 6.0);
        let first = EnergyModel { preamble_uses: 0.0, ..m };
        assert!((first.round_energy(15.0) - 0.608).abs() < 1e-12);
    }

    #[test]
    fn normalizer_examples() {
        let m = table_model();
        let n = m.naive_normalizer(7.7, 15.0, 1.0);
        assert!((n - 1.3604).abs() < 1e-12 * 1.3604, "{n}");
        let bare = EnergyModel::new(0.04, 0.0, 0.0, 5.0, 1.0).unwrap();
        assert_eq!(bare.naive_normalizer(0.0, 15.0, 1.0), 0.04 * 15.0);
    }

    #[test]
    fn reward_examples() {
        assert_eq!(reward(Outcome::Success, 1.3604, 1.3604), 0.0);
        assert_eq!(reward(Outcome::Dropped, 1.3604, 1.3604), -2.0);
        assert_eq!(reward(Outcome::UndetectedError, 1.3604, 1.3604), -2.0);
        assert!(reward(Outcome::Success, 1e-12, 1.3604) < 1.0);
        assert!((reward(Outcome::Success, 1e-12, 1.3604) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_energy_parameters() {
        assert!(EnergyModel::new(0.0, 0.1, 1.0, 2.0, 1.0).is_err());
        assert!(EnergyModel::new(0.04, 1.5, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn high_snr_succeeds_immediately() {
        let cfg = config(30.0, ChannelKind::Awgn);
        for seed in 0..50 {
            let run = run_episode(&cfg, &Policy::Naive, seed).unwrap();
            assert_eq!(run.trace.outcome, Outcome::Success);
            assert_eq!(run.trace.t_rounds, 1);
            assert!(run.experiences.is_empty());
            assert_eq!(run.trace.latency_ms, 1.0);
            assert!((run.trace.e_b - 40.0 / run.trace.e_tot).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_feedback_is_dropped() {
        let cfg = config(-5.0, ChannelKind::Awgn);
        let policy = Policy::Fixed(PuncturePattern::zeros(15));
        let run = run_episode(&cfg, &policy, 7).unwrap();
        assert_eq!(run.trace.outcome, Outcome::Dropped);
        assert_eq!(run.trace.t_rounds, 15);
        let first = &run.trace.rounds[0].entropy;
        for r in &run.trace.rounds {
            assert_eq!(&r.entropy, first);
        }
        assert_eq!(run.trace.e_b, 0.0);
        assert_eq!(run.experiences.len(), 14);
        assert!(run.experiences.last().unwrap().terminal);
    }

    #[test]
    fn trace_invariants_at_operating_point() {
        let cfg = config(6.0, ChannelKind::Awgn);
        let policies = [Policy::Naive, Policy::Harq { l_static: 8 }, Policy::Ta { threshold: 5.39 }];
        for p in &policies {
            let energy = cfg.energy_for(p);
            for seed in 0..40 {
                let EpisodeRun { trace, experiences } = run_episode(&cfg, p, seed).unwrap();
                let sum: f64 = trace.rounds.iter().map(|r| r.energy).sum();
                assert_eq!(trace.e_tot, sum);
                for r in &trace.rounds {
                    let want = energy.round_energy(r.action as f64);
                    assert_eq!(r.energy, want);
                    assert_eq!(r.action, r.pattern.count());
                }
                assert!(trace.t_rounds >= 1 && trace.t_rounds <= cfg.t_max);
                assert_eq!(trace.latency_ms, trace.t_rounds as f64);
                assert_eq!(experiences.len(), trace.t_rounds - 1);
                for (k, e) in experiences.iter().enumerate() {
                    let last = k + 1 == experiences.len();
                    assert_eq!(e.terminal, last);
                    if !last {
                        assert_eq!(e.reward, 0.0);
                    }
                    assert_eq!(e.state, trace.rounds[k].entropy);
                    assert_eq!(e.next_state, trace.rounds[k + 1].entropy);
                }
                if trace.outcome != Outcome::Success {
                    assert_eq!(trace.e_b, 0.0);
                }
                // worst case: every round at full length
                let e_max = cfg.t_max as f64 * energy.round_energy(15.0);
                assert!(trace.reward < 1.0 && trace.reward > -1.0 - e_max / cfg.normalizer);
            }
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let cfg = config(6.0, ChannelKind::Rayleigh);
        let p = Policy::Harq { l_static: 3 };
        for seed in [1, 99, 12345] {
            let a = run_episode(&cfg, &p, seed).unwrap().trace;
            let b = run_episode(&cfg, &p, seed).unwrap().trace;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn outcome_classification() {
        let code = crate::ldpc::example::code();
        let c = crate::ldpc::example::symbols(&crate::ldpc::example::CODEWORD);
        let mk = |word: Vec<GfSymbol>| DecodeResult {
            valid: code.is_codeword(&word),
            posterior: crate::prob::ProbMatrix::uniform(10, 2),
            entropy: vec![0.0; 10],
            iterations_used: 0,
            hard_decision: word,
        };
        assert_eq!(classify_outcome(&mk(c.clone()), &c), Outcome::Success);
        let bad = crate::ldpc::example::symbols(&[0, 1, 1, 0, 1, 1, 1, 0, 0, 0]);
        assert_eq!(classify_outcome(&mk(bad), &c), Outcome::Dropped);
        assert_eq!(classify_outcome(&mk(vec![GfSymbol(0); 10]), &c), Outcome::UndetectedError);
    }
}
