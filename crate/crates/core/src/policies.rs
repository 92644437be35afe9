//! Feedback policies: how many and which symbols to request in each round.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::deeprl::QNetwork;
use crate::error::{Error, Result};
use crate::ldpc::PuncturePattern;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Harq,
    Dharq,
    St,
    Ta,
    Raf,
    Naive,
}

impl PolicyKind {
    pub const BASELINES: [PolicyKind; 4] = [PolicyKind::Harq, PolicyKind::Dharq, PolicyKind::St, PolicyKind::Ta];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Harq => "harq",
            PolicyKind::Dharq => "dharq",
            PolicyKind::St => "st",
            PolicyKind::Ta => "ta",
            PolicyKind::Raf => "raf",
            PolicyKind::Naive => "naive",
        }
    }

    /// Feedback payload in code symbols.
    pub fn feedback_symbols(self, l0: usize, field_bits: u32) -> usize {
        match self {
            PolicyKind::Harq | PolicyKind::Dharq => 1,
            PolicyKind::St | PolicyKind::Ta | PolicyKind::Naive => 2,
            PolicyKind::Raf => l0.div_ceil(field_bits as usize),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "harq" => PolicyKind::Harq,
            "dharq" => PolicyKind::Dharq,
            "st" | "selective" => PolicyKind::St,
            "ta" | "threshold" => PolicyKind::Ta,
            "raf" => PolicyKind::Raf,
            "naive" | "f0" | "naivef0" => PolicyKind::Naive,
            _ => return Err(Error::Parse(format!("unknown policy `{s}`"))),
        })
    }
}

/// A configured policy.
#[derive(Clone, Debug)]
pub enum Policy {
    /// Tapered static count, uniformly random symbols.
    Harq { l_static: usize },
    /// Count of symbols above the threshold, uniformly random symbols.
    Dharq { threshold: f64 },
    /// Tapered static count, maximum-entropy symbols.
    St { l_static: usize },
    /// Every symbol above the threshold.
    Ta { threshold: f64 },
    /// Learned count, maximum-entropy symbols.
    Raf { agent: Arc<QNetwork>, epsilon: f64 },
    /// One maximum-entropy symbol per round.
    Naive,
    /// Same pattern every round; for diagnostics.
    Fixed(PuncturePattern),
}

/// Feedback chosen for one round.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    /// Number of requested symbols, also the learning action.
    pub count: usize,
    pub pattern: PuncturePattern,
}

impl Decision {
    fn from_pattern(pattern: PuncturePattern) -> Self {
        Decision {
            count: pattern.count(),
            pattern,
        }
    }
}

impl Policy {
    pub fn kind(&self) -> Option<PolicyKind> {
        Some(match self {
            Policy::Harq { .. } => PolicyKind::Harq,
            Policy::Dharq { .. } => PolicyKind::Dharq,
            Policy::St { .. } => PolicyKind::St,
            Policy::Ta { .. } => PolicyKind::Ta,
            Policy::Raf { .. } => PolicyKind::Raf,
            Policy::Naive => PolicyKind::Naive,
            Policy::Fixed(_) => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        self.kind().map_or("fixed", PolicyKind::name)
    }

    /// Human-readable parameter summary used in result tables.
    pub fn params(&self) -> String {
        match self {
            Policy::Harq { l_static } | Policy::St { l_static } => format!("L={l_static}"),
            Policy::Dharq { threshold } | Policy::Ta { threshold } => format!("H={threshold:.2}"),
            Policy::Raf { epsilon, .. } => format!("eps={epsilon}"),
            Policy::Naive => "L=1".into(),
            Policy::Fixed(p) => p.to_bit_string(),
        }
    }

    pub fn feedback_symbols(&self, l0: usize, field_bits: u32) -> usize {
        self.kind().map_or(2, |k| k.feedback_symbols(l0, field_bits))
    }

    pub fn validate(&self, l0: usize, field_bits: u32) -> Result<()> {
        let h_max = field_bits as f64;
        match self {
            Policy::Harq { l_static } | Policy::St { l_static } if !(1..=l0).contains(l_static) => {
                Err(Error::invalid(format!("L_static {l_static} outside 1..={l0}")))
            }
            Policy::Dharq { threshold } | Policy::Ta { threshold } if !(0.0..=h_max).contains(threshold) => {
                Err(Error::invalid(format!("threshold {threshold} outside [0, {h_max}]")))
            }
            Policy::Raf { agent, epsilon } => {
                if agent.input_dim() != l0 || agent.output_dim() != l0 {
                    return Err(Error::invalid(format!(
                        "agent shape {:?} does not match L0 = {l0}",
                        agent.widths()
                    )));
                }
                if !(0.0..=1.0).contains(epsilon) {
                    return Err(Error::invalid(format!("epsilon {epsilon} outside [0, 1]")));
                }
                Ok(())
            }
            Policy::Fixed(p) if p.len() != l0 => Err(Error::LengthMismatch { expected: l0, got: p.len() }),
            _ => Ok(()),
        }
    }

    /// Feedback for retransmission round `round >= 1` given the entropy
    /// vector after the previous round.
    pub fn decide<R: Rng + ?Sized>(&self, h: &[f64], round: usize, rng: &mut R) -> Decision {
        let l0 = h.len();
        match self {
            Policy::Harq { l_static } => {
                Decision::from_pattern(select_random(taper_schedule(*l_static, round), l0, rng))
            }
            Policy::Dharq { threshold } => {
                Decision::from_pattern(select_random(dharq_count(h, *threshold), l0, rng))
            }
            Policy::St { l_static } => {
                Decision::from_pattern(select_max_entropy(h, taper_schedule(*l_static, round)))
            }
            Policy::Ta { threshold } => Decision::from_pattern(ta_pattern(h, *threshold)),
            Policy::Raf { agent, epsilon } => {
                let count = raf_action(h, agent, *epsilon, rng);
                Decision::from_pattern(select_max_entropy(h, count))
            }
            Policy::Naive => Decision::from_pattern(select_max_entropy(h, 1)),
            Policy::Fixed(p) => Decision::from_pattern(p.clone()),
        }
    }
}

/// Retransmission size for round `t >= 1` under the tapered static schedule.
pub fn taper_schedule(l_static: usize, t: usize) -> usize {
    match (t, l_static) {
        (0 | 1, l) => l,
        (_, l) if l <= 2 => l,
        (_, l) if l <= 10 => 2,
        _ => 4,
    }
}

fn mask(len: usize, indices: impl Iterator<Item = usize>) -> PuncturePattern {
    let mut bits = vec![false; len];
    indices.for_each(|i| bits[i] = true);
    PuncturePattern::new(bits)
}

/// Uniformly random `count`-subset of `0..l0`.
pub fn select_random<R: Rng + ?Sized>(count: usize, l0: usize, rng: &mut R) -> PuncturePattern {
    let count = count.min(l0);
    mask(l0, index::sample(rng, l0, count).into_iter())
}

/// The `count` highest-entropy positions; ties go to the lowest index.
pub fn select_max_entropy(h: &[f64], count: usize) -> PuncturePattern {
    let mut order: Vec<usize> = (0..h.len()).collect();
    order.sort_by(|&a, &b| h[b].total_cmp(&h[a]));
    mask(h.len(), order.into_iter().take(count))
}

/// Number of symbols with entropy strictly above `threshold`, at least one.
pub fn dharq_count(h: &[f64], threshold: f64) -> usize {
    h.iter().filter(|&&x| x > threshold).count().max(1)
}

/// Every symbol above `threshold`, or the single most uncertain one if none is.
pub fn ta_pattern(h: &[f64], threshold: f64) -> PuncturePattern {
    let above: Vec<usize> = (0..h.len()).filter(|&i| h[i] > threshold).collect();
    if above.is_empty() {
        select_max_entropy(h, 1)
    } else {
        mask(h.len(), above.into_iter())
    }
}

/// Epsilon-greedy action in `1..=L0`.
pub fn raf_action<R: Rng + ?Sized>(h: &[f64], agent: &QNetwork, epsilon: f64, rng: &mut R) -> usize {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(1..=agent.output_dim())
    } else {
        agent.greedy(h) + 1
    }
}

/// Static-size grid `1..=l0`.
pub fn l_static_grid(l0: usize) -> Vec<usize> {
    (1..=l0).collect()
}

/// Threshold grid `start, start + step, ..., <= stop` on a decimal lattice.
pub fn threshold_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| ((start + i as f64 * step) * 1e6).round() / 1e6).collect()
}
