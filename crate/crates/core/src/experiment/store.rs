use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{EpisodeSummary, Outcome};

/// One episode in the trace export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub episode_id: u64,
    pub seed: u64,
    pub policy: String,
    pub alpha: f64,
    pub lp: f64,
    pub outcome: Outcome,
    pub t_rounds: usize,
    pub e_tot_mj: f64,
    pub eb: f64,
    pub latency_ms: f64,
    pub reward: f64,
}

impl TraceRow {
    pub fn new(episode_id: u64, policy: &str, alpha: f64, lp: f64, s: &EpisodeSummary) -> Self {
        TraceRow {
            episode_id,
            seed: s.seed,
            policy: policy.into(),
            alpha,
            lp,
            outcome: s.outcome,
            t_rounds: s.t_rounds,
            e_tot_mj: s.e_tot,
            eb: s.e_b,
            latency_ms: s.latency_ms,
            reward: s.reward,
        }
    }
}

pub fn write_csv_to<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn read_csv_from<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(Error::from)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(rows, f)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(f)
}
