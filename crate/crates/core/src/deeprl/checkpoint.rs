use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{Dense, QNetwork};
use crate::error::{Error, Result};

const FORMAT: &str = "raf-qnetwork";
const VERSION: u32 = 1;

/// JSON dump of a Q-network plus training metadata. Floats are written in
/// shortest round-trip form, so save/load is lossless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub widths: Vec<usize>,
    pub gamma_dqn: f64,
    pub episodes: u64,
    pub seed: u64,
    /// Validation objective of this snapshot, if measured.
    pub objective: Option<f64>,
    pub layers: Vec<Dense>,
}

impl Checkpoint {
    pub fn new(net: &QNetwork, gamma_dqn: f64, episodes: u64, seed: u64, objective: Option<f64>) -> Self {
        Checkpoint {
            format: FORMAT.into(),
            version: VERSION,
            widths: net.widths(),
            gamma_dqn,
            episodes,
            seed,
            objective,
            layers: net.layers().to_vec(),
        }
    }

    pub fn network(&self) -> Result<QNetwork> {
        let net = QNetwork::from_layers(self.layers.clone())?;
        if net.widths() != self.widths {
            return Err(Error::Checkpoint(format!(
                "declared widths {:?} do not match layers {:?}",
                self.widths,
                net.widths()
            )));
        }
        Ok(net)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ck.format != FORMAT {
            return Err(Error::Checkpoint(format!("unexpected format tag `{}`", ck.format)));
        }
        if ck.version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", ck.version)));
        }
        ck.network()?;
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
