//! Checkpoint files.
//!
//! A checkpoint is a JSON object:
//!
//! ```text
//! {
//!   "format": "fingermimic-checkpoint",
//!   "version": 1,
//!   "scalar": "f64",            // element type of every params array
//!   "algo": "ppo" | "sac",
//!   "steps": 200000,            // environment steps consumed
//!   "policy": { "layout": {"sizes": [...], "activation": "tanh"},
//!               "params": [...],  // mean net, then log_std per action dim
//!               "mode": "clamp" | "squash", "low": [...], "high": [...] },
//!   "critics": [ { "layout": ..., "params": [...] }, ... ],
//!   "normalizer": { "enabled", "frozen", "clip", "mean", "var", "count" }
//! }
//! ```
//!
//! PPO stores its value network as the single critic; SAC stores Q1 and Q2.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::normalizer::ObsNormalizer;
use super::policy::{GaussianPolicy, Mlp};
use crate::error::{self, Error, Result};
use crate::scalar::Real;

pub const CHECKPOINT_FORMAT: &str = "fingermimic-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Checkpoint<T> {
    pub format: String,
    pub version: u32,
    pub scalar: String,
    pub algo: String,
    pub steps: u64,
    pub policy: GaussianPolicy<T>,
    pub critics: Vec<Mlp<T>>,
    pub normalizer: ObsNormalizer,
}

impl<T: Real> Checkpoint<T> {
    pub fn new(algo: &str, steps: u64, policy: GaussianPolicy<T>, critics: Vec<Mlp<T>>, normalizer: ObsNormalizer) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            scalar: T::NAME.to_string(),
            algo: algo.to_string(),
            steps,
            policy,
            critics,
            normalizer,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::parse("checkpoint", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Self = serde_json::from_str(text).map_err(|e| Error::parse("checkpoint", e))?;
        if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::parse(
                "checkpoint",
                format!("unsupported format {} v{}", ckpt.format, ckpt.version),
            ));
        }
        ckpt.policy.validate()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        error::write_string(path.as_ref(), &self.to_json()?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&error::read_to_string(path.as_ref())?)
    }
}
