//! Experiment configuration (TOML). Unknown keys are rejected at every level.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bayesopt::TuneConfig;
use crate::dynamics::{PdGains, SimConfig};
use crate::env::{EnvSpec, EpisodeConfig};
use crate::error::{read_to_string, Error, Result};
use crate::hand::{build_default_hand, HandTopology};
use crate::motion::{load_motion_for, synth_motion, ReferenceMotion, SynthSpec};
use crate::reward::RewardSpec;
use crate::rl::{Algo, HyperGrid, PpoConfig, SacConfig, TrainOptions};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HandConfig {
    /// Topology TOML; the built-in five-finger hand when absent.
    pub topology: Option<PathBuf>,
    /// Keep only this finger (the reduced 3-joint hand).
    pub finger: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionConfig {
    /// Motion file; overrides `synth` when set.
    pub file: Option<PathBuf>,
    pub synth: SynthSpec,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            file: None,
            synth: SynthSpec::sinusoid(1.0, 0.5, 0.5, 2.0, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub algo: Algo,
    /// One training run per seed.
    pub seeds: Vec<u64>,
    /// Environment steps between evaluations; 0 evaluates at start and end only.
    pub eval_interval: u64,
    pub eval_steps: usize,
    pub log_interval: u64,
}

impl TrainConfig {
    pub fn options(&self) -> TrainOptions {
        TrainOptions {
            eval_interval: self.eval_interval,
            eval_steps: self.eval_steps,
            log_interval: self.log_interval,
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Ppo,
            seeds: vec![0],
            eval_interval: TrainOptions::default().eval_interval,
            eval_steps: TrainOptions::default().eval_steps,
            log_interval: TrainOptions::default().log_interval,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub budget: usize,
    pub grid: HyperGrid,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            budget: 46,
            grid: HyperGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub precision: Precision,
    /// Threads for multi-seed training and batched objective evaluation.
    pub workers: usize,
    pub hand: HandConfig,
    pub motion: MotionConfig,
    pub gains: PdGains<f64>,
    pub sim: SimConfig<f64>,
    pub reward: RewardSpec<f64>,
    pub episode: EpisodeConfig,
    pub train: TrainConfig,
    pub ppo: PpoConfig,
    pub sac: SacConfig,
    pub tune: TuneConfig,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            precision: Precision::F64,
            workers: 1,
            hand: HandConfig::default(),
            motion: MotionConfig::default(),
            gains: PdGains::reference_best(),
            sim: SimConfig::default(),
            reward: RewardSpec::default(),
            episode: EpisodeConfig::default(),
            train: TrainConfig::default(),
            ppo: PpoConfig::sweep_best(),
            sac: SacConfig::default(),
            tune: TuneConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::parse("config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_to_string(path)?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every section that can be checked without touching files.
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidSpec("workers must be at least 1".into()));
        }
        if self.train.seeds.is_empty() {
            return Err(Error::InvalidSpec("train.seeds must not be empty".into()));
        }
        if self.episode.episode_steps == 0 {
            return Err(Error::InvalidSpec("episode.episode_steps must be positive".into()));
        }
        self.gains.validate()?;
        self.sim.validate()?;
        self.reward.validate()?;
        self.ppo.validate()?;
        self.sac.validate()?;
        self.tune.validate()?;
        self.sweep.grid.validate()
    }

    pub fn topology<T: Real>(&self) -> Result<HandTopology<T>> {
        let topo = match &self.hand.topology {
            Some(p) => HandTopology::<f64>::load(p)?.cast(),
            None => build_default_hand(),
        };
        match &self.hand.finger {
            Some(name) => topo.single_finger(name),
            None => Ok(topo),
        }
    }

    pub fn reference_motion<T: Real>(&self, topology: &HandTopology<T>) -> Result<ReferenceMotion<T>> {
        match &self.motion.file {
            Some(p) => load_motion_for(p, topology),
            None => synth_motion(&self.motion.synth, topology),
        }
    }

    pub fn env_spec<T: Real>(&self) -> Result<EnvSpec<T>> {
        let topology = self.topology::<T>()?;
        let motion = self.reference_motion(&topology)?;
        let spec = EnvSpec {
            topology: Arc::new(topology),
            motion: Arc::new(motion),
            gains: self.gains.cast(),
            sim: self.sim.cast(),
            reward: self.reward.cast(),
            episode: self.episode,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_toml() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml_str("sed = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("[ppo]\nlr = 1.0").is_err());
        assert!(ExperimentConfig::from_toml_str("[train]\nalgo = \"sac\"\neval_steps = 200").is_ok());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(matches!(
            ExperimentConfig::from_toml_str("[gains]\nkp = -1.0\nkd = 0.5"),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn reduced_hand_spec() {
        let cfg = ExperimentConfig::from_toml_str("[hand]\nfinger = \"index\"").unwrap();
        let spec = cfg.env_spec::<f32>().unwrap();
        assert_eq!(spec.action_len(), 3);
    }
}
