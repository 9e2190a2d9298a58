//! The PPO hyperparameter grid and sweep driver (Bayesian, exhaustive or
//! random search).

use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ppo::PpoConfig;
use super::train::{train_ppo, TrainOptions};
use crate::analysis::SweepRecord;
use crate::bayesopt::{bayes_search_discrete, one_hot_embedding};
use crate::env::EnvSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Values explored per hyperparameter. The default is the published grid,
/// with `ortho_init` added as a two-level factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperGrid {
    pub batch_size: Vec<usize>,
    pub gamma: Vec<f64>,
    pub learning_rate: Vec<f64>,
    pub log_std_init: Vec<f64>,
    pub n_epochs: Vec<usize>,
    pub n_steps: Vec<usize>,
    pub ortho_init: Vec<bool>,
    pub weight_decay: Vec<f64>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        Self {
            batch_size: vec![128, 256, 512],
            gamma: vec![0.9, 0.95],
            learning_rate: vec![1e-6, 3e-6, 1e-5, 3e-5],
            log_std_init: vec![-3.0, -2.0, -1.0],
            n_epochs: vec![3, 5, 10],
            n_steps: vec![512, 1024, 4096],
            ortho_init: vec![false, true],
            weight_decay: vec![1e-5, 1e-4],
        }
    }
}

impl HyperGrid {
    pub fn levels(&self) -> [usize; 8] {
        [
            self.batch_size.len(),
            self.gamma.len(),
            self.learning_rate.len(),
            self.log_std_init.len(),
            self.n_epochs.len(),
            self.n_steps.len(),
            self.ortho_init.len(),
            self.weight_decay.len(),
        ]
    }

    pub fn len(&self) -> usize {
        self.levels().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidSpec("every grid axis needs at least one value".into()));
        }
        Ok(())
    }

    /// Mixed-radix digits of grid point `index`, last axis fastest.
    pub fn choice(&self, mut index: usize) -> [usize; 8] {
        let levels = self.levels();
        let mut c = [0; 8];
        for k in (0..8).rev() {
            c[k] = index % levels[k];
            index /= levels[k];
        }
        c
    }

    pub fn embedding(&self, index: usize) -> Vec<f64> {
        one_hot_embedding(&self.levels(), &self.choice(index))
    }

    /// `base` with the grid point's values substituted.
    pub fn config(&self, index: usize, base: &PpoConfig) -> PpoConfig {
        let c = self.choice(index);
        PpoConfig {
            batch_size: self.batch_size[c[0]],
            gamma: self.gamma[c[1]],
            learning_rate: self.learning_rate[c[2]],
            log_std_init: self.log_std_init[c[3]],
            n_epochs: self.n_epochs[c[4]],
            n_steps: self.n_steps[c[5]],
            ortho_init: self.ortho_init[c[6]],
            weight_decay: self.weight_decay[c[7]],
            ..base.clone()
        }
    }
}

pub fn sweep_record(cfg: &PpoConfig, mean_reward: f64) -> SweepRecord {
    SweepRecord {
        batch_size: cfg.batch_size,
        gamma: cfg.gamma,
        learning_rate: cfg.learning_rate,
        log_std_init: cfg.log_std_init,
        n_epochs: cfg.n_epochs,
        n_steps: cfg.n_steps,
        ortho_init: cfg.ortho_init,
        weight_decay: cfg.weight_decay,
        mean_reward,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// GP + expected improvement over the one-hot embedded grid.
    #[default]
    Bayes,
    /// Every grid point in index order (the budget is ignored).
    Grid,
    /// `budget` distinct points drawn uniformly.
    Random,
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bayes" => Ok(SweepMode::Bayes),
            "grid" => Ok(SweepMode::Grid),
            "random" => Ok(SweepMode::Random),
            other => Err(Error::InvalidSpec(format!("unknown sweep mode {other:?} (expected bayes, grid or random)"))),
        }
    }
}

/// Runs PPO on grid points chosen by `mode` and returns one record per run in
/// evaluation order. The record reward is the final deterministic
/// evaluation. `on_run` sees each record as it completes.
#[allow(clippy::too_many_arguments)]
pub fn run_sweep<T: Real>(
    spec: &EnvSpec<T>,
    grid: &HyperGrid,
    base: &PpoConfig,
    opts: &TrainOptions,
    mode: SweepMode,
    budget: usize,
    seed: u64,
    mut on_run: impl FnMut(usize, &SweepRecord),
) -> Result<Vec<SweepRecord>> {
    grid.validate()?;
    let mut records = Vec::new();
    let mut run = |index: usize| -> Result<f64> {
        let cfg = grid.config(index, base);
        let outcome = train_ppo(spec, &cfg, opts, &mut Vec::new())?;
        let rec = sweep_record(&cfg, outcome.final_eval);
        on_run(index, &rec);
        records.push(rec);
        Ok(outcome.final_eval)
    };
    match mode {
        SweepMode::Grid => {
            for i in 0..grid.len() {
                run(i)?;
            }
        }
        SweepMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in sample(&mut rng, grid.len(), budget.min(grid.len())) {
                run(i)?;
            }
        }
        SweepMode::Bayes => {
            let candidates: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.embedding(i)).collect();
            bayes_search_discrete(&candidates, budget, 5, seed, |i| run(i).map(|r| -r))?;
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_indexing_roundtrip() {
        let g = HyperGrid::default();
        assert_eq!(g.len(), 2592);
        let base = PpoConfig::default();
        let best = PpoConfig::sweep_best();
        let idx = (0..g.len())
            .find(|&i| {
                let c = g.config(i, &base);
                c.batch_size == best.batch_size
                    && c.gamma == best.gamma
                    && c.learning_rate == best.learning_rate
                    && c.log_std_init == best.log_std_init
                    && c.n_epochs == best.n_epochs
                    && c.n_steps == best.n_steps
                    && c.ortho_init == best.ortho_init
                    && c.weight_decay == best.weight_decay
            })
            .expect("best published config lies on the grid");
        assert_eq!(g.embedding(idx).iter().sum::<f64>(), 8.0);
        assert_eq!(g.choice(g.len() - 1), g.levels().map(|l| l - 1));
    }
}
