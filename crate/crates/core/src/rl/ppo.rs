//! Clipped-surrogate policy optimization.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::buffer::{RolloutBatch, RolloutBuffer};
use crate::error::{Error, Result};
use crate::nn::{clip_grad_norm, ActionMode, Adam, GaussianPolicy, InitScheme, NetConfig, ValueNet};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    pub learning_rate: f64,
    pub n_steps: usize,
    pub batch_size: usize,
    pub n_epochs: usize,
    pub gamma: f64,
    pub clip_ratio: f64,
    pub gae_lambda: f64,
    pub log_std_init: f64,
    pub ortho_init: bool,
    pub weight_decay: f64,
    pub vf_coef: f64,
    pub ent_coef: f64,
    pub max_grad_norm: f64,
    pub normalize_advantage: bool,
    pub normalize_observations: bool,
    pub total_steps: u64,
    pub seed: u64,
    pub net: NetConfig,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            n_steps: 2048,
            batch_size: 64,
            n_epochs: 10,
            gamma: 0.99,
            clip_ratio: 0.2,
            gae_lambda: 0.95,
            log_std_init: 0.0,
            ortho_init: true,
            weight_decay: 0.0,
            vf_coef: 0.5,
            ent_coef: 0.0,
            max_grad_norm: 0.5,
            normalize_advantage: true,
            normalize_observations: false,
            total_steps: 1_000_000,
            seed: 0,
            net: NetConfig::default(),
        }
    }
}

impl PpoConfig {
    /// Highest-scoring row of the bundled hyperparameter sweep.
    pub fn sweep_best() -> Self {
        Self {
            learning_rate: 1e-5,
            n_steps: 1024,
            batch_size: 128,
            n_epochs: 10,
            gamma: 0.9,
            log_std_init: -2.0,
            ortho_init: false,
            weight_decay: 1e-5,
            ..Self::default()
        }
    }

    pub fn init_scheme(&self) -> InitScheme {
        if self.ortho_init {
            InitScheme::Orthogonal
        } else {
            InitScheme::UniformFanIn
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(format!("ppo: {m}")));
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gamma and gae_lambda must lie in [0, 1]");
        }
        if self.n_steps == 0 || self.batch_size == 0 || self.n_epochs == 0 {
            return bad("n_steps, batch_size and n_epochs must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.clip_ratio > 0.0) || !(self.max_grad_norm > 0.0) {
            return bad("learning_rate, clip_ratio and max_grad_norm must be positive");
        }
        if self.weight_decay < 0.0 || self.net.hidden.iter().any(|&h| h == 0) {
            return bad("weight_decay must be non-negative and hidden widths positive");
        }
        Ok(())
    }
}

/// Per-sample clipped surrogate `min(rho * A, clip(rho, 1 - eps, 1 + eps) * A)`.
pub fn clipped_objective<T: Real>(ratio: T, advantage: T, clip: T) -> T {
    let clipped = ratio.max(T::one() - clip).min(T::one() + clip);
    (ratio * advantage).min(clipped * advantage)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PpoStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub total_loss: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

/// Loss on one minibatch and its gradients, accumulated into `grad_policy`
/// and `grad_value`.
///
/// `total = -mean(clipped surrogate) + vf_coef * mean((V - R)^2) - ent_coef * H`.
/// Advantages are used as given.
pub fn ppo_loss<T: Real>(
    policy: &GaussianPolicy<T>,
    value: &ValueNet<T>,
    batch: &RolloutBatch<T>,
    cfg: &PpoConfig,
    grad_policy: &mut [T],
    grad_value: &mut [T],
) -> Result<PpoStats> {
    let n = batch.log_probs.len();
    let inv_n = T::one() / T::from_usize_lossy(n.max(1));
    let clip = T::lit(cfg.clip_ratio);
    let log_probs = policy.log_prob_batch(batch.observations.view(), batch.actions.view(), None, grad_policy)?;
    let mut weights = vec![T::zero(); n];
    let mut surrogate = T::zero();
    let mut clipped = 0usize;
    let mut kl = T::zero();
    for i in 0..n {
        let log_ratio = log_probs[i] - batch.log_probs[i];
        let ratio = log_ratio.exp();
        let adv = batch.advantages[i];
        let obj = clipped_objective(ratio, adv, clip);
        surrogate = surrogate + obj;
        // d(-obj/n)/d log pi, nonzero only on the unclipped branch
        if ratio * adv <= obj {
            weights[i] = -adv * ratio * inv_n;
        }
        if (ratio - T::one()).abs() > clip {
            clipped += 1;
        }
        kl = kl + (ratio - T::one()) - log_ratio;
    }
    policy.log_prob_batch(batch.observations.view(), batch.actions.view(), Some(&weights), grad_policy)?;
    let entropy = policy.entropy();
    let ent_coef = T::lit(cfg.ent_coef);
    let mlp_len = policy.mlp_len();
    for g in grad_policy[mlp_len..].iter_mut() {
        *g = *g - ent_coef;
    }

    let tape = value.forward(batch.observations.view())?;
    let mut dv = Array2::zeros((n, 1));
    let mut value_loss = T::zero();
    let vf = T::lit(cfg.vf_coef);
    for i in 0..n {
        let diff = tape.output[[i, 0]] - batch.returns[i];
        value_loss = value_loss + diff * diff;
        dv[[i, 0]] = vf * T::lit(2.0) * diff * inv_n;
    }
    value.backward(&tape, dv.view(), grad_value);
    let value_loss = value_loss * inv_n;
    let policy_loss = -surrogate * inv_n;
    let total = policy_loss + vf * value_loss - ent_coef * entropy;
    if !total.is_finite() {
        return Err(Error::NonFiniteLoss("ppo"));
    }
    Ok(PpoStats {
        policy_loss: policy_loss.as_f64(),
        value_loss: value_loss.as_f64(),
        entropy: entropy.as_f64(),
        total_loss: total.as_f64(),
        clip_fraction: clipped as f64 / n.max(1) as f64,
        approx_kl: (kl * inv_n).as_f64(),
    })
}

/// Policy, value network and their optimizers.
#[derive(Debug, Clone)]
pub struct PpoAgent<T> {
    pub policy: GaussianPolicy<T>,
    pub value: ValueNet<T>,
    pub opt_policy: Adam<T>,
    pub opt_value: Adam<T>,
    pub cfg: PpoConfig,
}

impl<T: Real> PpoAgent<T> {
    pub fn new(obs_dim: usize, limits: &[(T, T)], cfg: &PpoConfig) -> Self {
        let scheme = cfg.init_scheme();
        let policy = GaussianPolicy::new(
            obs_dim,
            limits,
            &cfg.net,
            ActionMode::Clamp,
            T::lit(cfg.log_std_init),
            scheme,
            cfg.seed.wrapping_mul(2).wrapping_add(11),
        );
        let value = ValueNet::value(obs_dim, &cfg.net, scheme, cfg.seed.wrapping_mul(2).wrapping_add(12));
        let lr = T::lit(cfg.learning_rate);
        let wd = T::lit(cfg.weight_decay);
        Self {
            opt_policy: Adam::new(policy.params.len(), lr, wd),
            opt_value: Adam::new(value.params.len(), lr, wd),
            policy,
            value,
            cfg: cfg.clone(),
        }
    }

    pub fn value_of(&self, obs: &[T]) -> Result<T> {
        self.value.eval1(obs)
    }

    /// `n_epochs` passes of shuffled minibatches over a finished buffer.
    /// Returns the stats averaged over minibatches.
    pub fn update(&mut self, buffer: &RolloutBuffer<T>, rng: &mut impl Rng) -> Result<PpoStats> {
        let mut gp = vec![T::zero(); self.policy.params.len()];
        let mut gv = vec![T::zero(); self.value.params.len()];
        let mut acc = PpoStats::default();
        let mut count = 0.0;
        for _ in 0..self.cfg.n_epochs {
            for idx in buffer.minibatches(self.cfg.batch_size, rng) {
                let mut batch = buffer.gather(&idx);
                if self.cfg.normalize_advantage && batch.advantages.len() > 1 {
                    normalize(&mut batch.advantages);
                }
                gp.iter_mut().for_each(|g| *g = T::zero());
                gv.iter_mut().for_each(|g| *g = T::zero());
                let s = ppo_loss(&self.policy, &self.value, &batch, &self.cfg, &mut gp, &mut gv)?;
                clip_grad_norm(&mut [&mut gp[..], &mut gv[..]], T::lit(self.cfg.max_grad_norm));
                self.opt_policy.step(&mut self.policy.params, &gp);
                self.opt_value.step(&mut self.value.params, &gv);
                acc.policy_loss += s.policy_loss;
                acc.value_loss += s.value_loss;
                acc.entropy += s.entropy;
                acc.total_loss += s.total_loss;
                acc.clip_fraction += s.clip_fraction;
                acc.approx_kl += s.approx_kl;
                count += 1.0;
            }
        }
        if count > 0.0 {
            for v in [
                &mut acc.policy_loss,
                &mut acc.value_loss,
                &mut acc.entropy,
                &mut acc.total_loss,
                &mut acc.clip_fraction,
                &mut acc.approx_kl,
            ] {
                *v /= count;
            }
        }
        Ok(acc)
    }
}

/// Standardizes in place (population std, epsilon 1e-8).
pub fn normalize<T: Real>(x: &mut [T]) {
    let n = T::from_usize_lossy(x.len());
    let mean = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let var = x.iter().fold(T::zero(), |a, &v| a + (v - mean) * (v - mean)) / n;
    let std = var.sqrt() + T::lit(1e-8);
    x.iter_mut().for_each(|v| *v = (*v - mean) / std);
}

/// Convenience view for value predictions over a whole rollout.
pub fn values_of<T: Real>(value: &ValueNet<T>, obs: ArrayView2<T>) -> Result<Vec<T>> {
    Ok(value.forward(obs)?.output.column(0).to_vec())
}
