//! Soft actor-critic with twin Q networks and automatic temperature.

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::buffer::ReplayBatch;
use crate::error::{Error, Result};
use crate::nn::gaussian::{squashed_grad, squashed_sample, SquashedSample};
use crate::nn::{polyak_update, ActionMode, Activation, Adam, GaussianPolicy, InitScheme, NetConfig, QNet};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SacConfig {
    pub learning_rate: f64,
    pub buffer_size: usize,
    pub learning_starts: usize,
    pub batch_size: usize,
    pub tau: f64,
    pub gamma: f64,
    pub train_freq: usize,
    pub gradient_steps: usize,
    /// Tune the temperature toward `target_entropy`; otherwise keep `alpha_init`.
    pub auto_alpha: bool,
    pub alpha_init: f64,
    /// Defaults to minus the action dimension.
    pub target_entropy: Option<f64>,
    pub log_std_init: f64,
    pub normalize_observations: bool,
    pub total_steps: u64,
    pub seed: u64,
    pub net: NetConfig,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            buffer_size: 200_000,
            learning_starts: 100,
            batch_size: 256,
            tau: 0.005,
            gamma: 0.99,
            train_freq: 1,
            gradient_steps: 1,
            auto_alpha: true,
            alpha_init: 1.0,
            target_entropy: None,
            log_std_init: 0.0,
            normalize_observations: false,
            total_steps: 1_000_000,
            seed: 0,
            net: NetConfig {
                hidden: vec![256, 256],
                activation: Activation::Relu,
            },
        }
    }
}

impl SacConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(format!("sac: {m}")));
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if self.batch_size == 0 || self.buffer_size < self.batch_size {
            return bad("buffer_size must be at least batch_size > 0");
        }
        if !(self.learning_rate > 0.0) || !(self.alpha_init > 0.0) || self.train_freq == 0 {
            return bad("learning_rate, alpha_init and train_freq must be positive");
        }
        if self.net.hidden.iter().any(|&h| h == 0) {
            return bad("hidden widths must be positive");
        }
        Ok(())
    }
}

fn stack<T: Real>(obs: ArrayView2<T>, act: ArrayView2<T>) -> Array2<T> {
    concatenate(Axis(1), &[obs, act]).expect("row counts match")
}

fn squashed_rows<T: Real>(policy: &GaussianPolicy<T>, obs: ArrayView2<T>, noise: ArrayView2<T>) -> Result<(Array2<T>, Vec<SquashedSample<T>>)> {
    let mean = policy.forward(obs)?.output;
    let ls = policy.log_std();
    let mut actions = Array2::zeros(noise.raw_dim());
    let mut samples = Vec::with_capacity(noise.nrows());
    for r in 0..noise.nrows() {
        let s = squashed_sample(&mean.row(r).to_vec(), ls, &noise.row(r).to_vec());
        actions.row_mut(r).assign(&ndarray::ArrayView1::from(&s.action));
        samples.push(s);
    }
    Ok((actions, samples))
}

/// Soft Bellman targets `y = r + gamma (1 - done) (min Q_target(s', a') - alpha log pi(a'|s'))`
/// with `a' = tanh(mean(s') + std * next_noise)`.
#[allow(clippy::too_many_arguments)]
pub fn critic_targets<T: Real>(
    policy: &GaussianPolicy<T>,
    q1_target: &QNet<T>,
    q2_target: &QNet<T>,
    batch: &ReplayBatch<T>,
    next_noise: ArrayView2<T>,
    alpha: T,
    gamma: T,
) -> Result<Vec<T>> {
    let (next_act, samples) = squashed_rows(policy, batch.next_observations.view(), next_noise)?;
    let x = stack(batch.next_observations.view(), next_act.view());
    let t1 = q1_target.forward(x.view())?.output;
    let t2 = q2_target.forward(x.view())?.output;
    Ok((0..batch.rewards.len())
        .map(|i| {
            let soft = t1[[i, 0]].min(t2[[i, 0]]) - alpha * samples[i].log_prob;
            let live = if batch.dones[i] { T::zero() } else { T::one() };
            batch.rewards[i] + gamma * live * soft
        })
        .collect())
}

/// `0.5 * (mean((Q1 - y)^2) + mean((Q2 - y)^2))`, gradients accumulated into `g1`, `g2`.
pub fn critic_loss<T: Real>(
    q1: &QNet<T>,
    q2: &QNet<T>,
    batch: &ReplayBatch<T>,
    targets: &[T],
    g1: &mut [T],
    g2: &mut [T],
) -> Result<T> {
    let n = targets.len();
    let inv_n = T::one() / T::from_usize_lossy(n.max(1));
    let x = stack(batch.observations.view(), batch.actions.view());
    let mut loss = T::zero();
    for (q, g) in [(q1, g1), (q2, g2)] {
        let tape = q.forward(x.view())?;
        let mut dy = Array2::zeros((n, 1));
        for i in 0..n {
            let diff = tape.output[[i, 0]] - targets[i];
            loss = loss + T::lit(0.5) * diff * diff * inv_n;
            dy[[i, 0]] = diff * inv_n;
        }
        q.backward(&tape, dy.view(), g);
    }
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss("sac critic"));
    }
    Ok(loss)
}

/// `mean(alpha log pi(a~|s) - min(Q1, Q2)(s, a~))` with reparameterized
/// `a~`; gradient with respect to the policy accumulated into `grad_policy`.
/// Returns the loss and the per-row log densities.
pub fn actor_loss<T: Real>(
    policy: &GaussianPolicy<T>,
    q1: &QNet<T>,
    q2: &QNet<T>,
    obs: ArrayView2<T>,
    noise: ArrayView2<T>,
    alpha: T,
    grad_policy: &mut [T],
) -> Result<(T, Vec<T>)> {
    let n = obs.nrows();
    let d = policy.act_dim();
    let inv_n = T::one() / T::from_usize_lossy(n.max(1));
    let tape = policy.forward(obs)?;
    let ls = policy.log_std().to_vec();
    let mut samples = Vec::with_capacity(n);
    let mut act = Array2::zeros((n, d));
    for r in 0..n {
        let s = squashed_sample(&tape.output.row(r).to_vec(), &ls, &noise.row(r).to_vec());
        act.row_mut(r).assign(&ndarray::ArrayView1::from(&s.action));
        samples.push(s);
    }
    let x = stack(obs, act.view());
    let t1 = q1.forward(x.view())?;
    let t2 = q2.forward(x.view())?;
    let mut dy1 = Array2::zeros((n, 1));
    let mut dy2 = Array2::zeros((n, 1));
    let mut loss = T::zero();
    for i in 0..n {
        let (a, b) = (t1.output[[i, 0]], t2.output[[i, 0]]);
        if a <= b {
            dy1[[i, 0]] = -inv_n;
        } else {
            dy2[[i, 0]] = -inv_n;
        }
        loss = loss + (alpha * samples[i].log_prob - a.min(b)) * inv_n;
    }
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss("sac actor"));
    }
    // Q parameter gradients are discarded; only d/d action is needed.
    let mut scratch = vec![T::zero(); q1.params.len().max(q2.params.len())];
    let dx1 = q1.backward(&t1, dy1.view(), &mut scratch);
    let dx2 = q2.backward(&t2, dy2.view(), &mut scratch);
    let o = obs.ncols();
    let mut d_mean = Array2::zeros((n, d));
    let mlp_len = policy.mlp_len();
    let mut d_ls = vec![T::zero(); d];
    for i in 0..n {
        let da: Vec<T> = (0..d).map(|c| dx1[[i, o + c]] + dx2[[i, o + c]]).collect();
        let mut dm = vec![T::zero(); d];
        squashed_grad(&samples[i], &ls, &noise.row(i).to_vec(), &da, alpha * inv_n, &mut dm, &mut d_ls);
        for c in 0..d {
            d_mean[[i, c]] = dm[c];
        }
    }
    policy.layout.backward(&policy.params, &tape, d_mean.view(), &mut grad_policy[..mlp_len]);
    for (g, v) in grad_policy[mlp_len..].iter_mut().zip(d_ls) {
        *g = *g + v;
    }
    Ok((loss, samples.into_iter().map(|s| s.log_prob).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SacStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub alpha: f64,
    pub entropy: f64,
}

/// Policy, twin critics with targets, temperature and optimizers.
#[derive(Debug, Clone)]
pub struct SacAgent<T> {
    pub policy: GaussianPolicy<T>,
    pub q1: QNet<T>,
    pub q2: QNet<T>,
    pub q1_target: QNet<T>,
    pub q2_target: QNet<T>,
    pub log_alpha: T,
    pub target_entropy: T,
    pub opt_policy: Adam<T>,
    pub opt_q1: Adam<T>,
    pub opt_q2: Adam<T>,
    pub opt_alpha: Adam<T>,
    pub cfg: SacConfig,
}

impl<T: Real> SacAgent<T> {
    pub fn new(obs_dim: usize, limits: &[(T, T)], cfg: &SacConfig) -> Self {
        let act_dim = limits.len();
        let s = cfg.seed.wrapping_mul(4);
        let policy = GaussianPolicy::new(
            obs_dim,
            limits,
            &cfg.net,
            ActionMode::Squash,
            T::lit(cfg.log_std_init),
            InitScheme::UniformFanIn,
            s.wrapping_add(21),
        );
        let q1 = QNet::q(obs_dim, act_dim, &cfg.net, InitScheme::UniformFanIn, s.wrapping_add(22));
        let q2 = QNet::q(obs_dim, act_dim, &cfg.net, InitScheme::UniformFanIn, s.wrapping_add(23));
        let lr = T::lit(cfg.learning_rate);
        Self {
            opt_policy: Adam::new(policy.params.len(), lr, T::zero()),
            opt_q1: Adam::new(q1.params.len(), lr, T::zero()),
            opt_q2: Adam::new(q2.params.len(), lr, T::zero()),
            opt_alpha: Adam::new(1, lr, T::zero()),
            q1_target: q1.clone(),
            q2_target: q2.clone(),
            policy,
            q1,
            q2,
            log_alpha: T::lit(cfg.alpha_init.ln()),
            target_entropy: T::lit(cfg.target_entropy.unwrap_or(-(act_dim as f64))),
            cfg: cfg.clone(),
        }
    }

    pub fn alpha(&self) -> T {
        self.log_alpha.exp()
    }

    fn noise(&self, rows: usize, rng: &mut impl Rng) -> Array2<T> {
        Array2::from_shape_simple_fn((rows, self.policy.act_dim()), || T::lit(rng.sample::<f64, _>(StandardNormal)))
    }

    /// One gradient step on temperature, critics and actor, then a Polyak
    /// step on the target critics.
    pub fn update(&mut self, batch: &ReplayBatch<T>, rng: &mut impl Rng) -> Result<SacStats> {
        let n = batch.rewards.len();
        let noise = self.noise(n, rng);
        let next_noise = self.noise(n, rng);
        let alpha = self.alpha();

        if self.cfg.auto_alpha {
            let (_, samples) = squashed_rows(&self.policy, batch.observations.view(), noise.view())?;
            let mean_lp = samples.iter().fold(T::zero(), |a, s| a + s.log_prob) / T::from_usize_lossy(n);
            let mut p = [self.log_alpha];
            self.opt_alpha.step(&mut p, &[-(mean_lp + self.target_entropy)]);
            self.log_alpha = p[0];
        }

        let gamma = T::lit(self.cfg.gamma);
        let targets = critic_targets(&self.policy, &self.q1_target, &self.q2_target, batch, next_noise.view(), alpha, gamma)?;
        let mut g1 = vec![T::zero(); self.q1.params.len()];
        let mut g2 = vec![T::zero(); self.q2.params.len()];
        let closs = critic_loss(&self.q1, &self.q2, batch, &targets, &mut g1, &mut g2)?;
        self.opt_q1.step(&mut self.q1.params, &g1);
        self.opt_q2.step(&mut self.q2.params, &g2);

        let mut gp = vec![T::zero(); self.policy.params.len()];
        let (aloss, lps) = actor_loss(&self.policy, &self.q1, &self.q2, batch.observations.view(), noise.view(), alpha, &mut gp)?;
        self.opt_policy.step(&mut self.policy.params, &gp);

        let tau = T::lit(self.cfg.tau);
        polyak_update(&mut self.q1_target.params, &self.q1.params, tau);
        polyak_update(&mut self.q2_target.params, &self.q2.params, tau);

        let entropy = -lps.iter().fold(0.0, |a, l| a + l.as_f64()) / n as f64;
        Ok(SacStats {
            critic_loss: closs.as_f64(),
            actor_loss: aloss.as_f64(),
            alpha: alpha.as_f64(),
            entropy,
        })
    }
}
