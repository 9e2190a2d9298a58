use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::gaussian::{self, SquashedSample};
use super::init::{init_mlp, InitScheme};
use super::mlp::{Activation, MlpLayout, MlpTape};
use crate::error::{Error, Result};
use crate::scalar::{cast_vec, Real};

/// Hidden widths and activation shared by every network of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            hidden: vec![1024, 512],
            activation: Activation::Tanh,
        }
    }
}

impl NetConfig {
    pub fn small(width: usize) -> Self {
        Self {
            hidden: vec![width, width],
            activation: Activation::Tanh,
        }
    }

    fn layout(&self, input: usize, output: usize) -> MlpLayout {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(&self.hidden);
        sizes.push(output);
        MlpLayout::new(sizes, self.activation)
    }
}

/// How a raw policy output becomes a joint target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionMode {
    /// Gaussian sample used as the target directly, clamped to the limits
    /// downstream. The mean head's bias starts at the limit midpoint.
    #[default]
    Clamp,
    /// `tanh` squashed sample in `(-1, 1)`, mapped affinely onto the limits.
    Squash,
}

/// Plain MLP with its parameters. Used for value and Q networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp<T> {
    pub layout: MlpLayout,
    pub params: Vec<T>,
}

/// State-value network `V(s)`.
pub type ValueNet<T> = Mlp<T>;
/// Action-value network `Q(s, a)` taking the concatenation `[s, a]`.
pub type QNet<T> = Mlp<T>;

impl<T: Real> Mlp<T> {
    pub fn new(layout: MlpLayout, scheme: InitScheme, output_gain: f64, seed: u64) -> Self {
        let params = init_mlp(&layout, scheme, 2f64.sqrt(), output_gain, seed);
        Self { layout, params }
    }

    pub fn value(obs_dim: usize, cfg: &NetConfig, scheme: InitScheme, seed: u64) -> Self {
        Self::new(cfg.layout(obs_dim, 1), scheme, 1.0, seed)
    }

    pub fn q(obs_dim: usize, act_dim: usize, cfg: &NetConfig, scheme: InitScheme, seed: u64) -> Self {
        Self::new(cfg.layout(obs_dim + act_dim, 1), scheme, 1.0, seed)
    }

    pub fn forward(&self, x: ArrayView2<T>) -> Result<MlpTape<T>> {
        self.layout.forward(&self.params, x)
    }

    /// Scalar output for one input.
    pub fn eval1(&self, x: &[T]) -> Result<T> {
        Ok(self.layout.forward_one(&self.params, x)?[0])
    }

    pub fn backward(&self, tape: &MlpTape<T>, dy: ArrayView2<T>, grads: &mut [T]) -> Array2<T> {
        self.layout.backward(&self.params, tape, dy, grads)
    }

    pub fn cast<U: Real>(&self) -> Mlp<U> {
        Mlp {
            layout: self.layout.clone(),
            params: cast_vec(&self.params),
        }
    }
}

/// Diagonal Gaussian policy with a state-independent `log_std`.
///
/// `params` holds the mean network followed by one `log_std` per action
/// dimension. The mean is unconstrained; limits are applied by
/// [`GaussianPolicy::to_target`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPolicy<T> {
    pub layout: MlpLayout,
    pub params: Vec<T>,
    pub mode: ActionMode,
    pub low: Vec<T>,
    pub high: Vec<T>,
}

/// One stochastic action: `action` is what gets stored and scored, `target`
/// what the environment receives.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySample<T> {
    pub action: Vec<T>,
    pub target: Vec<T>,
    pub log_prob: T,
}

impl<T: Real> GaussianPolicy<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        obs_dim: usize,
        limits: &[(T, T)],
        cfg: &NetConfig,
        mode: ActionMode,
        log_std_init: T,
        scheme: InitScheme,
        seed: u64,
    ) -> Self {
        let act_dim = limits.len();
        let layout = cfg.layout(obs_dim, act_dim);
        let mut params = init_mlp(&layout, scheme, 2f64.sqrt(), 0.01, seed);
        if mode == ActionMode::Clamp {
            let last = layout.layer_count() - 1;
            let (i, o) = layout.layer_shape(last);
            let off = layout.layer_offset(last) + i * o;
            for (b, &(lo, hi)) in params[off..off + o].iter_mut().zip(limits) {
                *b = *b + T::lit(0.5) * (lo + hi);
            }
        }
        params.extend(std::iter::repeat_n(log_std_init, act_dim));
        Self {
            layout,
            params,
            mode,
            low: limits.iter().map(|l| l.0).collect(),
            high: limits.iter().map(|l| l.1).collect(),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.layout.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.layout.output_dim()
    }

    /// Length of the mean-network prefix of `params`.
    pub fn mlp_len(&self) -> usize {
        self.layout.param_count()
    }

    pub fn log_std(&self) -> &[T] {
        &self.params[self.mlp_len()..]
    }

    pub fn entropy(&self) -> T {
        gaussian::entropy(self.log_std())
    }

    pub fn mean(&self, obs: &[T]) -> Result<Vec<T>> {
        self.layout.forward_one(&self.params, obs)
    }

    pub fn forward(&self, obs: ArrayView2<T>) -> Result<MlpTape<T>> {
        self.layout.forward(&self.params, obs)
    }

    /// Maps a stored action onto joint targets within the limits.
    pub fn to_target(&self, action: &[T]) -> Vec<T> {
        let half = T::lit(0.5);
        action
            .iter()
            .enumerate()
            .map(|(i, &a)| match self.mode {
                ActionMode::Clamp => a.max(self.low[i]).min(self.high[i]),
                ActionMode::Squash => self.low[i] + (a + T::one()) * half * (self.high[i] - self.low[i]),
            })
            .collect()
    }

    /// Mean action (squashed in [`ActionMode::Squash`]) and its target.
    pub fn deterministic(&self, obs: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let mut a = self.mean(obs)?;
        if self.mode == ActionMode::Squash {
            a.iter_mut().for_each(|v| *v = v.tanh());
        }
        let target = self.to_target(&a);
        Ok((a, target))
    }

    /// Draws a standard-normal noise vector.
    pub fn noise(&self, rng: &mut impl Rng) -> Vec<T> {
        (0..self.act_dim()).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect()
    }

    /// Action for a given mean and noise under the policy's mode.
    pub fn sample_with(&self, mean: &[T], noise: &[T]) -> (PolicySample<T>, Option<SquashedSample<T>>) {
        let ls = self.log_std();
        match self.mode {
            ActionMode::Clamp => {
                let action: Vec<T> = (0..mean.len()).map(|i| mean[i] + ls[i].exp() * noise[i]).collect();
                let log_prob = gaussian::log_prob(mean, ls, &action);
                let target = self.to_target(&action);
                (PolicySample { action, target, log_prob }, None)
            }
            ActionMode::Squash => {
                let s = gaussian::squashed_sample(mean, ls, noise);
                let target = self.to_target(&s.action);
                (
                    PolicySample {
                        action: s.action.clone(),
                        target,
                        log_prob: s.log_prob,
                    },
                    Some(s),
                )
            }
        }
    }

    pub fn sample(&self, obs: &[T], rng: &mut impl Rng) -> Result<PolicySample<T>> {
        let mean = self.mean(obs)?;
        let noise = self.noise(rng);
        Ok(self.sample_with(&mean, &noise).0)
    }

    /// Log density of a stored action.
    pub fn log_prob(&self, mean: &[T], action: &[T]) -> T {
        match self.mode {
            ActionMode::Clamp => gaussian::log_prob(mean, self.log_std(), action),
            ActionMode::Squash => gaussian::squashed_log_prob(mean, self.log_std(), action),
        }
    }

    /// Log densities of stored `actions` row by row. With `weights`, also
    /// accumulates `sum_i w_i * d log pi(a_i | s_i) / d params` into `grads`.
    pub fn log_prob_batch(
        &self,
        obs: ArrayView2<T>,
        actions: ArrayView2<T>,
        weights: Option<&[T]>,
        grads: &mut [T],
    ) -> Result<Vec<T>> {
        let tape = self.forward(obs)?;
        let (rows, d) = (actions.nrows(), actions.ncols());
        if rows != obs.nrows() || d != self.act_dim() {
            return Err(Error::Shape(format!(
                "actions are {rows}x{d}, expected {}x{}",
                obs.nrows(),
                self.act_dim()
            )));
        }
        let lim = T::one() - T::lit(1e-6);
        let ls = self.log_std().to_vec();
        let mut out = Vec::with_capacity(rows);
        let mut d_mean = Array2::zeros((rows, d));
        let mut d_ls = vec![T::zero(); d];
        for r in 0..rows {
            let mean = tape.output.row(r).to_vec();
            let a = actions.row(r).to_vec();
            out.push(self.log_prob(&mean, &a));
            if let Some(w) = weights {
                let u: Vec<T> = match self.mode {
                    ActionMode::Clamp => a,
                    ActionMode::Squash => a.iter().map(|v| v.max(-lim).min(lim).atanh()).collect(),
                };
                let mut dm = vec![T::zero(); d];
                gaussian::log_prob_grad(&mean, &ls, &u, w[r], &mut dm, &mut d_ls);
                for c in 0..d {
                    d_mean[[r, c]] = dm[c];
                }
            }
        }
        if weights.is_some() {
            let n = self.mlp_len();
            self.layout.backward(&self.params, &tape, d_mean.view(), &mut grads[..n]);
            for (g, v) in grads[n..].iter_mut().zip(d_ls) {
                *g = *g + v;
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.len() != self.mlp_len() + self.act_dim() {
            return Err(Error::Shape(format!(
                "policy has {} parameters, layout needs {}",
                self.params.len(),
                self.mlp_len() + self.act_dim()
            )));
        }
        if self.low.len() != self.act_dim() || self.high.len() != self.act_dim() {
            return Err(Error::Shape("action limits do not match the action dimension".into()));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteLoss("policy parameters"));
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> GaussianPolicy<U> {
        GaussianPolicy {
            layout: self.layout.clone(),
            params: cast_vec(&self.params),
            mode: self.mode,
            low: cast_vec(&self.low),
            high: cast_vec(&self.high),
        }
    }
}
