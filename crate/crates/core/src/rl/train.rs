//! Rollout/update loops, learning curves and multi-seed runs.

use std::fmt::Write as _;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::buffer::{ReplayBatch, ReplayBuffer, RolloutBuffer};
use super::eval::evaluate;
use super::ppo::{PpoAgent, PpoConfig};
use super::sac::{SacAgent, SacConfig};
use crate::env::EnvSpec;
use crate::error::{Error, Result};
use crate::nn::{Checkpoint, GaussianPolicy, ObsNormalizer};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Ppo,
    Sac,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Ppo => "ppo",
            Algo::Sac => "sac",
        }
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ppo" => Ok(Algo::Ppo),
            "sac" => Ok(Algo::Sac),
            other => Err(Error::InvalidSpec(format!("unknown algorithm {other:?} (expected ppo or sac)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainOptions {
    /// Environment steps between deterministic evaluations; 0 evaluates only
    /// at the start and the end.
    pub eval_interval: u64,
    /// Length of each evaluation rollout.
    pub eval_steps: usize,
    /// Environment steps between SAC curve rows (PPO logs once per rollout).
    pub log_interval: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            eval_interval: 10_000,
            eval_steps: super::eval::EVAL_STEPS,
            log_interval: 1000,
        }
    }
}

/// One learning-curve row. `mean_reward` is the mean per-step training
/// reward since the previous row; `eval_reward` the cumulative reward of a
/// deterministic evaluation, when one ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub step: u64,
    pub mean_reward: Option<f64>,
    pub eval_reward: Option<f64>,
    pub policy_loss: Option<f64>,
    pub value_loss: Option<f64>,
    pub entropy: Option<f64>,
    pub alpha: Option<f64>,
}

impl CurveRow {
    fn at(step: u64) -> Self {
        Self {
            step,
            mean_reward: None,
            eval_reward: None,
            policy_loss: None,
            value_loss: None,
            entropy: None,
            alpha: None,
        }
    }
}

/// Serializes curve rows; empty cells for missing values.
pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("step,mean_reward,eval_reward,policy_loss,value_loss,entropy,alpha\n");
    let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.step,
            f(r.mean_reward),
            f(r.eval_reward),
            f(r.policy_loss),
            f(r.value_loss),
            f(r.entropy),
            f(r.alpha)
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub checkpoint: Checkpoint<T>,
    pub final_eval: f64,
    pub env_steps: u64,
}

struct EvalClock {
    interval: u64,
    next: u64,
}

impl EvalClock {
    fn new(interval: u64) -> Self {
        Self { interval, next: interval }
    }

    fn due(&mut self, step: u64) -> bool {
        if self.interval == 0 || step < self.next {
            return false;
        }
        while self.next <= step {
            self.next += self.interval;
        }
        true
    }
}

fn eval_now<T: Real>(policy: &GaussianPolicy<T>, norm: &ObsNormalizer, spec: &EnvSpec<T>, opts: &TrainOptions) -> Result<f64> {
    let mut frozen = norm.clone();
    frozen.frozen = true;
    Ok(evaluate(policy, &frozen, spec, opts.eval_steps)?.as_f64())
}

fn limits_of<T: Real>(spec: &EnvSpec<T>) -> Vec<(T, T)> {
    spec.topology.limits().collect()
}

/// PPO training. Rows are appended to `curve` as they are produced, so a
/// failed run still leaves its partial log.
pub fn train_ppo<T: Real>(spec: &EnvSpec<T>, cfg: &PpoConfig, opts: &TrainOptions, curve: &mut Vec<CurveRow>) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    let mut env = spec.build()?;
    let obs_dim = spec.observation_len();
    let mut agent = PpoAgent::new(obs_dim, &limits_of(spec), cfg);
    let mut norm = ObsNormalizer::new(obs_dim, cfg.normalize_observations);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut obs = env.reset(rng.next_u64());
    let gamma = T::lit(cfg.gamma);

    let mut row = CurveRow::at(0);
    row.eval_reward = Some(eval_now(&agent.policy, &norm, spec, opts)?);
    curve.push(row);

    let mut clock = EvalClock::new(opts.eval_interval);
    let mut buffer = RolloutBuffer::new(obs_dim, spec.action_len());
    let mut steps = 0u64;
    while steps < cfg.total_steps {
        buffer.clear();
        let mut reward_sum = 0.0;
        for _ in 0..cfg.n_steps {
            norm.update(&obs);
            let o = norm.normalize(&obs);
            let sample = agent.policy.sample(&o, &mut rng)?;
            let v = agent.value_of(&o)?;
            let tr = env.step(&sample.target)?;
            reward_sum += tr.reward.as_f64();
            let mut reward = tr.reward;
            if tr.done {
                // time-limit truncation: bootstrap from the final state
                reward = reward + gamma * agent.value_of(&norm.normalize(&tr.observation))?;
                obs = env.reset(rng.next_u64());
            } else {
                obs = tr.observation;
            }
            buffer.push(&o, &sample.action, reward, sample.log_prob, v, tr.done);
        }
        steps += cfg.n_steps as u64;
        let last = agent.value_of(&norm.normalize(&obs))?;
        buffer.finish(last, gamma, T::lit(cfg.gae_lambda));
        let stats = agent.update(&buffer, &mut rng)?;

        let mut row = CurveRow::at(steps);
        row.mean_reward = Some(reward_sum / cfg.n_steps as f64);
        row.policy_loss = Some(stats.policy_loss);
        row.value_loss = Some(stats.value_loss);
        row.entropy = Some(stats.entropy);
        if clock.due(steps) || steps >= cfg.total_steps {
            row.eval_reward = Some(eval_now(&agent.policy, &norm, spec, opts)?);
        }
        log::debug!("ppo step {steps}: mean reward {:.4}", reward_sum / cfg.n_steps as f64);
        curve.push(row);
    }

    let final_eval = curve.last().and_then(|r| r.eval_reward).unwrap_or(f64::NAN);
    let mut frozen = norm;
    frozen.frozen = true;
    Ok(TrainOutcome {
        checkpoint: Checkpoint::new("ppo", steps, agent.policy, vec![agent.value], frozen),
        final_eval,
        env_steps: steps,
    })
}

fn normalize_rows<T: Real>(norm: &ObsNormalizer, x: &mut Array2<T>) {
    if !norm.enabled {
        return;
    }
    for mut row in x.rows_mut() {
        let z = norm.normalize(&row.to_vec());
        row.iter_mut().zip(z).for_each(|(d, v)| *d = v);
    }
}

/// SAC training; see [`train_ppo`] for how `curve` is filled.
pub fn train_sac<T: Real>(spec: &EnvSpec<T>, cfg: &SacConfig, opts: &TrainOptions, curve: &mut Vec<CurveRow>) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    let mut env = spec.build()?;
    let obs_dim = spec.observation_len();
    let act_dim = spec.action_len();
    let mut agent = SacAgent::new(obs_dim, &limits_of(spec), cfg);
    let mut norm = ObsNormalizer::new(obs_dim, cfg.normalize_observations);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut replay = ReplayBuffer::new(cfg.buffer_size, obs_dim, act_dim);
    let mut obs = env.reset(rng.next_u64());

    let mut row = CurveRow::at(0);
    row.eval_reward = Some(eval_now(&agent.policy, &norm, spec, opts)?);
    curve.push(row);

    let mut clock = EvalClock::new(opts.eval_interval);
    let log_every = opts.log_interval.max(1);
    let (mut reward_sum, mut reward_n) = (0.0, 0u64);
    let mut last_stats = None;
    for step in 0..cfg.total_steps {
        norm.update(&obs);
        let action: Vec<T> = if (step as usize) < cfg.learning_starts {
            (0..act_dim).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect()
        } else {
            agent.policy.sample(&norm.normalize(&obs), &mut rng)?.action
        };
        let tr = env.step(&agent.policy.to_target(&action))?;
        reward_sum += tr.reward.as_f64();
        reward_n += 1;
        // episodes only end by time limit, so the stored transition never terminates
        replay.push(&obs, &action, tr.reward, &tr.observation, false);
        obs = if tr.done { env.reset(rng.next_u64()) } else { tr.observation };

        let done_steps = step + 1;
        if (step as usize) >= cfg.learning_starts && done_steps % cfg.train_freq as u64 == 0 {
            for _ in 0..cfg.gradient_steps {
                let mut batch: ReplayBatch<T> = replay.sample(cfg.batch_size, &mut rng);
                normalize_rows(&norm, &mut batch.observations);
                normalize_rows(&norm, &mut batch.next_observations);
                last_stats = Some(agent.update(&batch, &mut rng)?);
            }
        }

        let eval_due = clock.due(done_steps) || done_steps == cfg.total_steps;
        if done_steps % log_every == 0 || eval_due {
            let mut row = CurveRow::at(done_steps);
            row.mean_reward = Some(reward_sum / reward_n.max(1) as f64);
            if let Some(s) = last_stats {
                row.policy_loss = Some(s.actor_loss);
                row.value_loss = Some(s.critic_loss);
                row.entropy = Some(s.entropy);
                row.alpha = Some(s.alpha);
            }
            if eval_due {
                row.eval_reward = Some(eval_now(&agent.policy, &norm, spec, opts)?);
            }
            log::debug!("sac step {done_steps}: mean reward {:.4}", reward_sum / reward_n.max(1) as f64);
            curve.push(row);
            reward_sum = 0.0;
            reward_n = 0;
        }
    }

    let final_eval = curve.last().and_then(|r| r.eval_reward).unwrap_or(f64::NAN);
    let mut frozen = norm;
    frozen.frozen = true;
    Ok(TrainOutcome {
        checkpoint: Checkpoint::new(
            "sac",
            cfg.total_steps,
            agent.policy,
            vec![agent.q1, agent.q2],
            frozen,
        ),
        final_eval,
        env_steps: cfg.total_steps,
    })
}

/// Runs `job` once per seed on up to `workers` threads. Results come back in
/// seed order regardless of scheduling.
pub fn run_seeds<R, F>(seeds: &[u64], workers: usize, job: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync,
{
    let workers = workers.max(1).min(seeds.len().max(1));
    let mut out: Vec<Option<R>> = (0..seeds.len()).map(|_| None).collect();
    for (chunk_seeds, chunk_out) in seeds.chunks(workers).zip(out.chunks_mut(workers)) {
        std::thread::scope(|s| {
            let job = &job;
            let handles: Vec<_> = chunk_seeds.iter().map(|&seed| s.spawn(move || job(seed))).collect();
            for (slot, h) in chunk_out.iter_mut().zip(handles) {
                *slot = Some(h.join().expect("seed worker panicked"));
            }
        });
    }
    out.into_iter().map(|r| r.expect("every seed ran")).collect()
}
