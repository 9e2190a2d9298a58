//! Central finite-difference checks of every analytic gradient used in
//! training. Shared by the core integration tests and the acceptance suite.

#![allow(dead_code)]

use fingermimic::nn::{ActionMode, GaussianPolicy, InitScheme, Mlp, NetConfig};
use fingermimic::rl::sac::{actor_loss, critic_loss};
use fingermimic::rl::{ppo::ppo_loss, PpoConfig, ReplayBatch, RolloutBatch};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 1e-5;
pub const OBS: usize = 46;
pub const ACT: usize = 15;
pub const ROWS: usize = 4;
/// Random coordinates checked per parameter vector (plus every log_std).
pub const COORDS: usize = 24;

#[derive(Debug, Clone, Copy)]
pub struct GradReport {
    pub name: &'static str,
    pub draws: usize,
    pub max_rel_err: f64,
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-10)
}

/// Central differences of `f` at `x` along the coordinates `idx`.
pub fn fd<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], idx: &[usize]) -> Vec<f64> {
    let mut p = x.to_vec();
    idx.iter()
        .map(|&i| {
            p[i] = x[i] + H;
            let up = f(&p);
            p[i] = x[i] - H;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * H)
        })
        .collect()
}

fn coords(rng: &mut ChaCha8Rng, len: usize, tail: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..COORDS).map(|_| rng.random_range(0..len - tail)).collect();
    idx.extend(len - tail..len);
    idx
}

fn net() -> NetConfig {
    NetConfig {
        hidden: vec![64, 32],
        ..NetConfig::small(64)
    }
}

fn matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(lo..hi))
}

fn policy(rng: &mut ChaCha8Rng, mode: ActionMode) -> GaussianPolicy<f64> {
    let limits = vec![(0.0, 2.0); ACT];
    let mut p = GaussianPolicy::new(OBS, &limits, &net(), mode, 0.0, InitScheme::UniformFanIn, rng.random());
    let n = p.mlp_len();
    for v in p.params[n..].iter_mut() {
        *v = rng.random_range(-1.0..0.5);
    }
    p
}

fn pick(idx: &[usize], g: &[f64]) -> Vec<f64> {
    idx.iter().map(|&i| g[i]).collect()
}

fn log_prob_check(rng: &mut ChaCha8Rng, mode: ActionMode) -> f64 {
    let pol = policy(rng, mode);
    let obs = matrix(rng, ROWS, OBS, -2.0, 2.0);
    let actions = match mode {
        ActionMode::Clamp => matrix(rng, ROWS, ACT, -0.5, 2.5),
        ActionMode::Squash => matrix(rng, ROWS, ACT, -0.95, 0.95),
    };
    let w: Vec<f64> = (0..ROWS).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut g = vec![0.0; pol.params.len()];
    pol.log_prob_batch(obs.view(), actions.view(), Some(&w), &mut g).unwrap();
    let idx = coords(rng, pol.params.len(), ACT);
    let f = |p: &[f64]| {
        let mut q = pol.clone();
        q.params.copy_from_slice(p);
        let lp = q.log_prob_batch(obs.view(), actions.view(), None, &mut []).unwrap();
        lp.iter().zip(&w).map(|(a, b)| a * b).sum()
    };
    rel_err(&pick(&idx, &g), &fd(f, &pol.params, &idx))
}

fn entropy_check(rng: &mut ChaCha8Rng) -> f64 {
    let pol = policy(rng, ActionMode::Clamp);
    let n = pol.params.len();
    let idx = coords(rng, n, ACT);
    // H = sum(log_std) + const, so dH/dlog_std = 1 and the MLP weights do not enter
    let analytic: Vec<f64> = idx.iter().map(|&i| if i >= pol.mlp_len() { 1.0 } else { 0.0 }).collect();
    let f = |p: &[f64]| {
        let mut q = pol.clone();
        q.params.copy_from_slice(p);
        q.entropy()
    };
    rel_err(&analytic, &fd(f, &pol.params, &idx))
}

fn rollout_batch(rng: &mut ChaCha8Rng, pol: &GaussianPolicy<f64>) -> RolloutBatch<f64> {
    let observations = matrix(rng, ROWS, OBS, -2.0, 2.0);
    let actions = matrix(rng, ROWS, ACT, -0.5, 2.5);
    let current = pol.log_prob_batch(observations.view(), actions.view(), None, &mut []).unwrap();
    RolloutBatch {
        log_probs: current.iter().map(|lp| lp + rng.random_range(-0.3..0.3)).collect(),
        advantages: (0..ROWS).map(|_| rng.random_range(-2.0..2.0)).collect(),
        returns: (0..ROWS).map(|_| rng.random_range(-3.0..3.0)).collect(),
        observations,
        actions,
    }
}

fn ppo_cfg() -> PpoConfig {
    PpoConfig {
        ent_coef: 0.01,
        vf_coef: 0.5,
        ..PpoConfig::default()
    }
}

fn ppo_policy_check(rng: &mut ChaCha8Rng) -> f64 {
    let pol = policy(rng, ActionMode::Clamp);
    let value = Mlp::value(OBS, &net(), InitScheme::UniformFanIn, rng.random());
    let batch = rollout_batch(rng, &pol);
    let cfg = ppo_cfg();
    let mut gp = vec![0.0; pol.params.len()];
    let mut gv = vec![0.0; value.params.len()];
    ppo_loss(&pol, &value, &batch, &cfg, &mut gp, &mut gv).unwrap();
    let idx = coords(rng, pol.params.len(), ACT);
    let f = |p: &[f64]| {
        let mut q = pol.clone();
        q.params.copy_from_slice(p);
        let mut a = vec![0.0; p.len()];
        let mut b = vec![0.0; value.params.len()];
        let s = ppo_loss(&q, &value, &batch, &cfg, &mut a, &mut b).unwrap();
        s.policy_loss - cfg.ent_coef * s.entropy
    };
    rel_err(&pick(&idx, &gp), &fd(f, &pol.params, &idx))
}

fn value_loss_check(rng: &mut ChaCha8Rng) -> f64 {
    let pol = policy(rng, ActionMode::Clamp);
    let value = Mlp::value(OBS, &net(), InitScheme::UniformFanIn, rng.random());
    let batch = rollout_batch(rng, &pol);
    let cfg = ppo_cfg();
    let mut gp = vec![0.0; pol.params.len()];
    let mut gv = vec![0.0; value.params.len()];
    ppo_loss(&pol, &value, &batch, &cfg, &mut gp, &mut gv).unwrap();
    let idx = coords(rng, value.params.len(), 1);
    let f = |p: &[f64]| {
        let mut v = value.clone();
        v.params.copy_from_slice(p);
        let mut a = vec![0.0; pol.params.len()];
        let mut b = vec![0.0; p.len()];
        cfg.vf_coef * ppo_loss(&pol, &v, &batch, &cfg, &mut a, &mut b).unwrap().value_loss
    };
    rel_err(&pick(&idx, &gv), &fd(f, &value.params, &idx))
}

fn replay_batch(rng: &mut ChaCha8Rng) -> ReplayBatch<f64> {
    ReplayBatch {
        observations: matrix(rng, ROWS, OBS, -2.0, 2.0),
        actions: matrix(rng, ROWS, ACT, -0.95, 0.95),
        rewards: (0..ROWS).map(|_| rng.random_range(0.0..1.0)).collect(),
        next_observations: matrix(rng, ROWS, OBS, -2.0, 2.0),
        dones: vec![false; ROWS],
    }
}

fn critic_check(rng: &mut ChaCha8Rng) -> f64 {
    let q1 = Mlp::q(OBS, ACT, &net(), InitScheme::UniformFanIn, rng.random());
    let q2 = Mlp::q(OBS, ACT, &net(), InitScheme::UniformFanIn, rng.random());
    let batch = replay_batch(rng);
    let targets: Vec<f64> = (0..ROWS).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut g1 = vec![0.0; q1.params.len()];
    let mut g2 = vec![0.0; q2.params.len()];
    critic_loss(&q1, &q2, &batch, &targets, &mut g1, &mut g2).unwrap();
    let idx = coords(rng, q1.params.len(), 1);
    let f1 = |p: &[f64]| {
        let mut q = q1.clone();
        q.params.copy_from_slice(p);
        critic_loss(&q, &q2, &batch, &targets, &mut vec![0.0; p.len()], &mut vec![0.0; q2.params.len()]).unwrap()
    };
    let f2 = |p: &[f64]| {
        let mut q = q2.clone();
        q.params.copy_from_slice(p);
        critic_loss(&q1, &q, &batch, &targets, &mut vec![0.0; q1.params.len()], &mut vec![0.0; p.len()]).unwrap()
    };
    rel_err(&pick(&idx, &g1), &fd(f1, &q1.params, &idx)).max(rel_err(&pick(&idx, &g2), &fd(f2, &q2.params, &idx)))
}

fn actor_check(rng: &mut ChaCha8Rng) -> f64 {
    let pol = policy(rng, ActionMode::Squash);
    let q1 = Mlp::q(OBS, ACT, &net(), InitScheme::UniformFanIn, rng.random());
    let q2 = Mlp::q(OBS, ACT, &net(), InitScheme::UniformFanIn, rng.random());
    let obs = matrix(rng, ROWS, OBS, -2.0, 2.0);
    let noise = matrix(rng, ROWS, ACT, -1.5, 1.5);
    let alpha = rng.random_range(0.05..1.0);
    let mut g = vec![0.0; pol.params.len()];
    actor_loss(&pol, &q1, &q2, obs.view(), noise.view(), alpha, &mut g).unwrap();
    let idx = coords(rng, pol.params.len(), ACT);
    let f = |p: &[f64]| {
        let mut q = pol.clone();
        q.params.copy_from_slice(p);
        actor_loss(&q, &q1, &q2, obs.view(), noise.view(), alpha, &mut vec![0.0; p.len()]).unwrap().0
    };
    rel_err(&pick(&idx, &g), &fd(f, &pol.params, &idx))
}

/// Worst relative error per gradient over `draws` random parameter draws.
pub fn run(draws: usize, seed: u64) -> Vec<GradReport> {
    type Check = fn(&mut ChaCha8Rng) -> f64;
    let checks: [(&'static str, Check); 7] = [
        ("log-prob (clamped Gaussian)", |r| log_prob_check(r, ActionMode::Clamp)),
        ("log-prob (tanh-squashed)", |r| log_prob_check(r, ActionMode::Squash)),
        ("entropy", entropy_check),
        ("value loss", value_loss_check),
        ("PPO clipped loss", ppo_policy_check),
        ("SAC critic loss", critic_check),
        ("SAC actor loss", actor_check),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    checks
        .iter()
        .map(|&(name, check)| GradReport {
            name,
            draws,
            max_rel_err: (0..draws).map(|_| check(&mut rng)).fold(0.0, f64::max),
        })
        .collect()
}
