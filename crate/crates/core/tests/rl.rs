use fingermimic::config::ExperimentConfig;
use fingermimic::env::EnvSpec;
use fingermimic::nn::{ActionMode, GaussianPolicy, InitScheme, NetConfig, ObsNormalizer};
use fingermimic::rl::{
    discounted_return, evaluate, gae_advantages, random_baseline, retarget_baseline, train_ppo, train_sac, PpoConfig,
    SacConfig, TrainOptions,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reduced_spec() -> EnvSpec<f64> {
    let mut cfg = ExperimentConfig::default();
    cfg.hand.finger = Some("index".into());
    cfg.episode.episode_steps = 50;
    cfg.env_spec().unwrap()
}

#[test]
fn three_unit_rewards() {
    assert_eq!(discounted_return(&[1.0f64, 1.0, 1.0], 0.9)[0], 2.71);
}

#[test]
fn gae_lambda_one_is_discounted_return_minus_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.random_range(1..40);
        let gamma = rng.random_range(0.5..1.0);
        let rewards: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut dones = vec![false; n];
        dones[n - 1] = true;
        let (adv, ret) = gae_advantages(&rewards, &values, &dones, 123.0, gamma, 1.0);
        let g = discounted_return(&rewards, gamma);
        for t in 0..n {
            assert!((adv[t] - (g[t] - values[t])).abs() < 1e-10);
            assert!((ret[t] - g[t]).abs() < 1e-10);
        }
    }
}

proptest! {
    #[test]
    fn gae_lambda_zero_is_td_error(
        rewards in prop::collection::vec(-1.0..1.0f64, 1..30),
        seed in any::<u64>(),
        gamma in 0.0..1.0f64,
    ) {
        let n = rewards.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let dones: Vec<bool> = (0..n).map(|_| rng.random_bool(0.2)).collect();
        let last = rng.random_range(-2.0..2.0);
        let (adv, _) = gae_advantages(&rewards, &values, &dones, last, gamma, 0.0);
        for t in 0..n {
            let next = if dones[t] { 0.0 } else if t + 1 < n { values[t + 1] } else { last };
            prop_assert!((adv[t] - (rewards[t] + gamma * next - values[t])).abs() < 1e-12);
        }
    }

    #[test]
    fn gae_bootstraps_from_last_value(rewards in prop::collection::vec(-1.0..1.0f64, 1..30), gamma in 0.0..1.0f64, last in -5.0..5.0f64) {
        // no episode boundary, lambda = 1: A_0 = sum gamma^k r_k + gamma^n V_last - V_0
        let n = rewards.len();
        let values = vec![0.5; n];
        let (adv, _) = gae_advantages(&rewards, &values, &vec![false; n], last, gamma, 1.0);
        let expected = discounted_return(&rewards, gamma)[0] + gamma.powi(n as i32) * last - 0.5;
        prop_assert!((adv[0] - expected).abs() < 1e-10);
    }
}

fn small_ppo() -> PpoConfig {
    PpoConfig {
        n_steps: 64,
        batch_size: 32,
        n_epochs: 2,
        total_steps: 128,
        seed: 5,
        net: NetConfig::small(16),
        ..PpoConfig::sweep_best()
    }
}

fn quick_opts() -> TrainOptions {
    TrainOptions {
        eval_interval: 0,
        eval_steps: 20,
        log_interval: 50,
    }
}

#[test]
fn ppo_training_is_deterministic() {
    let spec = reduced_spec();
    let run = || {
        let mut curve = Vec::new();
        let out = train_ppo(&spec, &small_ppo(), &quick_opts(), &mut curve).unwrap();
        (out.checkpoint.policy.params, curve)
    };
    let (p1, c1) = run();
    let (p2, c2) = run();
    assert_eq!(p1, p2);
    assert_eq!(c1, c2);
    assert_eq!(c1.len(), 3);
    assert!(c1.last().unwrap().eval_reward.is_some());
}

#[test]
fn sac_training_is_deterministic() {
    let spec = reduced_spec();
    let cfg = SacConfig {
        total_steps: 120,
        learning_starts: 40,
        batch_size: 16,
        seed: 9,
        net: NetConfig::small(16),
        ..SacConfig::default()
    };
    let run = || {
        let mut curve = Vec::new();
        let out = train_sac(&spec, &cfg, &quick_opts(), &mut curve).unwrap();
        (out.checkpoint.policy.params, out.checkpoint.critics, curve)
    };
    assert_eq!(run(), run());
}

#[test]
fn zero_step_training_still_evaluates() {
    let spec = reduced_spec();
    let cfg = PpoConfig {
        total_steps: 0,
        ..small_ppo()
    };
    let mut curve = Vec::new();
    let out = train_ppo(&spec, &cfg, &quick_opts(), &mut curve).unwrap();
    assert_eq!(out.env_steps, 0);
    assert_eq!(curve.len(), 1);
    assert_eq!(curve[0].step, 0);
}

#[test]
fn evaluation_bounds() {
    let spec = reduced_spec();
    let limits: Vec<(f64, f64)> = spec.topology.limits().collect();
    let policy = GaussianPolicy::new(
        spec.observation_len(),
        &limits,
        &NetConfig::small(16),
        ActionMode::Clamp,
        0.0,
        InitScheme::UniformFanIn,
        1,
    );
    let norm = ObsNormalizer::new(spec.observation_len(), false);
    assert_eq!(evaluate(&policy, &norm, &spec, 0).unwrap(), 0.0);
    for steps in [1, 10, 100] {
        let r = evaluate(&policy, &norm, &spec, steps).unwrap();
        assert!(r > 0.0 && r <= steps as f64);
    }
}

#[test]
fn retargeting_beats_random_targets() {
    let spec = reduced_spec();
    let retarget = retarget_baseline(&spec, 300).unwrap() / 300.0;
    let random = random_baseline(&spec, 300, 0).unwrap();
    assert!(retarget > random + 0.2, "retarget {retarget}, random {random}");
}
