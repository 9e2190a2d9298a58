use std::sync::Arc;

use fingermimic::config::ExperimentConfig;
use fingermimic::env::{EnvSpec, InitMode};
use fingermimic::hand::{clamp_to_limits, forward_kinematics};

fn spec() -> EnvSpec<f64> {
    ExperimentConfig::default().env_spec().unwrap()
}

#[test]
fn observation_layout() {
    let spec = spec();
    assert_eq!(spec.observation_len(), 46);
    assert_eq!(spec.action_len(), 15);
    let mut env = spec.build().unwrap();
    let obs = env.reset(0);
    assert_eq!(obs.len(), 46);
    let state = env.state();
    assert_eq!(&obs[..15], &state.q[..]);
    assert_eq!(&obs[15..30], &state.qdot[..]);
    let tips: Vec<f64> = forward_kinematics(&spec.topology, &state.q).concat();
    assert_eq!(&obs[30..45], &tips[..]);
    assert_eq!(obs[45], 0.0);
}

#[test]
fn reference_state_init_samples_the_motion() {
    let mut spec = spec();
    spec.episode.init_mode = InitMode::ReferenceState;
    let mut env = spec.build().unwrap();
    for seed in 0..10 {
        env.reset(seed);
        let (q, v, phase) = spec.motion.sample(env.reference_time());
        assert_eq!(env.state().q, clamp_to_limits(&spec.topology, &q).0);
        assert_eq!(env.state().qdot, v);
        assert_eq!(*env.observe().last().unwrap(), phase.value());
    }
}

#[test]
fn episodes_end_after_configured_steps() {
    let mut spec = spec();
    spec.episode.episode_steps = 7;
    let mut env = spec.build().unwrap();
    env.reset(0);
    let action = vec![1.0; 15];
    for k in 1..=7 {
        let t = env.step(&action).unwrap();
        assert_eq!(t.done, k == 7);
        assert!(t.reward > 0.0 && t.reward <= 1.0);
    }
}

#[test]
fn wrong_action_length_rejected() {
    let mut env = spec().build().unwrap();
    assert!(env.step(&[1.0; 3]).is_err());
}

#[test]
fn rollouts_are_deterministic() {
    let spec = spec();
    let run = || {
        let mut env = spec.build().unwrap();
        env.reset(3);
        (0..40)
            .map(|k| {
                let a: Vec<f64> = (0..15).map(|j| ((j + k) % 5) as f64 * 0.4).collect();
                env.step(&a).unwrap()
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn clones_share_the_reference() {
    let spec = spec();
    let env = spec.build().unwrap();
    assert!(Arc::ptr_eq(&env.spec().motion, &spec.motion));
}
