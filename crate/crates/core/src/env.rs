//! Imitation MDP: observation packing, action application, per-step reward.
//!
//! Observation layout: joint angles, joint velocities, fingertip positions
//! (x, y, z per finger, metres) and the motion phase; 46 values for the
//! default hand.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{step_tracking, HandState, PdGains, SimConfig};
use crate::error::{Error, Result};
use crate::hand::{clamp_to_limits, forward_kinematics, HandTopology, JointAngles};
use crate::motion::ReferenceMotion;
use crate::reward::{composite_reward, error_bundle, ErrorBundle, RewardSpec};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Start at the (clamped) first reference frame, at rest, phase 0.
    #[default]
    FixedZero,
    /// Start at a random phase of the reference, with its pose and velocity.
    ReferenceState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeConfig {
    pub episode_steps: usize,
    pub init_mode: InitMode,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            episode_steps: 2000,
            init_mode: InitMode::FixedZero,
        }
    }
}

/// `q`, `qdot`, fingertips and phase.
pub fn observation_len<T: Real>(topology: &HandTopology<T>) -> usize {
    2 * topology.joint_count() + 3 * topology.finger_count() + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub observation: Vec<T>,
    pub reward: T,
    pub done: bool,
    pub errors: ErrorBundle<T>,
}

/// Everything needed to build environments; cheap to clone and share.
#[derive(Debug, Clone)]
pub struct EnvSpec<T> {
    pub topology: Arc<HandTopology<T>>,
    pub motion: Arc<ReferenceMotion<T>>,
    pub gains: PdGains<T>,
    pub sim: SimConfig<T>,
    pub reward: RewardSpec<T>,
    pub episode: EpisodeConfig,
}

impl<T: Real> EnvSpec<T> {
    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        self.gains.validate()?;
        self.sim.validate()?;
        self.reward.validate()?;
        if self.episode.episode_steps == 0 {
            return Err(Error::InvalidSpec("episode_steps must be >= 1".into()));
        }
        if self.motion.joint_count() != self.topology.joint_count() {
            return Err(Error::Dimension {
                context: "motion joints vs topology",
                expected: self.topology.joint_count(),
                found: self.motion.joint_count(),
            });
        }
        Ok(())
    }

    pub fn build(&self) -> Result<ImitationEnv<T>> {
        self.validate()?;
        let mut env = ImitationEnv {
            spec: self.clone(),
            state: HandState::at_rest(vec![T::zero(); self.topology.joint_count()]),
            steps: 0,
            t0: T::zero(),
        };
        env.reset(0);
        Ok(env)
    }

    pub fn observation_len(&self) -> usize {
        observation_len(&self.topology)
    }

    pub fn action_len(&self) -> usize {
        self.topology.joint_count()
    }
}

#[derive(Debug, Clone)]
pub struct ImitationEnv<T> {
    spec: EnvSpec<T>,
    state: HandState<T>,
    steps: usize,
    t0: T,
}

impl<T: Real> ImitationEnv<T> {
    pub fn spec(&self) -> &EnvSpec<T> {
        &self.spec
    }

    pub fn state(&self) -> &HandState<T> {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Reference time of the current state.
    pub fn reference_time(&self) -> T {
        self.t0 + T::from_usize_lossy(self.steps) * self.spec.sim.control_dt()
    }

    pub fn reset(&mut self, seed: u64) -> Vec<T> {
        let motion = &self.spec.motion;
        let topo = &self.spec.topology;
        self.steps = 0;
        match self.spec.episode.init_mode {
            InitMode::FixedZero => {
                self.t0 = T::zero();
                let q = clamp_to_limits(topo, &motion.frames[0]).0;
                self.state = HandState::at_rest(q);
            }
            InitMode::ReferenceState => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let phase = T::lit(rng.random::<f64>());
                self.t0 = phase * motion.duration();
                let (q, v, _) = motion.sample(self.t0);
                self.state = HandState {
                    q: clamp_to_limits(topo, &q).0,
                    qdot: v,
                    t: T::zero(),
                };
            }
        }
        self.observe()
    }

    pub fn observe(&self) -> Vec<T> {
        let topo = &self.spec.topology;
        let mut obs = Vec::with_capacity(observation_len(topo));
        obs.extend_from_slice(&self.state.q);
        obs.extend_from_slice(&self.state.qdot);
        for tip in forward_kinematics(topo, &self.state.q) {
            obs.extend_from_slice(&tip);
        }
        let (_, _, phase) = self.spec.motion.sample(self.reference_time());
        obs.push(phase.value());
        obs
    }

    /// Reference pose and velocity at the end of the next control period.
    pub fn upcoming_reference(&self) -> (JointAngles<T>, Vec<T>) {
        let t = self.reference_time() + self.spec.sim.control_dt();
        let (q, v, _) = self.spec.motion.sample(t);
        (clamp_to_limits(&self.spec.topology, &q), v)
    }

    /// Applies a pose action (clamped to joint limits) with zero desired velocity.
    pub fn step(&mut self, action: &[T]) -> Result<Transition<T>> {
        self.step_tracking(action, None)
    }

    /// Applies a PD target with an optional desired joint velocity.
    pub fn step_tracking(&mut self, target: &[T], target_velocity: Option<&[T]>) -> Result<Transition<T>> {
        let n = self.spec.topology.joint_count();
        if target.len() != n {
            return Err(Error::Dimension {
                context: "action length",
                expected: n,
                found: target.len(),
            });
        }
        let target = clamp_to_limits(&self.spec.topology, target);
        let next = step_tracking(
            &self.state,
            &target,
            target_velocity,
            &self.spec.gains,
            &self.spec.sim,
            &self.spec.topology,
        )?;
        self.state = next;
        self.steps += 1;
        let (q_ref, v_ref, _) = self.spec.motion.sample(self.reference_time());
        let errors = error_bundle(&self.spec.topology, &self.state.q, &self.state.qdot, &q_ref, &v_ref);
        let reward = composite_reward(&errors, &self.spec.reward);
        Ok(Transition {
            observation: self.observe(),
            reward,
            done: self.steps >= self.spec.episode.episode_steps,
            errors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::build_default_hand;
    use crate::motion::{synth_motion, SynthSpec};

    fn spec(motion: SynthSpec, init_mode: InitMode, steps: usize) -> EnvSpec<f64> {
        let topo = build_default_hand::<f64>();
        let motion = synth_motion(&motion, &topo).unwrap();
        EnvSpec {
            topology: Arc::new(topo),
            motion: Arc::new(motion),
            gains: PdGains::reference_best(),
            sim: SimConfig::default(),
            reward: RewardSpec::default(),
            episode: EpisodeConfig {
                episode_steps: steps,
                init_mode,
            },
        }
    }

    #[test]
    fn fixed_zero_reset() {
        let mut env = spec(SynthSpec::hold(0.0, 2.0), InitMode::FixedZero, 10).build().unwrap();
        let obs = env.reset(3);
        assert_eq!(obs.len(), 46);
        assert!(obs[..30].iter().all(|v| *v == 0.0));
        assert_eq!(*obs.last().unwrap(), 0.0);
        let tips = forward_kinematics(&env.spec().topology, &[0.0; 15]);
        let flat: Vec<f64> = tips.into_iter().flatten().collect();
        assert_eq!(&obs[30..45], flat.as_slice());
    }

    #[test]
    fn reference_state_reset() {
        let s = spec(SynthSpec::sinusoid(1.0, 0.5, 0.5, 2.0, 1), InitMode::ReferenceState, 10);
        let mut env = s.build().unwrap();
        let a = env.reset(42);
        let b = env.reset(42);
        assert_eq!(a, b);
        let phase = *a.last().unwrap();
        let (q, v, _) = s.motion.sample(phase * s.motion.duration());
        for j in 0..15 {
            assert!((a[j] - q[j]).abs() < 1e-9);
            assert!((a[15 + j] - v[j]).abs() < 1e-9);
        }
        assert_ne!(env.reset(43), a);
    }

    #[test]
    fn done_only_at_episode_end() {
        let mut env = spec(SynthSpec::hold(1.0, 2.0), InitMode::FixedZero, 3).build().unwrap();
        env.reset(0);
        let dones: Vec<bool> = (0..3).map(|_| env.step(&[1.0; 15]).unwrap().done).collect();
        assert_eq!(dones, vec![false, false, true]);
    }

    #[test]
    fn deterministic_rewards() {
        let s = spec(SynthSpec::sinusoid(1.0, 0.5, 0.5, 2.0, 1), InitMode::ReferenceState, 50);
        let run = || {
            let mut env = s.build().unwrap();
            env.reset(9);
            (0..50)
                .map(|i| env.step(&[0.02 * i as f64; 15]).unwrap().reward)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn tracking_a_hold_converges_to_full_reward() {
        let mut env = spec(SynthSpec::hold(1.2, 2.0), InitMode::FixedZero, 200).build().unwrap();
        env.reset(0);
        let mut last = 0.0;
        for _ in 0..200 {
            let t = env.step(&[1.2; 15]).unwrap();
            assert!(t.reward > 0.0 && t.reward <= 1.0);
            last = t.reward;
        }
        assert!(last > 1.0 - 1e-9);
    }

    #[test]
    fn wrong_action_length() {
        let mut env = spec(SynthSpec::hold(1.0, 2.0), InitMode::FixedZero, 3).build().unwrap();
        assert!(matches!(env.step(&[1.0; 14]), Err(Error::Dimension { .. })));
    }
}
