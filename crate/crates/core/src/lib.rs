//! Motion-imitation workbench for a PD-actuated robotic hand.
//!
//! The stack runs bottom up: [`hand`] (topology and forward kinematics),
//! [`dynamics`] (PD joint control and integration), [`motion`] (reference
//! clips), [`reward`], [`env`] (the imitation MDP), [`nn`] and [`rl`] (PPO and
//! SAC), [`bayesopt`] (gain tuning) and [`analysis`] (sweep statistics).
//!
//! Everything numeric is generic over [`Real`]; the aliases below fix the
//! scalar to `f64` (and `f32` for the `*32` variants).

pub mod analysis;
pub mod bayesopt;
pub mod config;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod geom;
pub mod hand;
pub mod motion;
pub mod nn;
pub mod reward;
pub mod rl;
pub mod scalar;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use scalar::Real;

pub type HandTopology = hand::HandTopology<f64>;
pub type ReferenceMotion = motion::ReferenceMotion<f64>;
pub type PdGains = dynamics::PdGains<f64>;
pub type SimConfig = dynamics::SimConfig<f64>;
pub type RewardSpec = reward::RewardSpec<f64>;
pub type EnvSpec = env::EnvSpec<f64>;
pub type ImitationEnv = env::ImitationEnv<f64>;
pub type GaussianPolicy = nn::GaussianPolicy<f64>;
pub type Checkpoint = nn::Checkpoint<f64>;

pub type HandTopology32 = hand::HandTopology<f32>;
pub type ReferenceMotion32 = motion::ReferenceMotion<f32>;
pub type EnvSpec32 = env::EnvSpec<f32>;
pub type ImitationEnv32 = env::ImitationEnv<f32>;
pub type GaussianPolicy32 = nn::GaussianPolicy<f32>;
pub type Checkpoint32 = nn::Checkpoint<f32>;
