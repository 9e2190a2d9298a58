//! PPO and SAC trainers, advantage estimation, evaluation and the
//! retargeting baseline.

pub mod buffer;
pub mod eval;
pub mod grid;
pub mod ppo;
pub mod returns;
pub mod sac;
pub mod train;

pub use buffer::{ReplayBatch, ReplayBuffer, RolloutBatch, RolloutBuffer};
pub use eval::{
    evaluate, evaluation_spec, policy_trace, published_comparison, render_comparison, comparison_csv, mean_std, random_baseline, retarget_baseline, retarget_trace, ComparisonRow, RolloutTrace, EVAL_STEPS,
};
pub use grid::{run_sweep, sweep_record, HyperGrid, SweepMode};
pub use ppo::{PpoAgent, PpoConfig, PpoStats};
pub use returns::{discounted_return, gae_advantages};
pub use sac::{SacAgent, SacConfig, SacStats};
pub use train::{curve_csv, run_seeds, train_ppo, train_sac, Algo, CurveRow, TrainOptions, TrainOutcome};
