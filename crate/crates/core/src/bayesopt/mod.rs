//! Gaussian-process Bayesian optimization, used to tune the PD gains and to
//! search discrete hyperparameter grids.

pub mod acquisition;
pub mod discrete;
pub mod gp;
pub mod objective;
pub mod optim;
pub mod tune;

pub use acquisition::{expected_improvement, maximize_ei, model_ei, AcquisitionOptions};
pub use discrete::{bayes_search_discrete, one_hot_embedding};
pub use gp::{GpHyper, GpModel};
pub use objective::{control_objective, objective_steps, DIVERGENCE_PENALTY};
pub use optim::{halton_points, nelder_mead, Minimum, NelderMeadOptions};
pub use tune::{
    grid_minimum, three_bound_sweep, tune_controller, SweepBounds, TraceRow, TuneConfig, TuneResult,
    PUBLISHED_SWEEP_PCC, SWEEP_BOUNDS,
};
