//! Controller-tuning objective: summed pose and velocity error of retargeted
//! tracking over a whole reference motion.

use crate::dynamics::PdGains;
use crate::env::EnvSpec;
use crate::rl::retarget_trace;
use crate::scalar::Real;

/// Value reported for gains whose simulation fails or goes non-finite.
pub const DIVERGENCE_PENALTY: f64 = 1e9;

/// Control steps covering the reference duration (at least one).
pub fn objective_steps<T: Real>(spec: &EnvSpec<T>) -> usize {
    let steps = spec.motion.duration().as_f64() * spec.sim.control_hz as f64;
    (steps - 1e-9).ceil().max(1.0) as usize
}

/// `sum_t (eps_p(t) + eps_v(t))` of retarget tracking with `gains`, from phase 0
/// at rest over the full reference.
pub fn control_objective<T: Real>(spec: &EnvSpec<T>, gains: PdGains<T>) -> f64 {
    if gains.validate().is_err() {
        return DIVERGENCE_PENALTY;
    }
    let mut s = spec.clone();
    s.gains = gains;
    match retarget_trace(&s, objective_steps(&s)) {
        Ok(trace) => {
            let total: f64 = trace
                .pose_errors
                .iter()
                .zip(&trace.velocity_errors)
                .map(|(p, v)| p.as_f64() + v.as_f64())
                .sum();
            if total.is_finite() {
                total.min(DIVERGENCE_PENALTY)
            } else {
                DIVERGENCE_PENALTY
            }
        }
        Err(_) => DIVERGENCE_PENALTY,
    }
}
