//! Per-joint PD actuation and time stepping.
//!
//! Joints are independent: there is no coupling, gravity or contact. Two motor
//! models are provided:
//!
//! * [`MotorModel::VelocityMotor`] (default): the PD signal is a velocity
//!   correction applied every substep, `v' = v + kp*(q* - q)*sim_hz + kd*(v* - v)`.
//!   This is the motor abstraction of common rigid-body engines, where gains
//!   are dimensionless and stable for `kp, kd` in `[0, 2)`.
//! * [`MotorModel::Torque`]: the PD signal is a torque on a decoupled double
//!   integrator, `qddot = (kp*(q* - q) + kd*(v* - v)) / inertia`.
//!
//! Both integrate with semi-implicit Euler at `sim_hz`, running
//! `sim_hz / control_hz` substeps per control step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hand::HandTopology;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdGains<T> {
    pub kp: T,
    pub kd: T,
}

impl<T: Real> PdGains<T> {
    pub fn new(kp: T, kd: T) -> Result<Self> {
        let g = Self { kp, kd };
        g.validate()?;
        Ok(g)
    }

    /// Best gains reported for the original hand model; shipped as a fixture
    /// and used as the default for policy training.
    pub fn reference_best() -> Self {
        Self {
            kp: T::lit(0.22),
            kd: T::lit(0.87),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kp.is_finite() && self.kd.is_finite() && self.kp >= T::zero() && self.kd >= T::zero()) {
            return Err(Error::InvalidSpec(format!(
                "gains must be finite and non-negative (kp = {}, kd = {})",
                self.kp, self.kd
            )));
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> PdGains<U> {
        PdGains {
            kp: U::lit(self.kp.as_f64()),
            kd: U::lit(self.kd.as_f64()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotorModel {
    #[default]
    VelocityMotor,
    Torque,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig<T> {
    pub sim_hz: u32,
    pub control_hz: u32,
    /// Effective joint inertia; only used by the torque model.
    pub inertia: T,
    pub velocity_cap: T,
    pub motor: MotorModel,
}

impl<T: Real> Default for SimConfig<T> {
    fn default() -> Self {
        Self {
            sim_hz: 240,
            control_hz: 30,
            inertia: T::one(),
            velocity_cap: T::lit(50.0),
            motor: MotorModel::VelocityMotor,
        }
    }
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.control_hz == 0 || self.sim_hz == 0 || self.sim_hz % self.control_hz != 0 {
            return Err(Error::InvalidSpec(format!(
                "sim_hz ({}) must be a positive multiple of control_hz ({})",
                self.sim_hz, self.control_hz
            )));
        }
        if !(self.inertia > T::zero() && self.inertia.is_finite()) {
            return Err(Error::InvalidSpec("inertia must be positive".into()));
        }
        if !(self.velocity_cap > T::zero()) {
            return Err(Error::InvalidSpec("velocity_cap must be positive".into()));
        }
        Ok(())
    }

    pub fn substeps(&self) -> u32 {
        self.sim_hz / self.control_hz
    }

    pub fn sim_dt(&self) -> T {
        T::one() / T::from_u32(self.sim_hz).unwrap()
    }

    pub fn control_dt(&self) -> T {
        T::one() / T::from_u32(self.control_hz).unwrap()
    }

    pub fn cast<U: Real>(&self) -> SimConfig<U> {
        SimConfig {
            sim_hz: self.sim_hz,
            control_hz: self.control_hz,
            inertia: U::lit(self.inertia.as_f64()),
            velocity_cap: U::lit(self.velocity_cap.as_f64()),
            motor: self.motor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandState<T> {
    pub q: Vec<T>,
    pub qdot: Vec<T>,
    pub t: T,
}

impl<T: Real> HandState<T> {
    pub fn at_rest(q: Vec<T>) -> Self {
        let n = q.len();
        Self {
            q,
            qdot: vec![T::zero(); n],
            t: T::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(&self.qdot).all(|v| v.is_finite())
    }
}

/// Elementwise `kp * dp + kd * dv`.
pub fn pd_signal<T: Real>(gains: &PdGains<T>, dp: &[T], dv: &[T]) -> Vec<T> {
    dp.iter()
        .zip(dv)
        .map(|(&p, &v)| gains.kp * p + gains.kd * v)
        .collect()
}

/// Advances one control period toward `target` with zero desired velocity.
pub fn step<T: Real>(
    state: &HandState<T>,
    target: &[T],
    gains: &PdGains<T>,
    cfg: &SimConfig<T>,
    topology: &HandTopology<T>,
) -> Result<HandState<T>> {
    step_tracking(state, target, None, gains, cfg, topology)
}

/// Advances one control period toward `target` with an optional desired
/// joint velocity (zero when `None`).
pub fn step_tracking<T: Real>(
    state: &HandState<T>,
    target: &[T],
    target_velocity: Option<&[T]>,
    gains: &PdGains<T>,
    cfg: &SimConfig<T>,
    topology: &HandTopology<T>,
) -> Result<HandState<T>> {
    let n = topology.joint_count();
    debug_assert_eq!(state.q.len(), n);
    debug_assert_eq!(target.len(), n);
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState {
            time: state.t.as_f64(),
        });
    }
    let dt = cfg.sim_dt();
    let rate = T::from_u32(cfg.sim_hz).unwrap();
    let cap = cfg.velocity_cap;
    let mut q = state.q.clone();
    let mut v = state.qdot.clone();

    for (j, (lo, hi)) in topology.limits().enumerate() {
        let desired_v = target_velocity.map_or(T::zero(), |tv| tv[j]);
        let (mut qj, mut vj) = (q[j], v[j]);
        for _ in 0..cfg.substeps() {
            let signal = gains.kp * (target[j] - qj) * scale_position(cfg.motor, rate)
                + gains.kd * (desired_v - vj);
            vj = match cfg.motor {
                MotorModel::VelocityMotor => vj + signal,
                MotorModel::Torque => vj + signal / cfg.inertia * dt,
            };
            vj = vj.max(-cap).min(cap);
            qj = qj + vj * dt;
            if qj < lo {
                qj = lo;
                vj = T::zero();
            } else if qj > hi {
                qj = hi;
                vj = T::zero();
            }
        }
        q[j] = qj;
        v[j] = vj;
    }

    let next = HandState {
        q,
        qdot: v,
        t: state.t + cfg.control_dt(),
    };
    if !next.is_finite() {
        return Err(Error::NonFiniteState {
            time: next.t.as_f64(),
        });
    }
    Ok(next)
}

#[inline]
fn scale_position<T: Real>(motor: MotorModel, rate: T) -> T {
    match motor {
        // position error converted to a velocity correction over one substep
        MotorModel::VelocityMotor => rate,
        MotorModel::Torque => T::one(),
    }
}
