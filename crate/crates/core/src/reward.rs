//! Imitation error terms and the composite exponential reward.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Quat, Vec3};
use crate::hand::{forward_kinematics, HandTopology};
use crate::scalar::Real;

/// Weights `w` (summing to one) and scales `k` of the four reward terms:
/// pose, velocity, end effector and root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSpec<T> {
    pub w_pose: T,
    pub w_velocity: T,
    pub w_end_effector: T,
    pub w_root: T,
    pub k_pose: T,
    pub k_velocity: T,
    pub k_end_effector: T,
    pub k_root: T,
}

impl<T: Real> Default for RewardSpec<T> {
    /// Motion-imitation defaults: w = (0.65, 0.1, 0.15, 0.1), k = (2, 0.1, 40, 10).
    fn default() -> Self {
        Self {
            w_pose: T::lit(0.65),
            w_velocity: T::lit(0.1),
            w_end_effector: T::lit(0.15),
            w_root: T::lit(0.1),
            k_pose: T::lit(2.0),
            k_velocity: T::lit(0.1),
            k_end_effector: T::lit(40.0),
            k_root: T::lit(10.0),
        }
    }
}

impl<T: Real> RewardSpec<T> {
    pub fn weights(&self) -> [T; 4] {
        [self.w_pose, self.w_velocity, self.w_end_effector, self.w_root]
    }

    pub fn scales(&self) -> [T; 4] {
        [self.k_pose, self.k_velocity, self.k_end_effector, self.k_root]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.weights();
        if w.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::InvalidSpec("reward weights must be finite and >= 0".into()));
        }
        let sum = w.iter().fold(T::zero(), |a, &b| a + b);
        if (sum - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::InvalidSpec(format!("reward weights sum to {sum}, expected 1")));
        }
        if self.scales().iter().any(|k| !(k.is_finite() && *k > T::zero())) {
            return Err(Error::InvalidSpec("reward scales must be positive".into()));
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> RewardSpec<U> {
        let c = |v: T| U::lit(v.as_f64());
        RewardSpec {
            w_pose: c(self.w_pose),
            w_velocity: c(self.w_velocity),
            w_end_effector: c(self.w_end_effector),
            w_root: c(self.w_root),
            k_pose: c(self.k_pose),
            k_velocity: c(self.k_velocity),
            k_end_effector: c(self.k_end_effector),
            k_root: c(self.k_root),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorBundle<T> {
    pub pose: T,
    pub velocity: T,
    pub end_effector: T,
    pub root: T,
}

/// Sum over joints of the squared scalar rotation of `q_ref * q_sim^-1`.
pub fn pose_error<T: Real>(q_sim: &[Quat<T>], q_ref: &[Quat<T>]) -> T {
    q_sim
        .iter()
        .zip(q_ref)
        .map(|(&s, &r)| {
            let a = geom::relative_angle(r, s);
            a * a
        })
        .fold(T::zero(), |a, b| a + b)
}

/// `sum_j |v_sim_j - v_ref_j|^2`.
pub fn velocity_error<T: Real>(v_sim: &[T], v_ref: &[T]) -> T {
    v_sim
        .iter()
        .zip(v_ref)
        .map(|(&a, &b)| (a - b) * (a - b))
        .fold(T::zero(), |a, b| a + b)
}

/// Sum over fingertips of the squared Euclidean distance (m^2).
pub fn end_effector_error<T: Real>(tips_sim: &[Vec3<T>], tips_ref: &[Vec3<T>]) -> T {
    tips_sim
        .iter()
        .zip(tips_ref)
        .map(|(&a, &b)| {
            let d = geom::sub(a, b);
            geom::dot(d, d)
        })
        .fold(T::zero(), |a, b| a + b)
}

/// Squared scalar rotation between two root orientations.
pub fn root_error<T: Real>(root_sim: Quat<T>, root_ref: Quat<T>) -> T {
    let a = geom::relative_angle(root_ref, root_sim);
    a * a
}

/// `sum_x w_x * exp(-k_x * eps_x)`.
pub fn composite_reward<T: Real>(errs: &ErrorBundle<T>, spec: &RewardSpec<T>) -> T {
    let e = [errs.pose, errs.velocity, errs.end_effector, errs.root];
    spec.weights()
        .iter()
        .zip(spec.scales())
        .zip(e)
        .map(|((&w, k), eps)| w * (-k * eps).exp())
        .fold(T::zero(), |a, b| a + b)
}

/// All four error terms for a simulated and a reference hand configuration.
pub fn error_bundle<T: Real>(
    topology: &HandTopology<T>,
    q_sim: &[T],
    v_sim: &[T],
    q_ref: &[T],
    v_ref: &[T],
) -> ErrorBundle<T> {
    let pose = pose_error(&topology.joint_quaternions(q_sim), &topology.joint_quaternions(q_ref));
    let tips_sim = forward_kinematics(topology, q_sim);
    let tips_ref = forward_kinematics(topology, q_ref);
    // the wrist never moves, so both roots are the topology root
    let root = root_error(topology.root_orientation, topology.root_orientation);
    ErrorBundle {
        pose,
        velocity: velocity_error(v_sim, v_ref),
        end_effector: end_effector_error(&tips_sim, &tips_ref),
        root,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::build_default_hand;

    #[test]
    fn pose_error_examples() {
        let axis = [0.0, 1.0, 0.0];
        let same: Vec<_> = (0..15).map(|i| Quat::from_axis_angle(axis, 0.1 * i as f64)).collect();
        assert_eq!(pose_error(&same, &same), 0.0);
        let mut other = same.clone();
        other[4] = Quat::from_axis_angle(axis, 0.4 + 0.5);
        assert!((pose_error(&same, &other) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn all_joints_off_by_a_tenth() {
        let h = build_default_hand::<f64>();
        let q0 = vec![0.5; 15];
        let q1 = vec![0.6; 15];
        let a = h.joint_quaternions(&q0);
        let b = h.joint_quaternions(&q1);
        // oracle: 2 acos |w| of the relative quaternion
        let oracle: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| {
                let r = y.mul(x.conj());
                let ang = 2.0 * r.w.abs().min(1.0).acos();
                ang * ang
            })
            .sum();
        assert!((pose_error(&a, &b) - 0.15).abs() < 1e-12);
        assert!((oracle - 0.15).abs() < 1e-9);
    }

    #[test]
    fn velocity_error_examples() {
        assert_eq!(velocity_error(&[0.3; 15], &[0.3; 15]), 0.0);
        let mut v = vec![0.0; 15];
        v[0] = 1.0;
        assert_eq!(velocity_error(&v, &[0.0; 15]), 1.0);
        assert!((velocity_error::<f64>(&[0.5; 15], &[0.0; 15]) - 3.75).abs() < 1e-12);
    }

    #[test]
    fn end_effector_examples() {
        let tips = vec![[0.1, 0.2, 0.3]; 5];
        assert_eq!(end_effector_error(&tips, &tips), 0.0);
        let mut moved = tips.clone();
        moved[2][0] += 0.03;
        assert!((end_effector_error::<f64>(&tips, &moved) - 9e-4).abs() < 1e-15);
    }

    #[test]
    fn end_effector_from_fk() {
        let h = build_default_hand::<f64>();
        let qa: Vec<f64> = (0..15).map(|i| 0.1 * i as f64).collect();
        let qb: Vec<f64> = (0..15).map(|i| 1.9 - 0.1 * i as f64).collect();
        let e = error_bundle(&h, &qa, &[0.0; 15], &qb, &[0.0; 15]).end_effector;
        let ta = forward_kinematics(&h, &qa);
        let tb = forward_kinematics(&h, &qb);
        let manual: f64 = ta
            .iter()
            .zip(&tb)
            .map(|(a, b)| (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>())
            .sum();
        assert!((e - manual).abs() < 1e-15);
    }

    #[test]
    fn root_error_examples() {
        let q = Quat::<f64>::from_axis_angle([0.2, 0.3, 0.9], 0.7);
        assert!(root_error(q, q) < 1e-24);
        let r = Quat::from_axis_angle([0.2, 0.3, 0.9], 0.9).mul(Quat::identity());
        assert!((root_error(q, r) - 0.04).abs() < 1e-12);
        assert!(root_error(q, q.neg()).abs() < 1e-12);
    }

    #[test]
    fn composite_examples() {
        let spec = RewardSpec::<f64>::default();
        spec.validate().unwrap();
        assert_eq!(composite_reward(&ErrorBundle::default(), &spec), 1.0);
        let e = ErrorBundle { pose: 0.5, ..Default::default() };
        let r = composite_reward(&e, &spec);
        assert!((r - (0.65 * (-1.0f64).exp() + 0.35)).abs() < 1e-12);
        assert!((r - 0.5891).abs() < 1e-4);
    }

    #[test]
    fn invalid_spec() {
        let mut s = RewardSpec::<f64>::default();
        s.w_pose = 0.7;
        assert!(s.validate().is_err());
        let mut s = RewardSpec::<f64>::default();
        s.k_root = 0.0;
        assert!(s.validate().is_err());
    }
}
