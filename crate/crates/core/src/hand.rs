//! Static hand description and fingertip forward kinematics.
//!
//! A hand is a fixed root pose plus a list of fingers. Every finger is a
//! planar chain of three revolute joints sharing one rotation axis. The
//! default hand has five fingers (15 joints); reduced single-finger hands are
//! used for fast experiments.

use std::ops::{Deref, DerefMut};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, write_string, Error, Result};
use crate::geom::{self, Quat, Vec3};
use crate::scalar::Real;

pub const JOINTS_PER_FINGER: usize = 3;
pub const DEFAULT_FINGERS: usize = 5;
pub const DEFAULT_JOINTS: usize = DEFAULT_FINGERS * JOINTS_PER_FINGER;
pub const DEFAULT_LIMITS: (f64, f64) = (0.0, 2.0);

const DEFAULT_HAND_TOML: &str = include_str!("../data/default_hand.toml");
const TOPOLOGY_VERSION: u32 = 1;

/// Canonical finger order.
pub const FINGER_NAMES: [&str; DEFAULT_FINGERS] = ["thumb", "index", "middle", "ring", "pinky"];

#[derive(Debug, Clone, PartialEq)]
pub struct FingerSpec<T> {
    pub name: String,
    pub base_position: Vec3<T>,
    pub base_direction: Vec3<T>,
    pub joint_axis: Vec3<T>,
    pub link_lengths: [T; JOINTS_PER_FINGER],
    pub joint_limits: [(T, T); JOINTS_PER_FINGER],
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandTopology<T> {
    pub fingers: Vec<FingerSpec<T>>,
    pub root_position: Vec3<T>,
    pub root_orientation: Quat<T>,
}

/// Joint angles in canonical order (finger-major, proximal to distal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointAngles<T>(pub Vec<T>);

impl<T> Deref for JointAngles<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for JointAngles<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T: Real> JointAngles<T> {
    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn within_limits(&self, topology: &HandTopology<T>) -> bool {
        self.0.len() == topology.joint_count()
            && self
                .0
                .iter()
                .zip(topology.limits())
                .all(|(q, (lo, hi))| *q >= lo && *q <= hi)
    }
}

// On-disk schema, always f64.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyFile {
    version: u32,
    root: RootFile,
    fingers: Vec<FingerFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RootFile {
    position: [f64; 3],
    orientation: [f64; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FingerFile {
    name: String,
    base_position: [f64; 3],
    base_direction: [f64; 3],
    joint_axis: [f64; 3],
    link_lengths: [f64; 3],
    joint_limits: [[f64; 2]; 3],
}

fn v3<T: Real>(a: [f64; 3]) -> Vec3<T> {
    [T::lit(a[0]), T::lit(a[1]), T::lit(a[2])]
}

fn f3<T: Real>(a: Vec3<T>) -> [f64; 3] {
    [a[0].as_f64(), a[1].as_f64(), a[2].as_f64()]
}

impl TopologyFile {
    fn into_topology<T: Real>(self) -> Result<HandTopology<T>> {
        if self.version != TOPOLOGY_VERSION {
            return Err(Error::parse(
                "topology",
                format!("unsupported version {}", self.version),
            ));
        }
        let [w, x, y, z] = self.root.orientation;
        let root_orientation = Quat {
            w: T::lit(w),
            x: T::lit(x),
            y: T::lit(y),
            z: T::lit(z),
        }
        .normalized();
        let fingers = self
            .fingers
            .into_iter()
            .map(|f| FingerSpec {
                name: f.name,
                base_position: v3(f.base_position),
                base_direction: geom::normalize(v3(f.base_direction)),
                joint_axis: geom::normalize(v3(f.joint_axis)),
                link_lengths: f.link_lengths.map(T::lit),
                joint_limits: f.joint_limits.map(|[lo, hi]| (T::lit(lo), T::lit(hi))),
            })
            .collect();
        let topo = HandTopology {
            fingers,
            root_position: v3(self.root.position),
            root_orientation,
        };
        topo.validate()?;
        Ok(topo)
    }
}

impl<T: Real> HandTopology<T> {
    pub fn finger_count(&self) -> usize {
        self.fingers.len()
    }

    pub fn joint_count(&self) -> usize {
        self.fingers.len() * JOINTS_PER_FINGER
    }

    /// Per-joint `(lo, hi)` limits in canonical order.
    pub fn limits(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.fingers.iter().flat_map(|f| f.joint_limits.iter().copied())
    }

    /// Per-joint rotation axis in the hand frame.
    pub fn joint_axes(&self) -> impl Iterator<Item = Vec3<T>> + '_ {
        self.fingers
            .iter()
            .flat_map(|f| std::iter::repeat(f.joint_axis).take(JOINTS_PER_FINGER))
    }

    pub fn joint_names(&self) -> Vec<String> {
        self.fingers
            .iter()
            .flat_map(|f| (1..=JOINTS_PER_FINGER).map(move |j| format!("{}_{}", f.name, j)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.fingers.is_empty() {
            return Err(Error::InvalidSpec("hand has no fingers".into()));
        }
        for f in &self.fingers {
            if f.link_lengths.iter().any(|l| !(l.is_finite() && *l > T::zero())) {
                return Err(Error::InvalidSpec(format!(
                    "finger {}: link lengths must be positive",
                    f.name
                )));
            }
            if f.joint_limits.iter().any(|(lo, hi)| !(lo <= hi)) {
                return Err(Error::InvalidSpec(format!(
                    "finger {}: joint limit lo > hi",
                    f.name
                )));
            }
            if geom::norm(f.joint_axis) == T::zero() || geom::norm(f.base_direction) == T::zero() {
                return Err(Error::InvalidSpec(format!(
                    "finger {}: zero-length axis or direction",
                    f.name
                )));
            }
        }
        Ok(())
    }

    /// Parses a topology document (TOML, schema version 1).
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let file: TopologyFile = toml::from_str(s).map_err(|e| Error::parse("topology", e))?;
        file.into_topology()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        let q = self.root_orientation;
        let file = TopologyFile {
            version: TOPOLOGY_VERSION,
            root: RootFile {
                position: f3(self.root_position),
                orientation: [q.w.as_f64(), q.x.as_f64(), q.y.as_f64(), q.z.as_f64()],
            },
            fingers: self
                .fingers
                .iter()
                .map(|f| FingerFile {
                    name: f.name.clone(),
                    base_position: f3(f.base_position),
                    base_direction: f3(f.base_direction),
                    joint_axis: f3(f.joint_axis),
                    link_lengths: f.link_lengths.map(|l| l.as_f64()),
                    joint_limits: f.joint_limits.map(|(lo, hi)| [lo.as_f64(), hi.as_f64()]),
                })
                .collect(),
        };
        toml::to_string_pretty(&file).expect("topology serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_toml_string())
    }

    /// Keeps only the named finger. Used for the reduced 3-joint hand.
    pub fn single_finger(&self, name: &str) -> Result<Self> {
        let finger = self
            .fingers
            .iter()
            .find(|f| f.name == name)
            .cloned()
            .ok_or_else(|| Error::InvalidSpec(format!("no finger named {name}")))?;
        Ok(Self {
            fingers: vec![finger],
            ..self.clone()
        })
    }

    pub fn cast<U: Real>(&self) -> HandTopology<U> {
        let c3 = |a: Vec3<T>| [U::lit(a[0].as_f64()), U::lit(a[1].as_f64()), U::lit(a[2].as_f64())];
        let q = self.root_orientation;
        HandTopology {
            fingers: self
                .fingers
                .iter()
                .map(|f| FingerSpec {
                    name: f.name.clone(),
                    base_position: c3(f.base_position),
                    base_direction: c3(f.base_direction),
                    joint_axis: c3(f.joint_axis),
                    link_lengths: f.link_lengths.map(|l| U::lit(l.as_f64())),
                    joint_limits: f
                        .joint_limits
                        .map(|(lo, hi)| (U::lit(lo.as_f64()), U::lit(hi.as_f64()))),
                })
                .collect(),
            root_position: c3(self.root_position),
            root_orientation: Quat {
                w: U::lit(q.w.as_f64()),
                x: U::lit(q.x.as_f64()),
                y: U::lit(q.y.as_f64()),
                z: U::lit(q.z.as_f64()),
            },
        }
    }

    /// Local joint rotations as unit quaternions.
    pub fn joint_quaternions(&self, q: &[T]) -> Vec<Quat<T>> {
        self.joint_axes()
            .zip(q)
            .map(|(axis, &angle)| Quat::from_axis_angle(axis, angle))
            .collect()
    }
}

/// The default five-finger, 15-joint hand with every limit at `[0, 2]` rad.
pub fn build_default_hand<T: Real>() -> HandTopology<T> {
    HandTopology::from_toml_str(DEFAULT_HAND_TOML).expect("bundled topology is valid")
}

/// Fingertip positions (world frame, metres), one per finger.
pub fn forward_kinematics<T: Real>(topology: &HandTopology<T>, q: &[T]) -> Vec<Vec3<T>> {
    debug_assert_eq!(q.len(), topology.joint_count());
    topology
        .fingers
        .iter()
        .zip(q.chunks_exact(JOINTS_PER_FINGER))
        .map(|(finger, angles)| {
            let local = finger_chain(finger, angles).1;
            to_world(topology, local)
        })
        .collect()
}

/// Hand-frame joint origins (3) and fingertip of one finger.
fn finger_chain<T: Real>(finger: &FingerSpec<T>, angles: &[T]) -> ([Vec3<T>; JOINTS_PER_FINGER], Vec3<T>) {
    let mut p = finger.base_position;
    let mut rot = Quat::identity();
    let mut origins = [p; JOINTS_PER_FINGER];
    for j in 0..JOINTS_PER_FINGER {
        origins[j] = p;
        rot = rot.mul(Quat::from_axis_angle(finger.joint_axis, angles[j]));
        p = geom::add(p, rot.rotate(geom::scale(finger.base_direction, finger.link_lengths[j])));
    }
    (origins, p)
}

fn to_world<T: Real>(topology: &HandTopology<T>, p: Vec3<T>) -> Vec3<T> {
    geom::add(topology.root_position, topology.root_orientation.rotate(p))
}

/// Analytic fingertip Jacobian: for finger `f`, column `j` is the fingertip
/// velocity per unit rate of its joint `j` (world frame).
pub fn fingertip_jacobian<T: Real>(topology: &HandTopology<T>, q: &[T]) -> Vec<[Vec3<T>; JOINTS_PER_FINGER]> {
    topology
        .fingers
        .iter()
        .zip(q.chunks_exact(JOINTS_PER_FINGER))
        .map(|(finger, angles)| {
            let (origins, tip) = finger_chain(finger, angles);
            let axis = topology.root_orientation.rotate(finger.joint_axis);
            let tip_w = to_world(topology, tip);
            let mut cols = [[T::zero(); 3]; JOINTS_PER_FINGER];
            for (col, o) in cols.iter_mut().zip(origins) {
                *col = geom::cross(axis, geom::sub(tip_w, to_world(topology, o)));
            }
            cols
        })
        .collect()
}

/// Clamps every angle into its joint limits.
pub fn clamp_to_limits<T: Real>(topology: &HandTopology<T>, q: &[T]) -> JointAngles<T> {
    JointAngles(
        q.iter()
            .zip(topology.limits())
            .map(|(&v, (lo, hi))| v.max(lo).min(hi))
            .collect(),
    )
}
