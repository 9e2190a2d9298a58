//! Reference motions: file I/O, axis-angle reduction, looping playback and
//! synthetic generators.
//!
//! Motion file (JSON, version 1):
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "letter_A",
//!   "fps": 30.0,
//!   "joint_order": ["thumb_1", "thumb_2", "...", "pinky_3"],
//!   "frames": [[0.1, 0.2, "... one angle per joint"], ["..."]]
//! }
//! ```
//!
//! A frame may also hold one `[x, y, z]` axis-angle triple per joint, or a
//! flat list of `3 * joints` numbers (pose-export layout). Triples are reduced
//! to the signed projection of the axis-angle vector on the model joint axis.
//! `joint_order` is optional; when present it must be a permutation of the
//! topology's joint names and frames are reordered to canonical order.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, write_string, Error, Result};
use crate::geom;
use crate::hand::{build_default_hand, clamp_to_limits, HandTopology, JointAngles};
use crate::scalar::Real;

pub const MOTION_VERSION: u32 = 1;

/// Normalized progress through a motion, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Phase<T>(pub T);

impl<T: Real> Phase<T> {
    pub fn value(self) -> T {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMotion<T> {
    pub name: String,
    pub fps: T,
    pub frames: Vec<Vec<T>>,
    pub velocities: Vec<Vec<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum FrameFile {
    Angles(Vec<f64>),
    AxisAngle(Vec<[f64; 3]>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MotionFile {
    #[serde(default = "default_version")]
    version: u32,
    #[serde(default)]
    name: Option<String>,
    fps: f64,
    #[serde(default)]
    joint_order: Option<Vec<String>>,
    frames: Vec<FrameFile>,
}

fn default_version() -> u32 {
    MOTION_VERSION
}

/// Central differences in the interior, one-sided at the endpoints.
pub fn finite_difference_velocities<T: Real>(frames: &[Vec<T>], fps: T) -> Vec<Vec<T>> {
    let n = frames.len();
    let joints = frames.first().map_or(0, Vec::len);
    let half = T::lit(0.5);
    (0..n)
        .map(|t| {
            (0..joints)
                .map(|j| {
                    if n < 2 {
                        T::zero()
                    } else if t == 0 {
                        (frames[1][j] - frames[0][j]) * fps
                    } else if t == n - 1 {
                        (frames[n - 1][j] - frames[n - 2][j]) * fps
                    } else {
                        (frames[t + 1][j] - frames[t - 1][j]) * fps * half
                    }
                })
                .collect()
        })
        .collect()
}

impl<T: Real> ReferenceMotion<T> {
    /// Builds a motion from joint-angle frames, clamping to the topology's
    /// limits and deriving velocities.
    pub fn from_frames(name: impl Into<String>, fps: T, frames: Vec<Vec<T>>, topology: &HandTopology<T>) -> Result<Self> {
        if !(fps.is_finite() && fps > T::zero()) {
            return Err(Error::InvalidSpec(format!("fps must be positive, got {fps}")));
        }
        if frames.len() < 2 {
            return Err(Error::Dimension {
                context: "motion frames (need at least 2)",
                expected: 2,
                found: frames.len(),
            });
        }
        let n = topology.joint_count();
        let mut clamped = Vec::with_capacity(frames.len());
        for f in frames {
            if f.len() != n {
                return Err(Error::Dimension {
                    context: "joints per frame",
                    expected: n,
                    found: f.len(),
                });
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::parse("motion", "non-finite angle"));
            }
            clamped.push(clamp_to_limits(topology, &f).0);
        }
        let velocities = finite_difference_velocities(&clamped, fps);
        Ok(Self {
            name: name.into(),
            fps,
            frames: clamped,
            velocities,
        })
    }

    pub fn joint_count(&self) -> usize {
        self.frames[0].len()
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// `(T - 1) / fps` seconds.
    pub fn duration(&self) -> T {
        T::from_usize_lossy(self.frames.len() - 1) / self.fps
    }

    pub fn cast<U: Real>(&self) -> ReferenceMotion<U> {
        let c = |v: &Vec<Vec<T>>| v.iter().map(|f| crate::scalar::cast_vec::<T, U>(f)).collect();
        ReferenceMotion {
            name: self.name.clone(),
            fps: U::lit(self.fps.as_f64()),
            frames: c(&self.frames),
            velocities: c(&self.velocities),
        }
    }

    /// Looping playback: angles, velocities and phase at time `t` seconds.
    pub fn sample(&self, t: T) -> (JointAngles<T>, Vec<T>, Phase<T>) {
        let duration = self.duration();
        let mut tau = t % duration;
        if tau < T::zero() {
            tau = tau + duration;
        }
        if tau >= duration {
            tau = T::zero();
        }
        let pos = tau * self.fps;
        let last = self.frames.len() - 2;
        let i = pos.floor().to_usize().unwrap_or(0).min(last);
        let frac = (pos - T::from_usize_lossy(i)).max(T::zero()).min(T::one());
        let lerp = |a: &[T], b: &[T]| -> Vec<T> {
            a.iter().zip(b).map(|(&x, &y)| x + (y - x) * frac).collect()
        };
        let q = lerp(&self.frames[i], &self.frames[i + 1]);
        let v = lerp(&self.velocities[i], &self.velocities[i + 1]);
        let phase = (tau / duration).max(T::zero()).min(T::one());
        (JointAngles(q), v, Phase(phase))
    }
}

fn reduce_frame(frame: FrameFile, axes: &[geom::Vec3<f64>]) -> Result<Vec<f64>> {
    let n = axes.len();
    match frame {
        FrameFile::Angles(v) if v.len() == n => Ok(v),
        FrameFile::Angles(v) if v.len() == 3 * n => Ok(v
            .chunks_exact(3)
            .zip(axes)
            .map(|(r, a)| geom::dot([r[0], r[1], r[2]], *a))
            .collect()),
        FrameFile::Angles(v) => Err(Error::Dimension {
            context: "joints per frame",
            expected: n,
            found: if v.len() % 3 == 0 && v.len() > n { v.len() / 3 } else { v.len() },
        }),
        FrameFile::AxisAngle(v) if v.len() == n => {
            Ok(v.iter().zip(axes).map(|(r, a)| geom::dot(*r, *a)).collect())
        }
        FrameFile::AxisAngle(v) => Err(Error::Dimension {
            context: "joints per frame",
            expected: n,
            found: v.len(),
        }),
    }
}

/// Parses a motion document against `topology`.
pub fn parse_motion<T: Real>(text: &str, topology: &HandTopology<T>, fallback_name: &str) -> Result<ReferenceMotion<T>> {
    let file: MotionFile = serde_json::from_str(text).map_err(|e| Error::parse("motion", e))?;
    if file.version != MOTION_VERSION {
        return Err(Error::parse("motion", format!("unsupported version {}", file.version)));
    }
    let topo64: HandTopology<f64> = topology.cast();
    let axes: Vec<_> = topo64.joint_axes().collect();
    let names = topology.joint_names();
    let permutation = match &file.joint_order {
        None => None,
        Some(order) => {
            if order.len() != names.len() {
                return Err(Error::Dimension {
                    context: "joint_order length",
                    expected: names.len(),
                    found: order.len(),
                });
            }
            // canonical index -> file column
            let perm = names
                .iter()
                .map(|n| {
                    order
                        .iter()
                        .position(|o| o == n)
                        .ok_or_else(|| Error::parse("motion", format!("joint_order is missing {n}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Some(perm)
        }
    };
    let frames = file
        .frames
        .into_iter()
        .map(|f| {
            // reorder raw columns before reduction so each joint meets its own axis
            let f = match (&permutation, f) {
                (None, f) => f,
                (Some(p), FrameFile::Angles(v)) if v.len() == 3 * p.len() => {
                    FrameFile::Angles(p.iter().flat_map(|&c| v[3 * c..3 * c + 3].to_vec()).collect())
                }
                (Some(p), FrameFile::Angles(v)) if v.len() == p.len() => {
                    FrameFile::Angles(p.iter().map(|&c| v[c]).collect())
                }
                (Some(p), FrameFile::AxisAngle(v)) if v.len() == p.len() => {
                    FrameFile::AxisAngle(p.iter().map(|&c| v[c]).collect())
                }
                (Some(_), f) => f,
            };
            reduce_frame(f, &axes).map(|v| v.into_iter().map(T::lit).collect::<Vec<T>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let name = file.name.unwrap_or_else(|| fallback_name.to_string());
    ReferenceMotion::from_frames(name, T::lit(file.fps), frames, topology)
}

/// Loads a motion for the default 15-joint hand.
pub fn load_motion<T: Real>(path: &Path) -> Result<ReferenceMotion<T>> {
    load_motion_for(path, &build_default_hand())
}

pub fn load_motion_for<T: Real>(path: &Path, topology: &HandTopology<T>) -> Result<ReferenceMotion<T>> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("motion");
    parse_motion(&read_to_string(path)?, topology, stem)
}

/// Serializes `motion` in the reduced (one angle per joint) layout.
pub fn motion_to_string<T: Real>(motion: &ReferenceMotion<T>, topology: &HandTopology<T>) -> String {
    let order = serde_json::to_string(&topology.joint_names()).expect("names serialize");
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"version\": {MOTION_VERSION},\n"));
    out.push_str(&format!(
        "  \"name\": {},\n",
        serde_json::to_string(&motion.name).expect("name serializes")
    ));
    out.push_str(&format!("  \"fps\": {:?},\n", motion.fps.as_f64()));
    out.push_str(&format!("  \"joint_order\": {order},\n"));
    out.push_str("  \"frames\": [\n");
    for (i, f) in motion.frames.iter().enumerate() {
        let row: Vec<f64> = f.iter().map(|v| v.as_f64()).collect();
        out.push_str("    ");
        out.push_str(&serde_json::to_string(&row).expect("frame serializes"));
        out.push_str(if i + 1 < motion.frames.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn write_motion<T: Real>(motion: &ReferenceMotion<T>, topology: &HandTopology<T>, path: &Path) -> Result<()> {
    write_string(path, &motion_to_string(motion, topology))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    Hold,
    Ramp,
    Sinusoid,
}

/// Parameters of a synthetic reference motion.
///
/// * `hold`: every joint at `center`.
/// * `ramp`: linear sweep from `center - amplitude` to `center + amplitude`
///   over `duration`, then the motion loops.
/// * `sinusoid`: `center + amplitude * sin(2 pi frequency t + psi_j)` with
///   per-joint phase offsets `psi_j` drawn from `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub kind: SynthKind,
    #[serde(default = "default_center")]
    pub center: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub frequency: f64,
    pub duration: f64,
    #[serde(default = "default_fps")]
    pub fps: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_center() -> f64 {
    1.0
}

fn default_fps() -> f64 {
    30.0
}

impl SynthSpec {
    pub fn hold(value: f64, duration: f64) -> Self {
        Self {
            kind: SynthKind::Hold,
            center: value,
            amplitude: 0.0,
            frequency: 0.0,
            duration,
            fps: 30.0,
            seed: 0,
        }
    }

    pub fn ramp(center: f64, amplitude: f64, duration: f64) -> Self {
        Self {
            kind: SynthKind::Ramp,
            center,
            amplitude,
            ..Self::hold(center, duration)
        }
    }

    pub fn sinusoid(center: f64, amplitude: f64, frequency: f64, duration: f64, seed: u64) -> Self {
        Self {
            kind: SynthKind::Sinusoid,
            center,
            amplitude,
            frequency,
            duration,
            fps: 30.0,
            seed,
        }
    }
}

/// Deterministic synthetic motion for `topology`.
pub fn synth_motion<T: Real>(spec: &SynthSpec, topology: &HandTopology<T>) -> Result<ReferenceMotion<T>> {
    if !(spec.duration > 0.0 && spec.fps > 0.0 && spec.duration.is_finite() && spec.fps.is_finite()) {
        return Err(Error::InvalidSpec("duration and fps must be positive".into()));
    }
    let amp = match spec.kind {
        SynthKind::Hold => 0.0,
        _ => spec.amplitude.abs(),
    };
    for (lo, hi) in topology.limits() {
        let (lo, hi) = (lo.as_f64(), hi.as_f64());
        if spec.center - amp < lo - 1e-12 || spec.center + amp > hi + 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "motion range [{}, {}] leaves joint limits [{lo}, {hi}]",
                spec.center - amp,
                spec.center + amp
            )));
        }
    }
    let n = topology.joint_count();
    let frames_n = (spec.duration * spec.fps).round() as usize + 1;
    if frames_n < 2 {
        return Err(Error::InvalidSpec("motion shorter than one frame".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let offsets: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
    let span = (frames_n - 1) as f64;
    let frames: Vec<Vec<T>> = (0..frames_n)
        .map(|i| {
            let t = i as f64 / spec.fps;
            (0..n)
                .map(|j| {
                    let v = match spec.kind {
                        SynthKind::Hold => spec.center,
                        SynthKind::Ramp => spec.center + amp * (2.0 * i as f64 / span - 1.0),
                        SynthKind::Sinusoid => {
                            spec.center + amp * (std::f64::consts::TAU * spec.frequency * t + offsets[j]).sin()
                        }
                    };
                    T::lit(v)
                })
                .collect()
        })
        .collect();
    let name = match spec.kind {
        SynthKind::Hold => format!("hold_{}", spec.center),
        SynthKind::Ramp => format!("ramp_{}_{}", spec.center, amp),
        SynthKind::Sinusoid => format!("sinusoid_{}hz_s{}", spec.frequency, spec.seed),
    };
    ReferenceMotion::from_frames(name, T::lit(spec.fps), frames, topology)
}
