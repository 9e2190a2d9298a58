//! Fixed-length evaluation rollouts, the retargeting baseline and
//! multi-seed reporting.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::env::{EnvSpec, ImitationEnv, InitMode};
use crate::error::Result;
use crate::nn::{GaussianPolicy, ObsNormalizer};
use crate::scalar::Real;

/// Default length of an evaluation rollout.
pub const EVAL_STEPS: usize = 2000;

/// What a controller sends the environment on one control step.
#[derive(Debug, Clone, PartialEq)]
pub enum Command<T> {
    /// Joint target with zero desired velocity.
    Pose(Vec<T>),
    /// Joint target with a desired joint velocity.
    Tracking(Vec<T>, Vec<T>),
}

/// Per-step record of a rollout.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RolloutTrace<T> {
    pub rewards: Vec<T>,
    pub pose_errors: Vec<T>,
    pub velocity_errors: Vec<T>,
}

impl<T: Real> RolloutTrace<T> {
    pub fn total_reward(&self) -> T {
        self.rewards.iter().fold(T::zero(), |a, &r| a + r)
    }

    /// CSV with columns step, reward, pose_error, velocity_error (step from 1).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,reward,pose_error,velocity_error\n");
        for (i, ((r, p), v)) in self.rewards.iter().zip(&self.pose_errors).zip(&self.velocity_errors).enumerate() {
            let _ = writeln!(out, "{},{},{},{}", i + 1, r, p, v);
        }
        out
    }
}

/// `spec` with the episode length set to `steps` and the start pinned to
/// phase 0 at rest.
pub fn evaluation_spec<T: Real>(spec: &EnvSpec<T>, steps: usize) -> EnvSpec<T> {
    let mut s = spec.clone();
    s.episode.episode_steps = steps.max(1);
    s.episode.init_mode = InitMode::FixedZero;
    s
}

/// Runs `steps` control steps from phase 0 with `control` choosing each command.
pub fn run_controller<T, F>(spec: &EnvSpec<T>, steps: usize, mut control: F) -> Result<RolloutTrace<T>>
where
    T: Real,
    F: FnMut(&ImitationEnv<T>, &[T]) -> Result<Command<T>>,
{
    let mut trace = RolloutTrace {
        rewards: Vec::with_capacity(steps),
        pose_errors: Vec::with_capacity(steps),
        velocity_errors: Vec::with_capacity(steps),
    };
    if steps == 0 {
        return Ok(trace);
    }
    let mut env = evaluation_spec(spec, steps).build()?;
    let mut obs = env.reset(0);
    for _ in 0..steps {
        let tr = match control(&env, &obs)? {
            Command::Pose(p) => env.step(&p)?,
            Command::Tracking(p, v) => env.step_tracking(&p, Some(&v))?,
        };
        trace.rewards.push(tr.reward);
        trace.pose_errors.push(tr.errors.pose);
        trace.velocity_errors.push(tr.errors.velocity);
        obs = tr.observation;
    }
    Ok(trace)
}

/// Rollout of the deterministic (mean-action) policy.
pub fn policy_trace<T: Real>(
    policy: &GaussianPolicy<T>,
    normalizer: &ObsNormalizer,
    spec: &EnvSpec<T>,
    steps: usize,
) -> Result<RolloutTrace<T>> {
    run_controller(spec, steps, |_, obs| {
        let (_, target) = policy.deterministic(&normalizer.normalize(obs))?;
        Ok(Command::Pose(target))
    })
}

/// Cumulative reward of the deterministic (mean-action) policy over `steps`.
pub fn evaluate<T: Real>(policy: &GaussianPolicy<T>, normalizer: &ObsNormalizer, spec: &EnvSpec<T>, steps: usize) -> Result<T> {
    Ok(policy_trace(policy, normalizer, spec, steps)?.total_reward())
}

/// Ideal retargeting: the upcoming reference pose and velocity drive the PD
/// controller directly.
pub fn retarget_trace<T: Real>(spec: &EnvSpec<T>, steps: usize) -> Result<RolloutTrace<T>> {
    run_controller(spec, steps, |env, _| {
        let (q, v) = env.upcoming_reference();
        Ok(Command::Tracking(q.0, v))
    })
}

/// Cumulative reward of [`retarget_trace`] with the gains in `spec`.
pub fn retarget_baseline<T: Real>(spec: &EnvSpec<T>, steps: usize) -> Result<T> {
    Ok(retarget_trace(spec, steps)?.total_reward())
}

/// Mean per-step reward of uniformly random joint targets.
pub fn random_baseline<T: Real>(spec: &EnvSpec<T>, steps: usize, seed: u64) -> Result<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limits: Vec<(T, T)> = spec.topology.limits().collect();
    let trace = run_controller(spec, steps, |_, _| {
        Ok(Command::Pose(
            limits
                .iter()
                .map(|&(lo, hi)| T::lit(rng.random_range(lo.as_f64()..=hi.as_f64())))
                .collect(),
        ))
    })?;
    Ok(trace.total_reward() / T::from_usize_lossy(steps.max(1)))
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One row of the retargeting / PPO / SAC comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub motion: String,
    pub retargeting: f64,
    pub ppo: Option<(f64, f64)>,
    pub sac: Option<(f64, f64)>,
}

impl ComparisonRow {
    pub fn from_runs(motion: &str, retargeting: f64, ppo: &[f64], sac: &[f64]) -> Self {
        let stat = |v: &[f64]| (!v.is_empty()).then(|| mean_std(v));
        Self {
            motion: motion.to_string(),
            retargeting,
            ppo: stat(ppo),
            sac: stat(sac),
        }
    }
}

/// Published comparison for the six fingerspelled letters, for rendering
/// alongside local runs.
pub fn published_comparison() -> Vec<ComparisonRow> {
    let rows: [(&str, f64, (f64, f64), (f64, f64)); 6] = [
        ("A", 1905.0, (1700.0, 106.0), (1661.0, 62.0)),
        ("B", 1941.0, (1920.0, 35.0), (1878.0, 186.0)),
        ("C", 1899.0, (1833.0, 37.0), (1873.0, 34.0)),
        ("D", 1876.0, (1828.0, 32.0), (1887.0, 19.0)),
        ("E", 1915.0, (1705.0, 87.0), (1803.0, 98.0)),
        ("F", 1915.0, (1893.0, 38.0), (1929.0, 57.0)),
    ];
    rows.iter()
        .map(|&(m, r, p, s)| ComparisonRow {
            motion: m.to_string(),
            retargeting: r,
            ppo: Some(p),
            sac: Some(s),
        })
        .collect()
}

fn cell(v: Option<(f64, f64)>) -> String {
    match v {
        Some((m, s)) => format!("{m:.0} ± {s:.0}"),
        None => "-".to_string(),
    }
}

/// Plain-text table with columns Motion, Retargeting, PPO, SAC.
pub fn render_comparison(rows: &[ComparisonRow]) -> String {
    let body: Vec<[String; 4]> = rows
        .iter()
        .map(|r| [r.motion.clone(), format!("{:.0}", r.retargeting), cell(r.ppo), cell(r.sac)])
        .collect();
    let header = ["Motion", "Retargeting", "PPO", "SAC"].map(String::from);
    let mut widths = header.clone().map(|h| h.chars().count());
    for row in &body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cols: &[String; 4]| {
        let cells: Vec<String> = cols
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    };
    line(&mut out, &header);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    let _ = writeln!(out, "|-{}-|", rule.join("-|-"));
    for row in &body {
        line(&mut out, row);
    }
    out
}

/// CSV with columns motion, retargeting, ppo_mean, ppo_std, sac_mean, sac_std.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("motion,retargeting,ppo_mean,ppo_std,sac_mean,sac_std\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.motion,
            r.retargeting,
            opt(r.ppo.map(|p| p.0)),
            opt(r.ppo.map(|p| p.1)),
            opt(r.sac.map(|p| p.0)),
            opt(r.sac.map(|p| p.1))
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_examples() {
        assert_eq!(mean_std(&[2.0, 4.0]), (3.0, 1.0));
        assert_eq!(mean_std(&[5.0]), (5.0, 0.0));
    }

    #[test]
    fn published_table_layout() {
        let rows = published_comparison();
        let retarget: Vec<f64> = rows.iter().map(|r| r.retargeting).collect();
        assert_eq!(retarget, vec![1905.0, 1941.0, 1899.0, 1876.0, 1915.0, 1915.0]);
        let text = render_comparison(&rows);
        assert!(text.starts_with("| Motion | Retargeting |"));
        assert!(text.contains("| A      | 1905        | 1700 ± 106 | 1661 ± 62  |"), "{text}");
        assert_eq!(comparison_csv(&rows).lines().count(), 7);
    }
}
