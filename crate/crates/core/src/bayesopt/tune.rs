//! Bayesian tuning of the PD gains over `[0, B]^2`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::acquisition::{maximize_ei, AcquisitionOptions};
use super::gp::GpModel;
use super::objective::control_objective;
use super::optim::halton_points;
use crate::analysis::pearson;
use crate::dynamics::PdGains;
use crate::env::EnvSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Upper bounds of the three published sweeps.
pub const SWEEP_BOUNDS: [f64; 3] = [100.0, 10.0, 1.0];

/// Published (bound, PCC of kp vs error, PCC of kd vs error) per sweep. These
/// depend on the original engine and are kept for side-by-side reports only.
pub const PUBLISHED_SWEEP_PCC: [(f64, f64, f64); 3] = [(100.0, -0.44, 0.45), (10.0, 0.71, 0.71), (1.0, 0.51, -0.49)];

/// Floor applied before taking logs of the objective.
const LOG_FLOOR: f64 = 1e-12;

/// Box `kp, kd in [0, bound]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepBounds {
    pub bound: f64,
}

impl SweepBounds {
    pub fn new(bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::InvalidSpec(format!("sweep bound must be positive, got {bound}")));
        }
        Ok(Self { bound })
    }

    pub fn gains(&self, unit: &[f64]) -> (f64, f64) {
        (unit[0] * self.bound, unit[1] * self.bound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuneConfig {
    /// Total objective evaluations.
    pub budget: usize,
    /// Quasi-random evaluations before the GP takes over.
    pub initial_points: usize,
    /// Points proposed per GP fit (constant-liar batches when > 1).
    pub batch: usize,
    /// Threads evaluating one batch.
    pub workers: usize,
    pub seed: u64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            budget: 60,
            initial_points: 5,
            batch: 1,
            workers: 1,
            seed: 0,
        }
    }
}

impl TuneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_points < 1 || self.budget < self.initial_points.max(5) {
            return Err(Error::InvalidSpec(format!(
                "tuning budget must be at least 5 and cover the {} initial points (got {})",
                self.initial_points, self.budget
            )));
        }
        if self.batch == 0 || self.workers == 0 {
            return Err(Error::InvalidSpec("batch and workers must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub kp: f64,
    pub kd: f64,
    pub epsilon: f64,
    /// Lowest epsilon so far.
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneResult {
    pub bound: f64,
    pub best: PdGains<f64>,
    pub best_epsilon: f64,
    pub trace: Vec<TraceRow>,
    /// PCC of kp against epsilon over the trace; `None` if undefined.
    pub pcc_kp: Option<f64>,
    pub pcc_kd: Option<f64>,
}

impl TuneResult {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,kp,kd,epsilon,best\n");
        for r in &self.trace {
            let _ = writeln!(out, "{},{},{},{},{}", r.iter, r.kp, r.kd, r.epsilon, r.best);
        }
        out
    }

    pub fn summary(&self) -> String {
        let pcc = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "undefined".into());
        format!(
            "bound {}: best kp = {:.4}, kd = {:.4}, epsilon = {:.6} after {} evaluations; PCC kp {} kd {}",
            self.bound,
            self.best.kp,
            self.best.kd,
            self.best_epsilon,
            self.trace.len(),
            pcc(self.pcc_kp),
            pcc(self.pcc_kd)
        )
    }
}

fn mix(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k.wrapping_mul(0xBF58_476D_1CE4_E5B9))
}

fn evaluate_batch<T: Real>(spec: &EnvSpec<T>, bounds: SweepBounds, points: &[Vec<f64>], workers: usize) -> Vec<f64> {
    let eval = |u: &Vec<f64>| {
        let (kp, kd) = bounds.gains(u);
        control_objective(spec, PdGains { kp: T::lit(kp), kd: T::lit(kd) })
    };
    if workers <= 1 || points.len() <= 1 {
        return points.iter().map(eval).collect();
    }
    let chunk = points.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(eval).collect::<Vec<f64>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("objective worker panicked"))
            .collect()
    })
}

/// Minimizes [`control_objective`] over `[0, B]^2`: quasi-random seeding, then
/// GP (on log epsilon) plus expected improvement.
pub fn tune_controller<T: Real>(spec: &EnvSpec<T>, bounds: SweepBounds, cfg: &TuneConfig) -> Result<TuneResult> {
    cfg.validate()?;
    spec.validate()?;
    let mut xs: Vec<Vec<f64>> = halton_points(cfg.initial_points, 2, cfg.seed);
    let mut eps = evaluate_batch(spec, bounds, &xs, cfg.workers);
    let acq = AcquisitionOptions::default();
    let mut round = 0u64;
    while xs.len() < cfg.budget {
        round += 1;
        let q = cfg.batch.min(cfg.budget - xs.len());
        let mut lx = xs.clone();
        let mut ly: Vec<f64> = eps.iter().map(|e| e.max(LOG_FLOOR).ln()).collect();
        let best = ly.iter().copied().fold(f64::INFINITY, f64::min);
        let mut proposals = Vec::with_capacity(q);
        for j in 0..q {
            let model = GpModel::fit_auto(lx.clone(), ly.clone(), 2, mix(cfg.seed, round))?;
            let (x, _) = maximize_ei(&model, best, 2, mix(cfg.seed, round * 64 + j as u64 + 1), &acq);
            lx.push(x.clone());
            ly.push(best);
            proposals.push(x);
        }
        let values = evaluate_batch(spec, bounds, &proposals, cfg.workers);
        xs.extend(proposals);
        eps.extend(values);
    }

    let mut trace = Vec::with_capacity(xs.len());
    let mut best = f64::INFINITY;
    for (i, (u, &e)) in xs.iter().zip(&eps).enumerate() {
        best = best.min(e);
        let (kp, kd) = bounds.gains(u);
        trace.push(TraceRow {
            iter: i + 1,
            kp,
            kd,
            epsilon: e,
            best,
        });
    }
    let inc = trace
        .iter()
        .min_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
        .copied()
        .expect("budget is positive");
    let col = |f: fn(&TraceRow) -> f64| trace.iter().map(f).collect::<Vec<f64>>();
    let e = col(|r| r.epsilon);
    Ok(TuneResult {
        bound: bounds.bound,
        best: PdGains { kp: inc.kp, kd: inc.kd },
        best_epsilon: inc.epsilon,
        pcc_kp: pearson(&col(|r| r.kp), &e).ok(),
        pcc_kd: pearson(&col(|r| r.kd), &e).ok(),
        trace,
    })
}

/// One tuning run per bound in [`SWEEP_BOUNDS`].
pub fn three_bound_sweep<T: Real>(spec: &EnvSpec<T>, cfg: &TuneConfig) -> Result<Vec<TuneResult>> {
    SWEEP_BOUNDS
        .iter()
        .map(|&b| tune_controller(spec, SweepBounds::new(b)?, cfg))
        .collect()
}

/// Dense-grid minimum of the objective over `[0, B]^2` with `n` points per axis.
pub fn grid_minimum<T: Real>(spec: &EnvSpec<T>, bounds: SweepBounds, n: usize, workers: usize) -> (PdGains<f64>, f64) {
    let n = n.max(2);
    let pts: Vec<Vec<f64>> = (0..n * n)
        .map(|k| vec![(k / n) as f64 / (n - 1) as f64, (k % n) as f64 / (n - 1) as f64])
        .collect();
    let vals = evaluate_batch(spec, bounds, &pts, workers);
    let (i, v) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .expect("grid is non-empty");
    let (kp, kd) = bounds.gains(&pts[i]);
    (PdGains { kp, kd }, v)
}
