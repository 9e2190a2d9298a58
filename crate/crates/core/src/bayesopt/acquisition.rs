//! Expected improvement for minimization and its maximization over the unit box.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::gp::GpModel;
use super::optim::{halton_points, nelder_mead, NelderMeadOptions};

/// Closed-form EI of `Y ~ N(mu, var)` below `best`. With zero variance this is
/// `max(best - mu, 0)`.
pub fn expected_improvement(mu: f64, var: f64, best: f64) -> f64 {
    let sigma = var.max(0.0).sqrt();
    let gain = best - mu;
    if sigma < 1e-12 {
        return gain.max(0.0);
    }
    let n = Normal::standard();
    let z = gain / sigma;
    (gain * n.cdf(z) + sigma * n.pdf(z)).max(0.0)
}

/// EI of the model posterior at `x`.
pub fn model_ei(model: &GpModel, x: &[f64], best: f64) -> f64 {
    let (mu, var) = model.predict(x);
    expected_improvement(mu, var, best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionOptions {
    /// Quasi-random screening points.
    pub pool: usize,
    /// Best pool points refined by Nelder-Mead.
    pub starts: usize,
    pub evals_per_start: usize,
}

impl Default for AcquisitionOptions {
    fn default() -> Self {
        Self {
            pool: 512,
            starts: 5,
            evals_per_start: 80,
        }
    }
}

/// Maximizes EI over `[0, 1]^dim`: screens a shifted Halton pool, then refines
/// the best candidates with Nelder-Mead. Returns the point and its EI.
pub fn maximize_ei(model: &GpModel, best: f64, dim: usize, seed: u64, opts: &AcquisitionOptions) -> (Vec<f64>, f64) {
    let mut pool: Vec<(Vec<f64>, f64)> = halton_points(opts.pool.max(1), dim, seed)
        .into_iter()
        .map(|x| {
            let v = model_ei(model, &x, best);
            (x, v)
        })
        .collect();
    pool.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (lo, hi) = (vec![0.0; dim], vec![1.0; dim]);
    let nm = NelderMeadOptions {
        max_evals: opts.evals_per_start,
        ftol: 1e-12,
        initial_step: 0.05,
    };
    let mut incumbent = pool[0].clone();
    for (x0, _) in pool.iter().take(opts.starts) {
        let m = nelder_mead(|x| -model_ei(model, x, best), x0, &lo, &hi, &nm);
        if -m.value > incumbent.1 {
            incumbent = (m.x, -m.value);
        }
    }
    incumbent
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_cases() {
        assert_eq!(expected_improvement(1.0, 0.0, 1.0), 0.0);
        assert_eq!(expected_improvement(0.0, 0.0, 1.0), 1.0);
        assert_eq!(expected_improvement(2.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn symmetric_case() {
        // mu = best: EI = sigma * phi(0)
        let ei = expected_improvement(0.0, 4.0, 0.0);
        assert!((ei - 2.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }
}
