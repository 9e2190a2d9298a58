//! Exact Gaussian-process regression with a squared-exponential kernel on
//! inputs scaled to the unit box.

use nalgebra::{DMatrix, DVector};

use super::optim::{halton_points, nelder_mead, NelderMeadOptions};
use crate::error::{Error, Result};

const JITTER_LADDER: [f64; 7] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2];
const LOG_LENGTH: (f64, f64) = (-3.912_023_005_428_146, 1.609_437_912_434_100_3); // ln 0.02, ln 5
const LOG_SIGNAL: (f64, f64) = (-2.995_732_273_553_991, 2.995_732_273_553_991); // ln 0.05, ln 20

/// Kernel hyperparameters, in standardized-target units.
#[derive(Debug, Clone, PartialEq)]
pub struct GpHyper {
    pub length_scales: Vec<f64>,
    pub signal_variance: f64,
    pub noise: f64,
}

impl GpHyper {
    pub fn isotropic(dim: usize, length: f64, signal_variance: f64, noise: f64) -> Self {
        Self {
            length_scales: vec![length; dim],
            signal_variance,
            noise,
        }
    }

    /// Used when marginal-likelihood fitting fails: length 0.2 of the box.
    pub fn fallback(dim: usize) -> Self {
        Self::isotropic(dim, 0.2, 1.0, 1e-6)
    }

    fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a
            .iter()
            .zip(b)
            .zip(&self.length_scales)
            .map(|((x, y), l)| ((x - y) / l).powi(2))
            .sum();
        self.signal_variance * (-0.5 * r2).exp()
    }
}

/// Fitted posterior. Targets are standardized internally; predictions are in
/// the caller's units, so the prior mean is the sample mean of `y`.
#[derive(Debug, Clone)]
pub struct GpModel {
    pub hyper: GpHyper,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub jitter: f64,
    y_mean: f64,
    y_scale: f64,
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
}

impl GpModel {
    pub fn fit(x: Vec<Vec<f64>>, y: Vec<f64>, hyper: GpHyper) -> Result<Self> {
        let n = x.len();
        if y.len() != n {
            return Err(Error::Dimension {
                context: "gp targets",
                expected: n,
                found: y.len(),
            });
        }
        let dim = hyper.length_scales.len();
        if let Some(bad) = x.iter().find(|r| r.len() != dim) {
            return Err(Error::Dimension {
                context: "gp input",
                expected: dim,
                found: bad.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("gp targets must be finite".into()));
        }
        let (y_mean, y_scale) = standardization(&y);
        let z = DVector::from_iterator(n, y.iter().map(|v| (v - y_mean) / y_scale));
        let base = DMatrix::from_fn(n, n, |i, j| hyper.kernel(&x[i], &x[j]));
        let mut last = 0.0;
        for rel in JITTER_LADDER {
            let jitter = rel * hyper.signal_variance;
            last = jitter;
            let mut k = base.clone();
            for i in 0..n {
                k[(i, i)] += hyper.noise + jitter;
            }
            if let Some(ch) = k.cholesky() {
                let alpha = ch.solve(&z);
                return Ok(Self {
                    hyper,
                    x,
                    y,
                    jitter,
                    y_mean,
                    y_scale,
                    chol: ch.unpack(),
                    alpha,
                });
            }
        }
        Err(Error::SingularKernel { jitter: last })
    }

    /// Hyperparameters by multistart maximization of the log marginal
    /// likelihood, falling back to [`GpHyper::fallback`].
    pub fn fit_auto(x: Vec<Vec<f64>>, y: Vec<f64>, dim: usize, seed: u64) -> Result<Self> {
        if x.len() < 2 {
            return Self::fit(x, y, GpHyper::fallback(dim));
        }
        let noise = 1e-6;
        let unpack = |t: &[f64]| GpHyper {
            length_scales: t[..dim].iter().map(|v| v.exp()).collect(),
            signal_variance: t[dim].exp(),
            noise,
        };
        let nll = |t: &[f64]| match Self::fit(x.clone(), y.clone(), unpack(t)) {
            Ok(m) => -m.log_marginal_likelihood(),
            Err(_) => f64::INFINITY,
        };
        let mut lo = vec![LOG_LENGTH.0; dim];
        let mut hi = vec![LOG_LENGTH.1; dim];
        lo.push(LOG_SIGNAL.0);
        hi.push(LOG_SIGNAL.1);
        let mut starts = vec![{
            let mut t = vec![0.2f64.ln(); dim];
            t.push(0.0);
            t
        }];
        for u in halton_points(4, dim + 1, seed) {
            starts.push(u.iter().zip(lo.iter().zip(&hi)).map(|(u, (l, h))| l + u * (h - l)).collect());
        }
        let opts = NelderMeadOptions {
            max_evals: 120,
            ftol: 1e-6,
            initial_step: 0.1,
        };
        let best = starts
            .iter()
            .map(|s| nelder_mead(nll, s, &lo, &hi, &opts))
            .min_by(|a, b| a.value.total_cmp(&b.value));
        match best {
            Some(m) if m.value.is_finite() => Self::fit(x, y, unpack(&m.x)),
            _ => Self::fit(x, y, GpHyper::fallback(dim)),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Posterior mean and variance at `x`.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let n = self.len();
        let s2 = self.y_scale * self.y_scale;
        if n == 0 {
            return (self.y_mean, self.hyper.signal_variance * s2);
        }
        let ks = DVector::from_iterator(n, self.x.iter().map(|xi| self.hyper.kernel(xi, x)));
        let mu = ks.dot(&self.alpha);
        let v = self
            .chol
            .solve_lower_triangular(&ks)
            .expect("cholesky factor has a positive diagonal");
        let var = (self.hyper.signal_variance - v.dot(&v)).max(0.0);
        (self.y_mean + self.y_scale * mu, var * s2)
    }

    /// Log marginal likelihood of the standardized targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.len();
        let z = DVector::from_iterator(n, self.y.iter().map(|v| (v - self.y_mean) / self.y_scale));
        let log_det: f64 = (0..n).map(|i| self.chol[(i, i)].ln()).sum();
        -0.5 * z.dot(&self.alpha) - log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
    }

    /// Mean and scale used to standardize targets.
    pub fn standardization(&self) -> (f64, f64) {
        (self.y_mean, self.y_scale)
    }
}

fn standardization(y: &[f64]) -> (f64, f64) {
    if y.is_empty() {
        return (0.0, 1.0);
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    (mean, if sd > 1e-12 { sd } else { 1.0 })
}
