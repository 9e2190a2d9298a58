use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mlp::MlpLayout;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    /// Orthogonal weights with per-layer gain, zero biases.
    #[default]
    Orthogonal,
    /// `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` for weights and biases.
    UniformFanIn,
}

/// Orthogonal `rows x cols` matrix (row-major) scaled by `gain`: orthonormal
/// columns when tall, orthonormal rows when wide.
pub fn orthogonal_matrix(rows: usize, cols: usize, gain: f64, rng: &mut impl Rng) -> Vec<f64> {
    let (m, n) = if rows >= cols { (rows, cols) } else { (cols, rows) };
    let a = DMatrix::<f64>::from_fn(m, n, |_, _| rng.sample(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    // sign convention making the decomposition unique
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let v = if rows >= cols { q[(i, j)] } else { q[(j, i)] };
            out[i * cols + j] = gain * v;
        }
    }
    out
}

/// Fills `params` for `layout`. `hidden_gain` applies to hidden layers and
/// `output_gain` to the last layer under the orthogonal scheme.
pub fn init_mlp<T: Real>(layout: &MlpLayout, scheme: InitScheme, hidden_gain: f64, output_gain: f64, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = vec![T::zero(); layout.param_count()];
    for l in 0..layout.layer_count() {
        let (fan_in, fan_out) = layout.layer_shape(l);
        let off = layout.layer_offset(l);
        let (w, rest) = params[off..].split_at_mut(fan_in * fan_out);
        let b = &mut rest[..fan_out];
        match scheme {
            InitScheme::Orthogonal => {
                let gain = if l + 1 == layout.layer_count() { output_gain } else { hidden_gain };
                for (dst, v) in w.iter_mut().zip(orthogonal_matrix(fan_out, fan_in, gain, &mut rng)) {
                    *dst = T::lit(v);
                }
                b.iter_mut().for_each(|v| *v = T::zero());
            }
            InitScheme::UniformFanIn => {
                let bound = 1.0 / (fan_in as f64).sqrt();
                for v in w.iter_mut().chain(b.iter_mut()) {
                    *v = T::lit(rng.random_range(-bound..bound));
                }
            }
        }
    }
    params
}
