use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Adaptive-moment optimizer with decoupled weight decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    pub weight_decay: T,
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Real> Adam<T> {
    pub fn new(n: usize, lr: T, weight_decay: T) -> Self {
        Self {
            lr,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            weight_decay,
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// Descends along `grads`.
    pub fn step(&mut self, params: &mut [T], grads: &[T]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let one = T::one();
        let bc1 = one - self.beta1.powi(self.t);
        let bc2 = one - self.beta2.powi(self.t);
        let step = self.lr / bc1;
        let decay = one - self.lr * self.weight_decay;
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (one - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (one - self.beta2) * g * g;
            let denom = (self.v[i] / bc2).sqrt() + self.eps;
            params[i] = params[i] * decay - step * self.m[i] / denom;
        }
    }
}

/// Scales `grads` in place so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_grad_norm<T: Real>(grads: &mut [&mut [T]], max_norm: T) -> T {
    let sq = grads
        .iter()
        .flat_map(|g| g.iter())
        .fold(T::zero(), |acc, &v| acc + v * v);
    let norm = sq.sqrt();
    if norm > max_norm {
        let s = max_norm / (norm + T::lit(1e-6));
        for g in grads.iter_mut() {
            g.iter_mut().for_each(|v| *v = *v * s);
        }
    }
    norm
}

/// `target <- tau * online + (1 - tau) * target`.
pub fn polyak_update<T: Real>(target: &mut [T], online: &[T], tau: T) {
    let keep = T::one() - tau;
    for (t, &o) in target.iter_mut().zip(online) {
        *t = tau * o + keep * *t;
    }
}
