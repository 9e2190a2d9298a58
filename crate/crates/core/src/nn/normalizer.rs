use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Running mean/variance observation normalizer. Statistics are kept in
/// `f64`; updates stop once frozen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsNormalizer {
    pub enabled: bool,
    pub frozen: bool,
    pub clip: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: f64,
}

impl ObsNormalizer {
    pub fn new(dim: usize, enabled: bool) -> Self {
        Self {
            enabled,
            frozen: false,
            clip: 10.0,
            mean: vec![0.0; dim],
            var: vec![1.0; dim],
            count: 1e-4,
        }
    }

    pub fn update<T: Real>(&mut self, x: &[T]) {
        if !self.enabled || self.frozen {
            return;
        }
        // single-sample parallel-variance merge
        let new_count = self.count + 1.0;
        for i in 0..self.mean.len() {
            let v = x[i].as_f64();
            let delta = v - self.mean[i];
            let mean = self.mean[i] + delta / new_count;
            let m2 = self.var[i] * self.count + delta * delta * self.count / new_count;
            self.mean[i] = mean;
            self.var[i] = m2 / new_count;
        }
        self.count = new_count;
    }

    pub fn normalize<T: Real>(&self, x: &[T]) -> Vec<T> {
        if !self.enabled {
            return x.to_vec();
        }
        x.iter()
            .enumerate()
            .map(|(i, v)| {
                let z = (v.as_f64() - self.mean[i]) / (self.var[i] + 1e-8).sqrt();
                T::lit(z.clamp(-self.clip, self.clip))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_batch_statistics() {
        let mut n = ObsNormalizer::new(2, true);
        let data: Vec<[f64; 2]> = (0..200).map(|i| [i as f64 * 0.1, (i as f64).sin()]).collect();
        for d in &data {
            n.update(d);
        }
        for k in 0..2 {
            let mean = data.iter().map(|d| d[k]).sum::<f64>() / 200.0;
            let var = data.iter().map(|d| (d[k] - mean).powi(2)).sum::<f64>() / 200.0;
            assert!((n.mean[k] - mean).abs() < 1e-4);
            assert!((n.var[k] - var).abs() / var < 1e-3);
        }
    }

    #[test]
    fn frozen_and_disabled() {
        let mut n = ObsNormalizer::new(1, true);
        n.frozen = true;
        n.update(&[5.0f64]);
        assert_eq!(n.mean, vec![0.0]);
        let off = ObsNormalizer::new(1, false);
        assert_eq!(off.normalize(&[123.0f64]), vec![123.0]);
    }
}
