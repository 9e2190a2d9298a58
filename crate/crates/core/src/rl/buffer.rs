use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;

use super::returns::gae_advantages;
use crate::scalar::Real;

/// On-policy rollout of contiguous steps, stored row-major.
#[derive(Debug, Clone)]
pub struct RolloutBuffer<T> {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub observations: Vec<T>,
    pub actions: Vec<T>,
    pub rewards: Vec<T>,
    pub log_probs: Vec<T>,
    pub values: Vec<T>,
    pub dones: Vec<bool>,
    pub advantages: Vec<T>,
    pub returns: Vec<T>,
}

/// Gathered rows of a rollout.
#[derive(Debug, Clone)]
pub struct RolloutBatch<T> {
    pub observations: Array2<T>,
    pub actions: Array2<T>,
    pub log_probs: Vec<T>,
    pub advantages: Vec<T>,
    pub returns: Vec<T>,
}

impl<T: Real> RolloutBuffer<T> {
    pub fn new(obs_dim: usize, act_dim: usize) -> Self {
        Self {
            obs_dim,
            act_dim,
            observations: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            log_probs: Vec::new(),
            values: Vec::new(),
            dones: Vec::new(),
            advantages: Vec::new(),
            returns: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn clear(&mut self) {
        self.observations.clear();
        self.actions.clear();
        self.rewards.clear();
        self.log_probs.clear();
        self.values.clear();
        self.dones.clear();
        self.advantages.clear();
        self.returns.clear();
    }

    pub fn push(&mut self, obs: &[T], action: &[T], reward: T, log_prob: T, value: T, done: bool) {
        debug_assert_eq!(obs.len(), self.obs_dim);
        debug_assert_eq!(action.len(), self.act_dim);
        self.observations.extend_from_slice(obs);
        self.actions.extend_from_slice(action);
        self.rewards.push(reward);
        self.log_probs.push(log_prob);
        self.values.push(value);
        self.dones.push(done);
    }

    /// Fills advantages and returns.
    pub fn finish(&mut self, last_value: T, gamma: T, lambda: T) {
        let (a, r) = gae_advantages(&self.rewards, &self.values, &self.dones, last_value, gamma, lambda);
        self.advantages = a;
        self.returns = r;
    }

    pub fn observations_view(&self) -> ArrayView2<'_, T> {
        ArrayView2::from_shape((self.len(), self.obs_dim), &self.observations).expect("buffer layout")
    }

    pub fn gather(&self, idx: &[usize]) -> RolloutBatch<T> {
        let rows = |src: &[T], width: usize| {
            Array2::from_shape_fn((idx.len(), width), |(r, c)| src[idx[r] * width + c])
        };
        RolloutBatch {
            observations: rows(&self.observations, self.obs_dim),
            actions: rows(&self.actions, self.act_dim),
            log_probs: idx.iter().map(|&i| self.log_probs[i]).collect(),
            advantages: idx.iter().map(|&i| self.advantages[i]).collect(),
            returns: idx.iter().map(|&i| self.returns[i]).collect(),
        }
    }

    /// Shuffled minibatch index sets covering the buffer once; the last one
    /// may be short.
    pub fn minibatches(&self, batch_size: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(rng);
        idx.chunks(batch_size.max(1)).map(|c| c.to_vec()).collect()
    }
}

/// Fixed-capacity ring buffer of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    pub capacity: usize,
    pub obs_dim: usize,
    pub act_dim: usize,
    observations: Vec<T>,
    actions: Vec<T>,
    rewards: Vec<T>,
    next_observations: Vec<T>,
    dones: Vec<bool>,
    pos: usize,
    len: usize,
}

#[derive(Debug, Clone)]
pub struct ReplayBatch<T> {
    pub observations: Array2<T>,
    pub actions: Array2<T>,
    pub rewards: Vec<T>,
    pub next_observations: Array2<T>,
    pub dones: Vec<bool>,
}

impl<T: Real> ReplayBuffer<T> {
    pub fn new(capacity: usize, obs_dim: usize, act_dim: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            obs_dim,
            act_dim,
            observations: vec![T::zero(); capacity * obs_dim],
            actions: vec![T::zero(); capacity * act_dim],
            rewards: vec![T::zero(); capacity],
            next_observations: vec![T::zero(); capacity * obs_dim],
            dones: vec![false; capacity],
            pos: 0,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Stores a transition, overwriting the oldest once full.
    pub fn push(&mut self, obs: &[T], action: &[T], reward: T, next_obs: &[T], done: bool) {
        let (o, a, p) = (self.obs_dim, self.act_dim, self.pos);
        self.observations[p * o..(p + 1) * o].copy_from_slice(obs);
        self.actions[p * a..(p + 1) * a].copy_from_slice(action);
        self.rewards[p] = reward;
        self.next_observations[p * o..(p + 1) * o].copy_from_slice(next_obs);
        self.dones[p] = done;
        self.pos = (p + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
    }

    pub fn gather(&self, idx: &[usize]) -> ReplayBatch<T> {
        let rows = |src: &[T], width: usize| {
            Array2::from_shape_fn((idx.len(), width), |(r, c)| src[idx[r] * width + c])
        };
        ReplayBatch {
            observations: rows(&self.observations, self.obs_dim),
            actions: rows(&self.actions, self.act_dim),
            rewards: idx.iter().map(|&i| self.rewards[i]).collect(),
            next_observations: rows(&self.next_observations, self.obs_dim),
            dones: idx.iter().map(|&i| self.dones[i]).collect(),
        }
    }

    /// Uniform sample with replacement over the stored transitions.
    pub fn sample(&self, batch: usize, rng: &mut impl Rng) -> ReplayBatch<T> {
        let idx: Vec<usize> = (0..batch).map(|_| rng.random_range(0..self.len)).collect();
        self.gather(&idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn replay_overwrites_oldest() {
        let mut rb = ReplayBuffer::<f64>::new(3, 1, 1);
        for i in 0..5 {
            let x = i as f64;
            rb.push(&[x], &[x], x, &[x + 1.0], false);
        }
        assert_eq!(rb.len(), 3);
        let b = rb.gather(&[0, 1, 2]);
        assert_eq!(b.rewards, vec![3.0, 4.0, 2.0]);
    }

    #[test]
    fn replay_sampling_is_uniform() {
        let mut rb = ReplayBuffer::<f64>::new(4, 1, 1);
        for i in 0..4 {
            rb.push(&[0.0], &[0.0], i as f64, &[0.0], false);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut counts = [0usize; 4];
        for _ in 0..100 {
            for r in rb.sample(40, &mut rng).rewards {
                counts[r as usize] += 1;
            }
        }
        assert!(counts.iter().all(|&c| (900..1100).contains(&c)), "{counts:?}");
    }

    #[test]
    fn minibatches_cover_buffer() {
        let mut buf = RolloutBuffer::<f64>::new(2, 1);
        for i in 0..10 {
            buf.push(&[i as f64, 0.0], &[0.0], 1.0, 0.0, 0.0, false);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mbs = buf.minibatches(4, &mut rng);
        assert_eq!(mbs.iter().map(|m| m.len()).collect::<Vec<_>>(), vec![4, 4, 2]);
        let mut all: Vec<usize> = mbs.concat();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        buf.finish(0.0, 0.9, 0.95);
        let b = buf.gather(&[3, 7]);
        assert_eq!(b.observations[[1, 0]], 7.0);
    }
}
