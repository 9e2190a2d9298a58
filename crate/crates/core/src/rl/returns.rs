//! Discounted returns and generalized advantage estimation.

use crate::scalar::Real;

/// `R_t = sum_k gamma^k r_{t+k}` over a single episode.
pub fn discounted_return<T: Real>(rewards: &[T], gamma: T) -> Vec<T> {
    let mut out = vec![T::zero(); rewards.len()];
    let mut acc = T::zero();
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + gamma * acc;
        out[t] = acc;
    }
    out
}

/// GAE over a contiguous rollout.
///
/// `dones[t]` marks that transition `t` ended its episode, so nothing is
/// bootstrapped across it; `last_value` is `V` of the state after the final
/// transition. Returns `(advantages, returns)` with `returns = A + V`.
pub fn gae_advantages<T: Real>(
    rewards: &[T],
    values: &[T],
    dones: &[bool],
    last_value: T,
    gamma: T,
    lambda: T,
) -> (Vec<T>, Vec<T>) {
    let n = rewards.len();
    assert!(values.len() == n && dones.len() == n, "rollout columns differ in length");
    let mut adv = vec![T::zero(); n];
    let mut next_adv = T::zero();
    for t in (0..n).rev() {
        let next_value = if t + 1 < n { values[t + 1] } else { last_value };
        let live = if dones[t] { T::zero() } else { T::one() };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[t] = next_adv;
    }
    let ret = adv.iter().zip(values).map(|(&a, &v)| a + v).collect();
    (adv, ret)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_ones() {
        let r = discounted_return(&[1.0f64, 1.0, 1.0], 0.9);
        assert_eq!(r[0], 2.71);
        assert_eq!(r, vec![2.71, 1.9, 1.0]);
    }

    #[test]
    fn gamma_extremes() {
        let r = [0.3f64, -1.0, 2.0];
        assert_eq!(discounted_return(&r, 0.0), r.to_vec());
        assert_eq!(discounted_return(&[1.0f64; 7], 1.0)[0], 7.0);
    }

    #[test]
    fn single_step_recursion_base() {
        let (a, _) = gae_advantages(&[0.5f64], &[0.2], &[false], 0.7, 0.9, 0.95);
        assert!((a[0] - (0.5 + 0.9 * 0.7 - 0.2)).abs() < 1e-15);
        let (a, _) = gae_advantages(&[0.5f64], &[0.2], &[true], 0.7, 0.9, 0.95);
        assert!((a[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_value_lambda_one_gives_returns() {
        let r = [0.1f64, 0.4, -0.2, 1.0, 0.3];
        let (a, _) = gae_advantages(&r, &[0.0; 5], &[false, false, false, false, true], 9.0, 0.97, 1.0);
        let ret = discounted_return(&r, 0.97);
        for (x, y) in a.iter().zip(ret) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
