//! Diagonal Gaussian action distributions, plain and tanh-squashed.

use crate::scalar::Real;

#[inline]
fn half_ln_two_pi<T: Real>() -> T {
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln())
}

/// `log N(action; mean, exp(log_std)^2)` summed over dimensions.
pub fn log_prob<T: Real>(mean: &[T], log_std: &[T], action: &[T]) -> T {
    let half = T::lit(0.5);
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((&m, &ls), &a)| {
            let z = (a - m) / ls.exp();
            -half * z * z - ls - half_ln_two_pi()
        })
        .fold(T::zero(), |acc, v| acc + v)
}

/// Accumulates `scale * d log_prob / d(mean, log_std)`.
pub fn log_prob_grad<T: Real>(mean: &[T], log_std: &[T], action: &[T], scale: T, d_mean: &mut [T], d_log_std: &mut [T]) {
    for i in 0..mean.len() {
        let inv_var = (-(log_std[i] + log_std[i])).exp();
        let diff = action[i] - mean[i];
        d_mean[i] = d_mean[i] + scale * diff * inv_var;
        d_log_std[i] = d_log_std[i] + scale * (diff * diff * inv_var - T::one());
    }
}

/// Differential entropy `sum_i (0.5 ln(2 pi e) + log_std_i)`.
pub fn entropy<T: Real>(log_std: &[T]) -> T {
    let c = T::lit(0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln());
    log_std.iter().fold(T::zero(), |acc, &ls| acc + c + ls)
}

/// `ln(1 - tanh(u)^2)` without cancellation for large `|u|`.
#[inline]
pub fn log_one_minus_tanh_sq<T: Real>(u: T) -> T {
    let two = T::lit(2.0);
    // softplus(-2u) = ln(1 + e^{-2u})
    let x = -two * u;
    let softplus = if x > T::lit(30.0) { x } else { x.exp().ln_1p() };
    two * (T::LN_2() - u - softplus)
}

/// Reparameterized sample `a = tanh(mean + exp(log_std) * noise)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquashedSample<T> {
    pub pre_tanh: Vec<T>,
    /// Squashed action in `(-1, 1)`.
    pub action: Vec<T>,
    pub log_prob: T,
}

pub fn squashed_sample<T: Real>(mean: &[T], log_std: &[T], noise: &[T]) -> SquashedSample<T> {
    let half = T::lit(0.5);
    let mut pre = Vec::with_capacity(mean.len());
    let mut act = Vec::with_capacity(mean.len());
    let mut lp = T::zero();
    for i in 0..mean.len() {
        let u = mean[i] + log_std[i].exp() * noise[i];
        pre.push(u);
        act.push(u.tanh());
        lp = lp - half * noise[i] * noise[i] - log_std[i] - half_ln_two_pi::<T>() - log_one_minus_tanh_sq(u);
    }
    SquashedSample {
        pre_tanh: pre,
        action: act,
        log_prob: lp,
    }
}

/// Log density of an already squashed action (used for replayed actions).
pub fn squashed_log_prob<T: Real>(mean: &[T], log_std: &[T], action: &[T]) -> T {
    let eps = T::lit(1e-6);
    let lim = T::one() - eps;
    let mut lp = T::zero();
    for i in 0..mean.len() {
        let a = action[i].max(-lim).min(lim);
        let u = a.atanh();
        let z = (u - mean[i]) / log_std[i].exp();
        lp = lp - T::lit(0.5) * z * z - log_std[i] - half_ln_two_pi::<T>() - log_one_minus_tanh_sq(u);
    }
    lp
}

/// Accumulates the gradient of `d_action . a + d_log_prob * log_prob` with
/// respect to `(mean, log_std)`, holding the noise fixed.
pub fn squashed_grad<T: Real>(
    sample: &SquashedSample<T>,
    log_std: &[T],
    noise: &[T],
    d_action: &[T],
    d_log_prob: T,
    d_mean: &mut [T],
    d_log_std: &mut [T],
) {
    let two = T::lit(2.0);
    for i in 0..noise.len() {
        let a = sample.action[i];
        let sigma_eps = log_std[i].exp() * noise[i];
        let da_du = T::one() - a * a;
        // d log_prob / du through -ln(1 - tanh^2 u)
        let dlp_du = two * a;
        let du = d_action[i] * da_du + d_log_prob * dlp_du;
        d_mean[i] = d_mean[i] + du;
        d_log_std[i] = d_log_std[i] + du * sigma_eps - d_log_prob;
    }
}
