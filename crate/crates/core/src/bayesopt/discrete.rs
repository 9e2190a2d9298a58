//! Bayesian search over a finite set of candidates, e.g. a hyperparameter
//! grid embedded one-hot per categorical level.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::acquisition::model_ei;
use super::gp::{GpHyper, GpModel};
use crate::error::{Error, Result};

const LENGTH_GRID: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 4.0];

/// Concatenated one-hot vectors; `choice[i] < levels[i]`.
pub fn one_hot_embedding(levels: &[usize], choice: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels.iter().sum());
    for (&n, &c) in levels.iter().zip(choice) {
        out.extend((0..n).map(|k| if k == c { 1.0 } else { 0.0 }));
    }
    out
}

/// Minimizes `f` over `candidates` (embedded points) with `budget`
/// evaluations: `initial` distinct random picks, then the unevaluated
/// candidate of highest expected improvement under an isotropic GP whose
/// length scale is chosen by marginal likelihood. Returns (index, value) in
/// evaluation order.
pub fn bayes_search_discrete<F>(candidates: &[Vec<f64>], budget: usize, initial: usize, seed: u64, mut f: F) -> Result<Vec<(usize, f64)>>
where
    F: FnMut(usize) -> Result<f64>,
{
    if candidates.is_empty() {
        return Err(Error::DegenerateInput("no candidates to search".into()));
    }
    let dim = candidates[0].len();
    let budget = budget.min(candidates.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = vec![false; candidates.len()];
    let mut history = Vec::with_capacity(budget);
    for i in sample(&mut rng, candidates.len(), initial.clamp(1, budget.max(1)).min(budget)).into_iter() {
        done[i] = true;
        history.push((i, f(i)?));
    }
    while history.len() < budget {
        let x: Vec<Vec<f64>> = history.iter().map(|&(i, _)| candidates[i].clone()).collect();
        let y: Vec<f64> = history.iter().map(|&(_, v)| v).collect();
        let model = LENGTH_GRID
            .iter()
            .filter_map(|&l| GpModel::fit(x.clone(), y.clone(), GpHyper::isotropic(dim, l, 1.0, 1e-6)).ok())
            .max_by(|a, b| a.log_marginal_likelihood().total_cmp(&b.log_marginal_likelihood()))
            .ok_or(Error::SingularKernel { jitter: 1e-2 })?;
        let best = y.iter().copied().fold(f64::INFINITY, f64::min);
        let next = (0..candidates.len())
            .filter(|&i| !done[i])
            .map(|i| (i, model_ei(&model, &candidates[i], best)))
            .fold(None, |acc: Option<(usize, f64)>, c| match acc {
                Some(a) if a.1 >= c.1 => Some(a),
                _ => Some(c),
            })
            .map(|(i, _)| i)
            .expect("budget is bounded by the candidate count");
        done[next] = true;
        history.push((next, f(next)?));
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_layout() {
        assert_eq!(one_hot_embedding(&[2, 3], &[1, 0]), vec![0.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn finds_separable_minimum() {
        let levels = [4, 4, 4];
        let choices: Vec<[usize; 3]> = (0..64).map(|k| [k / 16, (k / 4) % 4, k % 4]).collect();
        let emb: Vec<Vec<f64>> = choices.iter().map(|c| one_hot_embedding(&levels, c)).collect();
        let cost = |i: usize| Ok(choices[i].iter().map(|&v| (v as f64 - 2.0).powi(2)).sum::<f64>());
        let h = bayes_search_discrete(&emb, 30, 5, 3, cost).unwrap();
        assert_eq!(h.len(), 30);
        let mut seen: Vec<usize> = h.iter().map(|p| p.0).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 30);
        assert!(h.iter().any(|p| p.1 == 0.0), "{h:?}");
    }
}
