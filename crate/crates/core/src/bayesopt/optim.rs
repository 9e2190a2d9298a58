//! Derivative-free search helpers: bounded Nelder-Mead and shifted Halton
//! sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let (mut inv, mut f) = (0.0, 1.0 / base as f64);
    while index > 0 {
        inv += (index % b) as f64 * f;
        index /= b;
        f /= base as f64;
    }
    inv
}

/// `n` points of the `dim`-dimensional Halton sequence in [0, 1)^dim, skipping
/// index 0 and rotated by a random shift drawn from `seed` (Cranley-Patterson).
pub fn halton_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "halton_points supports up to {} dimensions", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (1..=n as u64)
        .map(|i| {
            (0..dim)
                .map(|d| (radical_inverse(i, PRIMES[d]) + shift[d]).fract())
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop once the simplex value spread falls below this.
    pub ftol: f64,
    /// Initial simplex edge, as a fraction of each box side.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 200,
            ftol: 1e-9,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Nelder-Mead on the box `[lo, hi]`; trial points are projected onto the box.
/// Non-finite values are treated as +inf.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], lo: &[f64], hi: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let project = |x: &mut Vec<f64>| {
        for i in 0..n {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
    };
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() { v } else { f64::INFINITY }
    };

    let mut start = x0.to_vec();
    project(&mut start);
    let mut simplex = vec![start.clone()];
    for i in 0..n {
        let mut p = start.clone();
        let step = opts.initial_step * (hi[i] - lo[i]).max(1e-12);
        p[i] = if p[i] + step <= hi[i] { p[i] + step } else { p[i] - step };
        project(&mut p);
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[n] - values[0]).abs() <= opts.ftol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| {
            let mut p: Vec<f64> = (0..n).map(|d| centroid[d] + t * (simplex[n][d] - centroid[d])).collect();
            project(&mut p);
            p
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let p: Vec<f64> = (0..n).map(|d| simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d])).collect();
                    values[i] = eval(&p, &mut evals);
                    simplex[i] = p;
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        let v: Vec<f64> = (1..5).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn halton_in_unit_box_and_seeded() {
        let a = halton_points(50, 3, 7);
        assert!(a.iter().flatten().all(|&x| (0.0..1.0).contains(&x)));
        assert_eq!(a, halton_points(50, 3, 7));
        assert_ne!(a, halton_points(50, 3, 8));
    }

    #[test]
    fn minimizes_rosenbrock_in_box() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_evals: 2000,
            ftol: 1e-14,
            initial_step: 0.2,
        };
        let m = nelder_mead(rosen, &[-1.0, 1.5], &[-2.0, -2.0], &[2.0, 2.0], &opts);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn respects_bounds() {
        let m = nelder_mead(|x| x[0] + x[1], &[0.5, 0.5], &[0.0, 0.0], &[1.0, 1.0], &NelderMeadOptions::default());
        assert!(m.x.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(m.value < 1e-6, "{m:?}");
    }
}
