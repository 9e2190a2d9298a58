use fingermimic::bayesopt::{
    control_objective, expected_improvement, grid_minimum, halton_points, tune_controller, GpHyper, GpModel, SweepBounds,
    TuneConfig, DIVERGENCE_PENALTY,
};
use fingermimic::config::ExperimentConfig;
use fingermimic::dynamics::PdGains;
use fingermimic::env::EnvSpec;
use fingermimic::motion::SynthSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn spec(synth: SynthSpec) -> EnvSpec<f64> {
    let mut cfg = ExperimentConfig::default();
    cfg.hand.finger = Some("index".into());
    cfg.motion.synth = synth;
    cfg.env_spec().unwrap()
}

#[test]
fn expected_improvement_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let mu = rng.random_range(-2.0..2.0);
        let sigma: f64 = rng.random_range(0.05..2.0);
        let best = rng.random_range(-2.0..2.0);
        let n = 200_000;
        let mc = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (best - (mu + sigma * z)).max(0.0)
            })
            .sum::<f64>()
            / n as f64;
        let ei = expected_improvement(mu, sigma * sigma, best);
        assert!((ei - mc).abs() < 1e-2, "mu {mu} sigma {sigma} best {best}: {ei} vs {mc}");
    }
}

#[test]
fn expected_improvement_degenerate_variance() {
    assert_eq!(expected_improvement(1.0, 0.0, 3.0), 2.0);
    assert_eq!(expected_improvement(3.0, 0.0, 1.0), 0.0);
}

#[test]
fn gp_interpolates_and_shrinks_variance() {
    let x: Vec<Vec<f64>> = halton_points(12, 2, 3);
    let f = |p: &[f64]| (3.0 * p[0]).sin() + p[1] * p[1];
    let y: Vec<f64> = x.iter().map(|p| f(p)).collect();
    let hyper = GpHyper::isotropic(2, 0.3, 1.0, 1e-8);
    let prior = GpModel::fit(vec![], vec![], hyper.clone()).unwrap();
    let model = GpModel::fit(x.clone(), y.clone(), hyper).unwrap();
    let (_, prior_var) = prior.predict(&[0.5, 0.5]);
    for (p, &v) in x.iter().zip(&y) {
        let (mu, var) = model.predict(p);
        assert!((mu - v).abs() < 1e-3, "{mu} vs {v}");
        assert!(var <= prior_var * 1e-3);
    }
    let (_, var_far) = model.predict(&[0.5, 0.5]);
    assert!(var_far <= prior_var);
}

#[test]
fn objective_examples() {
    let hold = spec(SynthSpec::hold(1.0, 2.0));
    let at_rest = control_objective(&hold, PdGains::reference_best());
    assert!(at_rest.abs() < 1e-9, "{at_rest}");
    let sine = spec(SynthSpec::sinusoid(1.0, 0.5, 0.5, 2.0, 0));
    let zero = control_objective(&sine, PdGains { kp: 0.0, kd: 0.0 });
    assert!(zero > 0.0);
    let g = PdGains { kp: 0.3, kd: 0.4 };
    assert_eq!(control_objective(&sine, g), control_objective(&sine, g));
    assert_eq!(control_objective(&sine, PdGains { kp: -1.0, kd: 0.0 }), DIVERGENCE_PENALTY);
}

#[test]
fn grid_minimum_matches_brute_force() {
    let sine = spec(SynthSpec::sinusoid(1.0, 0.5, 0.5, 2.0, 0));
    let bounds = SweepBounds::new(1.0).unwrap();
    let (best, eps) = grid_minimum(&sine, bounds, 6, 1);
    let mut oracle = (f64::INFINITY, 0.0, 0.0);
    for i in 0..6 {
        for j in 0..6 {
            let (kp, kd) = (i as f64 / 5.0, j as f64 / 5.0);
            let v = control_objective(&sine, PdGains { kp, kd });
            if v < oracle.0 {
                oracle = (v, kp, kd);
            }
        }
    }
    assert_eq!(eps, oracle.0);
    assert_eq!((best.kp, best.kd), (oracle.1, oracle.2));
}

#[test]
fn tuning_trace_properties() {
    let sine = spec(SynthSpec::sinusoid(1.0, 0.5, 0.5, 2.0, 0));
    let cfg = TuneConfig {
        budget: 12,
        initial_points: 4,
        seed: 2,
        ..TuneConfig::default()
    };
    let bounds = SweepBounds::new(1.0).unwrap();
    let a = tune_controller(&sine, bounds, &cfg).unwrap();
    assert_eq!(a.trace.len(), 12);
    for w in a.trace.windows(2) {
        assert!(w[1].best <= w[0].best);
    }
    let min = a.trace.iter().map(|r| r.epsilon).fold(f64::INFINITY, f64::min);
    assert_eq!(a.best_epsilon, min);
    assert!(a.trace.iter().all(|r| (0.0..=1.0).contains(&r.kp) && (0.0..=1.0).contains(&r.kd)));
    let b = tune_controller(&sine, bounds, &cfg).unwrap();
    assert_eq!(a.trace_csv(), b.trace_csv());

    let batched = TuneConfig { batch: 3, workers: 2, ..cfg };
    let c = tune_controller(&sine, bounds, &batched).unwrap();
    assert_eq!(c.trace.len(), 12);
    assert_eq!(c.trace_csv(), tune_controller(&sine, bounds, &batched).unwrap().trace_csv());
}
