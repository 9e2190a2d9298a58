use approx::assert_relative_eq;
use fingermimic::hand::build_default_hand;
use fingermimic::reward::{composite_reward, error_bundle, pose_error, velocity_error, ErrorBundle, RewardSpec};
use proptest::prelude::*;

fn errors() -> impl Strategy<Value = ErrorBundle<f64>> {
    (0.0..50.0f64, 0.0..500.0f64, 0.0..1.0f64, 0.0..5.0f64).prop_map(|(pose, velocity, end_effector, root)| ErrorBundle {
        pose,
        velocity,
        end_effector,
        root,
    })
}

#[test]
fn perfect_tracking_scores_one() {
    let topo = build_default_hand::<f64>();
    let q = vec![0.7; 15];
    let v = vec![0.1; 15];
    let e = error_bundle(&topo, &q, &v, &q, &v);
    assert!(e.pose < 1e-24);
    assert_eq!((e.velocity, e.end_effector, e.root), (0.0, 0.0, 0.0));
    assert_relative_eq!(composite_reward(&e, &RewardSpec::default()), 1.0, epsilon = 1e-15);
}

#[test]
fn single_term_example() {
    // only the pose term off: 0.35 + 0.65 exp(-2 * 0.5)
    let e = ErrorBundle {
        pose: 0.5,
        ..ErrorBundle::default()
    };
    let r = composite_reward(&e, &RewardSpec::default());
    assert_relative_eq!(r, 0.35 + 0.65 * (-1.0f64).exp(), epsilon = 1e-14);
}

#[test]
fn invalid_weights_rejected() {
    let spec = RewardSpec {
        w_pose: 0.7,
        ..RewardSpec::<f64>::default()
    };
    assert!(spec.validate().is_err());
}

proptest! {
    #[test]
    fn reward_in_unit_interval(e in errors()) {
        let r = composite_reward(&e, &RewardSpec::default());
        prop_assert!(r > 0.0 && r <= 1.0);
    }

    #[test]
    fn reward_monotone_in_each_error(e in errors(), term in 0usize..4, extra in 1e-3..10.0f64) {
        let mut worse = e;
        match term {
            0 => worse.pose += extra,
            1 => worse.velocity += extra,
            2 => worse.end_effector += extra,
            _ => worse.root += extra,
        }
        let spec = RewardSpec::default();
        let (r, r_worse) = (composite_reward(&e, &spec), composite_reward(&worse, &spec));
        prop_assert!(r_worse <= r);
        // strict whenever the term still registers at double precision
        let eps = [e.pose, e.velocity, e.end_effector, e.root][term];
        if spec.weights()[term] * (-spec.scales()[term] * eps).exp() > 1e-9 {
            prop_assert!(r_worse < r);
        }
    }

    #[test]
    fn pose_error_symmetric_and_matches_angle_differences(
        a in prop::collection::vec(0.0..2.0f64, 15),
        b in prop::collection::vec(0.0..2.0f64, 15),
    ) {
        // single-axis joints: the relative rotation angle is |a - b| (< pi)
        let topo = build_default_hand::<f64>();
        let qa = topo.joint_quaternions(&a);
        let qb = topo.joint_quaternions(&b);
        let direct: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum();
        prop_assert!((pose_error(&qa, &qb) - direct).abs() < 1e-9);
        prop_assert!((pose_error(&qa, &qb) - pose_error(&qb, &qa)).abs() < 1e-12);
    }

    #[test]
    fn velocity_error_is_squared_distance(a in prop::collection::vec(-5.0..5.0f64, 15), b in prop::collection::vec(-5.0..5.0f64, 15)) {
        let direct: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        prop_assert!((velocity_error(&a, &b) - direct).abs() < 1e-12);
        prop_assert_eq!(velocity_error(&a, &b), velocity_error(&b, &a));
    }
}
