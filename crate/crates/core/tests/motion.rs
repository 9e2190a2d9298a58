use fingermimic::hand::build_default_hand;
use fingermimic::motion::{finite_difference_velocities, motion_to_string, parse_motion, synth_motion, ReferenceMotion, SynthSpec};
use proptest::prelude::*;

#[test]
fn velocities_of_a_quadratic() {
    // q = t^2 at 10 fps: central differences are exact inside, one-sided at the ends
    let fps = 10.0;
    let frames: Vec<Vec<f64>> = (0..6).map(|i| vec![(i as f64 / fps).powi(2)]).collect();
    let v = finite_difference_velocities(&frames, fps);
    for i in 1..5 {
        assert!((v[i][0] - 2.0 * i as f64 / fps).abs() < 1e-12);
    }
    assert!((v[0][0] - 0.1).abs() < 1e-12);
    assert!((v[5][0] - 0.9).abs() < 1e-12);
}

#[test]
fn synthetic_shapes() {
    let topo = build_default_hand::<f64>();
    let hold = synth_motion(&SynthSpec::hold(1.2, 2.0), &topo).unwrap();
    assert_eq!(hold.frame_count(), 61);
    assert!(hold.frames.iter().flatten().all(|&v| v == 1.2));
    assert!(hold.velocities.iter().flatten().all(|&v| v == 0.0));

    let ramp = synth_motion(&SynthSpec::ramp(1.0, 0.5, 2.0), &topo).unwrap();
    assert_eq!(ramp.frames[0][0], 0.5);
    assert!((ramp.frames[60][0] - 1.5).abs() < 1e-12);
    assert!(ramp.velocities.iter().flatten().all(|&v| (v - 0.5).abs() < 1e-9));

    let sine = synth_motion(&SynthSpec::sinusoid(1.0, 0.5, 0.5, 2.0, 4), &topo).unwrap();
    assert!(sine.frames.iter().flatten().all(|&v| (0.5..=1.5).contains(&v)));
    assert_eq!(sine, synth_motion(&SynthSpec::sinusoid(1.0, 0.5, 0.5, 2.0, 4), &topo).unwrap());
}

#[test]
fn synth_rejects_ranges_outside_limits() {
    let topo = build_default_hand::<f64>();
    assert!(synth_motion(&SynthSpec::sinusoid(1.8, 0.5, 0.5, 2.0, 0), &topo).is_err());
}

#[test]
fn text_roundtrip() {
    let topo = build_default_hand::<f64>();
    let m = synth_motion(&SynthSpec::sinusoid(1.0, 0.4, 1.5, 1.0, 2), &topo).unwrap();
    let back: ReferenceMotion<f64> = parse_motion(&motion_to_string(&m, &topo), &topo, "x").unwrap();
    assert_eq!(back, m);
}

#[test]
fn axis_angle_frames_reduce_onto_joint_axes() {
    let topo = build_default_hand::<f64>();
    let axes: Vec<[f64; 3]> = topo.joint_axes().collect();
    let frame: Vec<[f64; 3]> = axes.iter().enumerate().map(|(j, a)| a.map(|c| c * (0.1 * j as f64))).collect();
    let text = serde_json::json!({ "fps": 30.0, "frames": [frame, frame] }).to_string();
    let m: ReferenceMotion<f64> = parse_motion(&text, &topo, "aa").unwrap();
    for j in 0..15 {
        assert!((m.frames[0][j] - 0.1 * j as f64).abs() < 1e-12);
    }
    let short = serde_json::json!({ "fps": 30.0, "frames": [[[0.0, 0.0, 1.0]]] }).to_string();
    assert!(parse_motion::<f64>(&short, &topo, "bad").is_err());
}

proptest! {
    #[test]
    fn sampling_wraps_at_duration(t in 0.0..2.0f64, laps in 1u32..5) {
        let topo = build_default_hand::<f64>();
        let m = synth_motion(&SynthSpec::sinusoid(1.0, 0.5, 0.5, 2.0, 0), &topo).unwrap();
        let (q1, v1, p1) = m.sample(t);
        let (q2, v2, p2) = m.sample(t + 2.0 * laps as f64);
        for j in 0..15 {
            prop_assert!((q1[j] - q2[j]).abs() < 1e-9);
            prop_assert!((v1[j] - v2[j]).abs() < 1e-6);
        }
        prop_assert!((p1.value() - p2.value()).abs() < 1e-9 || (p1.value() - p2.value()).abs() > 0.999);
        prop_assert!((0.0..=1.0).contains(&p1.value()));
    }

    #[test]
    fn sampling_at_frame_times_returns_frames(i in 0usize..60) {
        let topo = build_default_hand::<f64>();
        let m = synth_motion(&SynthSpec::sinusoid(1.0, 0.5, 0.5, 2.0, 1), &topo).unwrap();
        let (q, _, _) = m.sample(i as f64 / 30.0);
        for j in 0..15 {
            prop_assert!((q[j] - m.frames[i][j]).abs() < 1e-9);
        }
    }
}
