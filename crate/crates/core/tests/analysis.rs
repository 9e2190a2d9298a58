use fingermimic::analysis::{correlation_matrix, pearson, table_a1, COLUMNS};
use proptest::prelude::*;

#[test]
fn fixture_matrix_shape_and_diagonal() {
    let rows = table_a1();
    assert_eq!(rows.len(), 46);
    let m = correlation_matrix(&rows, false).unwrap();
    assert_eq!(m.columns.len(), COLUMNS.len());
    for (i, row) in m.values.iter().enumerate() {
        if let Some(v) = row[i] {
            assert!((v - 1.0).abs() < 1e-12);
        }
        for (j, v) in row.iter().enumerate() {
            assert_eq!(*v, m.values[j][i]);
        }
    }
}

#[test]
fn reward_column_is_pairwise_pearson() {
    let rows = table_a1();
    for log in [false, true] {
        let m = correlation_matrix(&rows, log).unwrap();
        let reward: Vec<f64> = rows.iter().map(|r| r.mean_reward).collect();
        for (i, (_, value)) in m.reward_column().iter().enumerate() {
            let col: Vec<f64> = rows.iter().map(|r| r.values(log)[i]).collect();
            let direct = pearson(&col, &reward).unwrap();
            assert!((value.unwrap() - direct).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn pearson_affine_invariant(
        pairs in prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 3..40),
        a in 0.1..10.0f64,
        b in -50.0..50.0f64,
        c in 0.1..10.0f64,
        d in -50.0..50.0f64,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let Ok(r) = pearson(&x, &y) {
            let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let ys: Vec<f64> = y.iter().map(|v| c * v + d).collect();
            let r2 = pearson(&xs, &ys).unwrap();
            prop_assert!((r - r2).abs() < 1e-9);
            let flipped: Vec<f64> = y.iter().map(|v| -c * v + d).collect();
            prop_assert!((r + pearson(&x, &flipped).unwrap()).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&r));
        }
    }
}

#[test]
fn degenerate_inputs_rejected() {
    assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    assert!(pearson(&[1.0], &[1.0]).is_err());
    assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
}
