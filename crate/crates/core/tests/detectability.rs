//! AUC against an independent Maclaurin-series evaluation of erf.

use binloss::fisher::auc_from_detectability;

fn erf_series(x: f64) -> f64 {
    // 2/√π Σ (−1)ⁿ x^(2n+1) / (n! (2n+1))
    let mut term = x;
    let mut sum = x;
    for n in 1..60 {
        term *= -x * x / n as f64;
        sum += term / (2 * n + 1) as f64;
    }
    2.0 / std::f64::consts::PI.sqrt() * sum
}

#[test]
fn auc_at_two_matches_series() {
    let expected = 0.5 + 0.5 * erf_series(1.0);
    let got = auc_from_detectability(2.0f64).unwrap().auc;
    assert!((got - expected).abs() <= 1e-9, "{got} vs {expected}");
    assert!((got - 0.921350).abs() < 5e-7);
}

#[test]
fn auc_is_half_at_zero_and_increasing() {
    assert_eq!(auc_from_detectability(0.0f64).unwrap().auc, 0.5);
    let grid: Vec<f64> = (0..100)
        .map(|i| auc_from_detectability(i as f64 * 0.05).unwrap().auc)
        .collect();
    assert!(grid.windows(2).all(|w| w[0] < w[1]));
    assert!((auc_from_detectability(10.0f64).unwrap().auc - 1.0).abs() < 1e-6);
}

#[test]
fn series_agrees_with_library_across_range() {
    for i in 0..=40 {
        let d = i as f64 * 0.1;
        let got = auc_from_detectability(d).unwrap().auc;
        assert!(
            (got - (0.5 + 0.5 * erf_series(d / 2.0))).abs() < 1e-12,
            "d={d}"
        );
    }
}
