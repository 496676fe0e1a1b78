use hawkes_scaling::estimators::{
    correlation, hurst_moment_scaling, ks_distance, leverage_correlation, log_lags, quadratic_covariation,
    realized_variance, HURST_MOMENTS,
};
use hawkes_scaling::rng::SeedRecord;
use hawkes_scaling::PathGrid;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn brownian(n: usize, seed: u64) -> PathGrid {
    let mut rng = SeedRecord::new(seed, 0).rng();
    let h = 1.0 / (n - 1) as f64;
    let mut acc = 0.0;
    PathGrid::uniform(n, 1.0, |t| {
        if t > 0.0 {
            acc += rng.sample::<f64, _>(StandardNormal) * h.sqrt();
        }
        acc
    })
}

fn arb_path(n: usize) -> impl Strategy<Value = PathGrid> {
    prop::collection::vec(-2.0f64..2.0, n).prop_map(move |v| PathGrid::uniform(n, 1.0, |t| v[(t * (n - 1) as f64).round() as usize]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covariation_is_symmetric_and_bilinear(x in arb_path(30), y in arb_path(30), z in arb_path(30), a in -3.0f64..3.0) {
        let qc = |p: &PathGrid, q: &PathGrid| quadratic_covariation(p, q).unwrap();
        prop_assert!((qc(&x, &y) - qc(&y, &x)).abs() < 1e-12);
        let comb = PathGrid::new(x.times().to_vec(), x.values().iter().zip(z.values()).map(|(u, v)| a * u + v).collect()).unwrap();
        prop_assert!((qc(&comb, &y) - (a * qc(&x, &y) + qc(&z, &y))).abs() < 1e-9);
        prop_assert!(qc(&x, &x) >= 0.0);
    }

    #[test]
    fn leverage_is_a_correlation(seed: u64) {
        let p = brownian(1001, seed);
        let e = leverage_correlation(&p, 0.02).unwrap();
        prop_assert!((-1.0..=1.0).contains(&e.point) && e.stderr >= 0.0);
    }

    #[test]
    fn hurst_is_scale_and_order_invariant(seed: u64, c in 0.01f64..100.0) {
        let paths: Vec<PathGrid> = (0..4).map(|k| brownian(257, seed.wrapping_add(k))).collect();
        let lags = log_lags(1, 32, 5);
        let base = hurst_moment_scaling(&paths, &HURST_MOMENTS, &lags).unwrap();
        let scaled: Vec<PathGrid> = paths.iter().map(|p| p.map(|v| c * v)).collect();
        let s = hurst_moment_scaling(&scaled, &HURST_MOMENTS, &lags).unwrap();
        prop_assert!((s.point - base.point).abs() < 1e-9);
        let mut rev = paths.clone();
        rev.reverse();
        prop_assert!((hurst_moment_scaling(&rev, &HURST_MOMENTS, &lags).unwrap().point - base.point).abs() < 1e-12);
    }

    #[test]
    fn ks_is_symmetric_and_zero_on_copies(a in prop::collection::vec(-5.0f64..5.0, 5..60), b in prop::collection::vec(-5.0f64..5.0, 5..60)) {
        prop_assert_eq!(ks_distance(&a, &a).unwrap().statistic, 0.0);
        let (x, y) = (ks_distance(&a, &b).unwrap(), ks_distance(&b, &a).unwrap());
        prop_assert!((x.statistic - y.statistic).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&x.p_value));
    }
}

#[test]
fn ks_null_rarely_rejects_and_shift_always_does() {
    let draw = |seed: u64, shift: f64| -> Vec<f64> {
        let mut rng = SeedRecord::new(seed, 0).rng();
        (0..1000).map(|_| rng.sample::<f64, _>(StandardNormal) + shift).collect()
    };
    let accepted = (0..60).filter(|&s| !ks_distance(&draw(2 * s, 0.0), &draw(2 * s + 1, 0.0)).unwrap().reject_1pct).count();
    assert!(accepted as f64 >= 0.95 * 60.0, "{accepted}");
    assert!((0..10).all(|s| ks_distance(&draw(500 + s, 0.0), &draw(600 + s, 1.0)).unwrap().reject_1pct));
}

#[test]
fn brownian_rv_and_oracle_correlation() {
    let (window, mut total, mut count) = (0.05, 0.0, 0);
    for s in 0..50 {
        let rv = realized_variance(&brownian(2001, s), window).unwrap();
        total += rv.values().iter().sum::<f64>();
        count += rv.len();
    }
    let mean = total / count as f64;
    assert!((mean - window).abs() < 0.1 * window, "{mean}");
    let x: Vec<f64> = (0..50).map(|k| (k as f64).sin()).collect();
    let y: Vec<f64> = x.iter().map(|v| -v).collect();
    assert!((correlation(&x, &y).unwrap().point + 1.0).abs() < 1e-12);
}

#[test]
fn independent_brownians_have_small_covariation() {
    let v: Vec<f64> = (0..200).map(|s| quadratic_covariation(&brownian(501, 2 * s), &brownian(501, 2 * s + 1)).unwrap()).collect();
    let e = hawkes_scaling::estimators::EstimateWithCI::mean_of(&v);
    assert!(e.point.abs() < 3.0 * e.stderr, "{} ± {}", e.point, e.stderr);
}
