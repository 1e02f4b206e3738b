use ddkelly_web::{explore_path, kelly_curve, zeta_cdfs, zeta_sample, MAX_STEPS};

#[test]
fn explorer_respects_floor_and_is_seeded() {
    let v = explore_path(0.6, 3, 5000, 1e-3).unwrap();
    assert_eq!(v.times().len(), 5001);
    assert_eq!(v.xhat().len(), v.constrained().len());
    let rd = v.rel_dd();
    assert!(rd.iter().all(|&r| (0.6 - 1e-12..=1.0).contains(&r)));
    assert_eq!(rd[0], 1.0);
    let again = explore_path(0.6, 3, 5000, 1e-3).unwrap();
    assert_eq!(again.constrained(), v.constrained());
    assert_ne!(explore_path(0.6, 4, 5000, 1e-3).unwrap().xhat(), v.xhat());
}

#[test]
fn explorer_rejects_bad_input() {
    assert!(explore_path(1.0, 1, 10, 0.01).is_err());
    assert!(explore_path(0.5, 1, 0, 0.01).is_err());
    assert!(explore_path(0.5, 1, MAX_STEPS + 1, 0.01).is_err());
    assert!(explore_path(0.5, 1, 10, -0.01).is_err());
}

#[test]
fn zeta_histogram_inputs() {
    let v = zeta_sample(0.5, 20, 1).unwrap();
    let s = v.samples();
    assert!(s.len() > 100);
    assert!(s.windows(2).all(|w| w[0] <= w[1]));
    // Each ratio is at least the floor ratio 1/(2 - alpha).
    assert!(s[0] >= 1.0 / 1.5 - 1e-3);
    assert!(zeta_sample(0.5, 1, 1).is_err());
}

#[test]
fn cdfs_are_distribution_functions() {
    let zs: Vec<f64> = (0..200).map(|i| 0.6 + i as f64 * 0.05).collect();
    let (fixed, scale) = zeta_cdfs(0.5, &zs).unwrap();
    for f in [&fixed, &scale] {
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(f[0], 0.0);
        assert!(f.iter().all(|p| (0.0..=1.0).contains(p)));
    }
    // Scale law at z: 1 - ((2 - a) z)^(-1/(1 - a)).
    let z = 2.0;
    let (_, s) = zeta_cdfs(0.5, &[z]).unwrap();
    assert!((s[0] - (1.0 - (1.5f64 * z).powf(-2.0))).abs() < 1e-14);
}

#[test]
fn kelly_curve_endpoints() {
    let c = kelly_curve(0.5, 100).unwrap();
    assert_eq!(c.len(), 101);
    assert_eq!(c[0], 0.0);
    assert!((c[100] - 0.5).abs() < 1e-15);
    // (1 - a) r / (a + (1 - a) r) at r = 1/2.
    assert!((c[50] - 0.25 / 0.75).abs() < 1e-15);
    assert!(c.windows(2).all(|w| w[0] <= w[1]));
}
