use std::f64::consts::PI;

use statmean_core::deterministic::{chebyshev_constant_estimate, chebyshev_min_max, decay_rate_from_variances};
use statmean_core::{ArcRegion, Neutrality, PrecisionMode, SpectralModel};

fn complement_tau(alpha: f64) -> f64 {
    let a = (alpha / 2.0).tan();
    1.0 / (a + (1.0 + a * a).sqrt())
}

#[test]
fn region_containing_one_has_unit_constant() {
    for region in [ArcRegion::full_circle(), ArcRegion::arc_around_one(0.4).unwrap()] {
        let s = chebyshev_min_max(&region, 64, None).unwrap();
        assert!((s.constant_estimate - 1.0).abs() <= 0.02);
        assert!(s.deviation >= 1.0 - 1e-9);
        let at_one: f64 = s.coefficients.iter().sum();
        assert!((at_one - 1.0).abs() < 1e-10);
    }
}

#[test]
fn power_candidate_bounds_the_complement_arc() {
    let region = ArcRegion::complement_arc(PI / 2.0).unwrap();
    let s = chebyshev_min_max(&region, 4, None).unwrap();
    assert!(s.deviation <= 0.25 + 1e-12);
    for n in [1, 3, 8, 20] {
        let s = chebyshev_min_max(&region, n, None).unwrap();
        assert!(s.deviation <= (PI / 4.0).cos().powi(n as i32) + 1e-9);
    }
}

#[test]
fn constant_is_monotone_in_the_region() {
    let small = ArcRegion::complement_arc(2.0 * PI / 3.0).unwrap();
    let large = ArcRegion::complement_arc(PI / 2.0).unwrap();
    for n in [6, 12, 24] {
        let a = chebyshev_min_max(&small, n, None).unwrap();
        let b = chebyshev_min_max(&large, n, None).unwrap();
        assert!(a.deviation <= b.deviation * (1.0 + 1e-6), "n={n}");
    }
}

#[test]
fn complement_arc_constants() {
    let grid: Vec<usize> = (8..=40).step_by(4).collect();
    for alpha in [PI / 2.0, 2.0 * PI / 3.0] {
        let est = chebyshev_constant_estimate(&ArcRegion::complement_arc(alpha).unwrap(), &grid).unwrap();
        assert!(est.estimate <= (alpha / 2.0).cos() + 0.02);
        assert!(est.oscillation <= 0.05, "{}", est.oscillation);
        assert!((est.estimate - complement_tau(alpha)).abs() <= 0.02, "{} vs {}", est.estimate, complement_tau(alpha));
    }
}

#[test]
fn symmetric_regions_only() {
    assert!(ArcRegion::new(&[(0.5, 1.0)]).is_err());
    let r = ArcRegion::new(&[(0.5 * PI, PI), (-PI, -0.5 * PI)]).unwrap();
    assert!(!r.contains_one);
    assert!(r.contains(0.75 * PI) && r.contains(-0.75 * PI) && !r.contains(0.2));
}

#[test]
fn second_angle_decay_rate() {
    let m = SpectralModel::arc_supported(2.0 * PI / 3.0, 1.0).into();
    let grid: Vec<usize> = (4..=40).step_by(2).collect();
    let fit = decay_rate_from_variances(&m, &grid, PrecisionMode::Auto).unwrap();
    assert_eq!(fit.neutrality, Neutrality::ExponentiallyDecreasing);
    assert!(fit.rho <= 0.52);
    assert!((fit.rho - complement_tau(2.0 * PI / 3.0)).abs() <= 0.03, "{}", fit.rho);
}

#[test]
fn white_noise_is_neutral() {
    let m = SpectralModel::white_noise(1.0).into();
    let grid: Vec<usize> = (8..=64).step_by(8).collect();
    let fit = decay_rate_from_variances(&m, &grid, PrecisionMode::Double).unwrap();
    assert_eq!(fit.neutrality, Neutrality::ExponentiallyNeutral);
    assert!(fit.warning.is_none());
}
