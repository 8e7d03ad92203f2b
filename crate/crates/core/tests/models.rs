use std::f64::consts::PI;

use statmean_core::covariance::{covariance_exact_falpha, covariance_sequence};
use statmean_core::spectra::SingularPoint;
use statmean_core::{Atom, SpectralMeasure, SpectralModel};

fn catalog() -> Vec<SpectralModel> {
    vec![
        SpectralModel::white_noise(2.0),
        SpectralModel::ma(&[1.0, 0.5, -0.2], 1.5),
        SpectralModel::ar(&[1.0, -0.5], 1.0),
        SpectralModel::power_at_origin(-0.3),
        SpectralModel::power_at_origin(1.5),
        SpectralModel::ArfimaFactor {
            d: 0.2,
            base: Box::new(SpectralModel::white_noise(1.0)),
        },
        SpectralModel::FgnDensity {
            hurst: 0.8,
            scale: 1.0,
            series_truncation: 200,
        },
        SpectralModel::FisherHartwig {
            base: Box::new(SpectralModel::white_noise(1.0)),
            singular_points: vec![
                SingularPoint { angle: 2.0, exponent: -0.2 },
                SingularPoint { angle: -2.0, exponent: -0.2 },
            ],
        },
        SpectralModel::FlatZero { a: 0.5 },
        SpectralModel::PollaczekSzego { a: 1.0 },
        SpectralModel::arc_supported(1.0, 0.5),
    ]
}

#[test]
fn densities_are_even() {
    for m in catalog() {
        for i in 1..200 {
            let l = PI * i as f64 / 200.0;
            let (a, b) = (m.evaluate(l), m.evaluate(-l));
            assert!((a - b).abs() <= 1e-14 * a.abs(), "{}: {l}", m.name());
            assert!(a >= 0.0);
        }
    }
}

#[test]
fn covariance_is_positive_definite_at_lag_zero_dominance() {
    for m in catalog() {
        let c = covariance_sequence(&m.clone().into(), 64).unwrap();
        assert!(c.values[0] > 0.0);
        assert!(c.values.iter().all(|v| v.abs() <= c.values[0] * (1.0 + 1e-12)), "{}", m.name());
    }
}

#[test]
fn quadrature_matches_falpha_closed_form() {
    for alpha in [-0.3, 0.25, 1.5] {
        let c = covariance_sequence(&SpectralModel::power_at_origin(alpha).into(), 40).unwrap();
        for k in [0u64, 1, 7, 40] {
            let exact = covariance_exact_falpha(alpha, k).unwrap();
            assert!((c.values[k as usize] - exact).abs() <= 1e-11 * exact.abs().max(1e-3), "{alpha} {k}");
        }
    }
}

#[test]
fn geometric_mean_is_monotone_and_multiplicative() {
    let f = SpectralModel::ma(&[1.0, 0.3], 1.0);
    let g = SpectralModel::scaled(f.clone(), 2.5);
    let (gf, gg) = (f.geometric_mean().unwrap(), g.geometric_mean().unwrap());
    assert!(gf <= gg);
    assert!((gg / gf - 2.5).abs() < 1e-12);
    let h = SpectralModel::power_at_origin(0.7);
    let p = SpectralModel::product(f.clone(), h.clone()).geometric_mean().unwrap();
    assert!((p / (gf * h.geometric_mean().unwrap()) - 1.0).abs() < 1e-10);
}

#[test]
fn atoms_add_cosine_moments() {
    let base = SpectralModel::ar(&[1.0, -0.4], 1.0);
    let plain = covariance_sequence(&base.clone().into(), 10).unwrap();
    let with = covariance_sequence(
        &SpectralMeasure::new(base, vec![Atom { angle: 0.9, mass: 0.3 }]).unwrap(),
        10,
    )
    .unwrap();
    for k in 0..=10 {
        let d = with.values[k] - plain.values[k];
        assert!((d - 0.3 * (0.9 * k as f64).cos()).abs() < 1e-14);
    }
}

#[test]
fn model_json_uses_variant_tag() {
    let m = SpectralModel::from_json(r#"{"variant": "PowerAtOrigin", "alpha": 0.5}"#).unwrap();
    assert_eq!(m, SpectralModel::power_at_origin(0.5));
    let arma = SpectralModel::from_json(r#"{"variant": "Arma", "ma": [1.0, 0.5]}"#).unwrap();
    assert_eq!(arma, SpectralModel::ma(&[1.0, 0.5], 1.0));
    assert!(SpectralModel::from_json(r#"{"variant": "PowerAtOrigin", "alpha": -0.7}"#).is_err());
}
