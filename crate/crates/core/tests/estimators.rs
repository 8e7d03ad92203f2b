use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use statmean_core::covariance::{covariance_sequence, covariance_sequence_with};
use statmean_core::estimators::{
    adenstedt_weights, lse_weights, parabolic_weights, pseudo_best_weights, variance_under,
};
use statmean_core::toeplitz::{blue_for, inverse_density_approx_variance};
use statmean_core::{blue_solve, quadratic_form, Atom, Error, Precision, SpectralMeasure, SpectralModel};

fn models() -> Vec<SpectralMeasure> {
    vec![
        SpectralModel::white_noise(0.7).into(),
        SpectralModel::ma(&[1.0, 0.8], 1.0).into(),
        SpectralModel::ar(&[1.0, -0.9], 1.0).into(),
        SpectralModel::power_at_origin(-0.4).into(),
        SpectralModel::power_at_origin(1.0).into(),
        SpectralModel::power_at_origin(2.0).into(),
        SpectralModel::FgnDensity {
            hurst: 0.3,
            scale: 1.0,
            series_truncation: 200,
        }
        .into(),
        SpectralMeasure::new(SpectralModel::white_noise(0.1), vec![Atom { angle: 0.0, mass: 1.0 }]).unwrap(),
    ]
}

#[test]
fn levinson_matches_dense_cholesky() {
    for m in models() {
        let cov = covariance_sequence(&m, 64).unwrap();
        for n in [1, 2, 5, 17, 40, 64] {
            let t = DMatrix::from_fn(n + 1, n + 1, |i, j| cov.values[i.abs_diff(j)]);
            let x = t.cholesky().expect("positive definite").solve(&DVector::from_element(n + 1, 1.0));
            let s = x.sum();
            let dense_var = 1.0 / s;
            let b = blue_solve(&cov, n, Precision::Double).unwrap();
            assert!((b.variance - dense_var).abs() <= 1e-10 * dense_var, "n={n}");
            for (c, d) in b.weights.coefficients.iter().zip(x.iter()) {
                assert!((c - d / s).abs() <= 1e-10 * (d / s).abs().max(1e-3), "n={n}");
            }
        }
    }
}

#[test]
fn blue_variance_equals_its_quadratic_form() {
    for (i, m) in models().into_iter().enumerate() {
        // f_1 and f_2 have condition numbers near n^2 and n^4
        let double_ok = !matches!(i, 4 | 5);
        let cov = covariance_sequence_with(&m, 200, Precision::DoubleDouble).unwrap();
        for n in [3, 50, 200] {
            for precision in [Precision::Double, Precision::DoubleDouble] {
                if precision == Precision::Double && !double_ok {
                    continue;
                }
                let b = blue_solve(&cov, n, precision).unwrap();
                let q = quadratic_form(&b.weights.coefficients, &cov).unwrap();
                assert!((q - b.variance).abs() <= 1e-12 * b.variance, "{i} n={n} {precision:?}: {q} vs {}", b.variance);
            }
        }
    }
}

#[test]
fn blue_weights_are_symmetric_and_unbiased() {
    for m in models() {
        let b = blue_for(&m, 33, Precision::Double).unwrap();
        let c = &b.weights.coefficients;
        assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in 0..c.len() {
            assert!((c[k] - c[c.len() - 1 - k]).abs() < 1e-10);
        }
    }
}

#[test]
fn parabolic_efficiency_for_f1() {
    // Var(BLUE)/Var(parabolic) = n(n-1)/((n+2)(n+3)) under f_1
    let m: SpectralMeasure = SpectralModel::power_at_origin(1.0).into();
    let ratio = |n: usize| {
        blue_for(&m, n, Precision::Double).unwrap().variance
            / variance_under(&parabolic_weights(n).unwrap(), &m).unwrap()
    };
    for n in [4usize, 64, 256, 295, 296, 1024] {
        let nf = n as f64;
        let exact = nf * (nf - 1.0) / ((nf + 2.0) * (nf + 3.0));
        assert!((ratio(n) - exact).abs() < 1e-9, "n={n}");
    }
    assert!(ratio(295) < 0.98 && ratio(296) >= 0.98);
    assert!(ratio(4096) > 0.998);
}

#[test]
fn lse_underestimation_with_trigonometric_factor() {
    // f_1 |1 + 0.5 e^{i lambda}|^2: n^2 Var(LSE) -> pi^{-1} int g = 2.5
    let g = SpectralModel::ma(&[1.0, 0.5], 2.0 * PI);
    let m: SpectralMeasure = SpectralModel::product(SpectralModel::power_at_origin(1.0), g).into();
    let n = 4096;
    let v = (n * n) as f64 * variance_under(&lse_weights(n), &m).unwrap();
    assert!((v / 2.5 - 1.0).abs() <= 0.02, "{v}");
}

#[test]
fn pseudo_best_examples() {
    let f1: SpectralMeasure = SpectralModel::power_at_origin(1.0).into();
    let w = pseudo_best_weights(&SpectralModel::white_noise(3.0), 12).unwrap();
    let v = variance_under(&w, &f1).unwrap();
    assert!((v - 2.0 / 169.0).abs() < 1e-14);
    let design = SpectralModel::ar(&[1.0, -0.6], 1.0);
    let w = pseudo_best_weights(&design, 20).unwrap();
    let truth: SpectralMeasure = design.into();
    let blue = blue_for(&truth, 20, Precision::Double).unwrap().variance;
    assert!((variance_under(&w, &truth).unwrap() / blue - 1.0).abs() < 1e-12);
}

#[test]
fn variance_under_examples() {
    let white: SpectralMeasure = SpectralModel::white_noise(1.0 / (2.0 * PI)).into();
    let v = variance_under(&adenstedt_weights(2, 1.0).unwrap(), &white).unwrap();
    assert!((v - 0.34).abs() < 1e-14);
    let atom = SpectralMeasure::new(SpectralModel::white_noise(1.0), vec![Atom { angle: 0.0, mass: 0.25 }]).unwrap();
    let v = variance_under(&lse_weights(20_000), &atom).unwrap();
    assert!((v - 0.25).abs() < 1e-3);
}

#[test]
fn inverse_density_approximation() {
    let white: SpectralMeasure = SpectralModel::white_noise(1.0 / (2.0 * PI)).into();
    assert!((inverse_density_approx_variance(&white, 9).unwrap() - 0.1).abs() < 1e-15);
    let ma: SpectralMeasure = SpectralModel::ma(&[1.0, 0.5], 1.0).into();
    let approx = inverse_density_approx_variance(&ma, 4096).unwrap();
    let exact = blue_for(&ma, 4096, Precision::Double).unwrap().variance;
    assert!((approx / exact - 1.0).abs() <= 0.03);
    let f1: SpectralMeasure = SpectralModel::power_at_origin(1.0).into();
    assert!(matches!(inverse_density_approx_variance(&f1, 8), Err(Error::Validation(_))));
}
