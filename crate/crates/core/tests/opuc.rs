use std::f64::consts::PI;

use num_complex::Complex64;
use statmean_core::opuc::{christoffel, christoffel_curve, optimal_polynomial, szego_function, szego_recursion};
use statmean_core::spectra::SingularPoint;
use statmean_core::toeplitz::blue_for;
use statmean_core::{Atom, Precision, SpectralMeasure, SpectralModel};

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn kappa_limit_for_ma1() {
    let ma = SpectralModel::ma(&[1.0, -0.5], 1.0);
    let st = szego_recursion(&ma.clone().into(), 256, &[]).unwrap();
    let d0 = szego_function(&ma, Complex64::new(0.0, 0.0)).unwrap().value.re;
    // the moments r(k) carry no 1/(2 pi), so kappa_m -> 1 / (sqrt(2 pi) D(0))
    let limit = 1.0 / ((2.0 * PI).sqrt() * d0);
    assert!((st.kappa(256).unwrap() / limit - 1.0).abs() < 1e-6);
    assert!((d0 * d0 - ma.geometric_mean().unwrap()).abs() < 1e-9);
}

#[test]
fn szego_function_reproduces_density_near_boundary() {
    let f = SpectralModel::Arma {
        ma_coefficients: vec![1.0, 0.4],
        ar_coefficients: vec![1.0, -0.3],
        scale: 2.0,
    };
    let l = 0.7;
    let d = szego_function(&f, Complex64::from_polar(0.999, l)).unwrap();
    assert!((d.value.norm_sqr() / f.evaluate(l) - 1.0).abs() < 5e-3);
    let d0 = szego_function(&f, Complex64::new(0.0, 0.0)).unwrap();
    assert!(d0.value.im.abs() < 1e-15 && d0.value.re > 0.0);
}

#[test]
fn mate_boundary_limit() {
    let f = SpectralModel::Arma {
        ma_coefficients: vec![1.0, -0.5],
        ar_coefficients: vec![1.0, 0.3],
        scale: 1.0,
    };
    let xi = Complex64::from_polar(1.0, PI / 3.0);
    let m = 2048;
    let st = szego_recursion(&f.clone().into(), m, &[xi]).unwrap();
    let lhs = (m + 1) as f64 * christoffel(&st, xi, m).unwrap();
    let rhs = 2.0 * PI * f.evaluate(PI / 3.0);
    assert!((lhs / rhs - 1.0).abs() <= 0.02, "{lhs} vs {rhs}");
}

#[test]
fn fisher_hartwig_growth() {
    let alpha = 0.5;
    let l0 = PI / 2.0;
    let f = SpectralModel::FisherHartwig {
        base: Box::new(SpectralModel::white_noise(1.0)),
        singular_points: vec![
            SingularPoint { angle: l0, exponent: alpha },
            SingularPoint { angle: -l0, exponent: alpha },
        ],
    };
    let xi = Complex64::from_polar(1.0, l0);
    let st = szego_recursion(&f.into(), 1024, &[xi]).unwrap();
    let phi = &st.phi_at_probes[0];
    let slope = (phi[1024].norm() / phi[64].norm()).ln() / 16f64.ln();
    assert!((slope - alpha).abs() <= 0.1, "slope {slope}");
}

#[test]
fn christoffel_matches_toeplitz() {
    let models = [
        SpectralMeasure::from(SpectralModel::white_noise(1.0)),
        SpectralModel::ma(&[1.0, -0.5], 1.0).into(),
        SpectralModel::ar(&[1.0, -0.5], 1.0).into(),
        SpectralModel::power_at_origin(0.25).into(),
        SpectralModel::power_at_origin(1.0).into(),
        SpectralMeasure::new(SpectralModel::white_noise(1.0), vec![Atom { angle: 0.0, mass: 0.7 }]).unwrap(),
    ];
    for m in &models {
        let st = szego_recursion(m, 128, &[one()]).unwrap();
        for n in [1, 2, 5, 17, 64, 128] {
            let toe = blue_for(m, n, Precision::Double).unwrap();
            let ch = christoffel(&st, one(), n).unwrap();
            assert!((ch / toe.variance - 1.0).abs() <= 1e-8, "{} n={n}: {ch} vs {}", m.density.name(), toe.variance);
            let p = optimal_polynomial(&st, n).unwrap();
            let dev = p
                .iter()
                .zip(&toe.weights.coefficients)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < 1e-8, "weights {n}: {dev}");
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn gegenbauer_matches_optimal_polynomial() {
    let m = SpectralMeasure::from(SpectralModel::power_at_origin(1.0));
    let st = szego_recursion(&m, 16, &[one()]).unwrap();
    for n in 1..=16 {
        let p = optimal_polynomial(&st, n).unwrap();
        let g = statmean_core::estimators::gegenbauer_optimal(n, 1.0).unwrap();
        for (a, b) in p.iter().zip(&g) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn christoffel_is_monotone() {
    let probes = [one(), Complex64::from_polar(1.0, 1.1), Complex64::new(0.4, 0.2)];
    for model in [SpectralModel::power_at_origin(0.25), SpectralModel::arc_supported(PI / 3.0, 1.0)] {
        let st = szego_recursion(&model.into(), 60, &probes).unwrap();
        for &p in &probes {
            let c = christoffel_curve(&st, p).unwrap();
            assert!(c.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}

#[test]
fn larger_measure_has_smaller_kernel() {
    let base = SpectralModel::ma(&[1.0, 0.5], 1.0);
    let small = SpectralMeasure::new(base.clone(), vec![Atom { angle: 0.5, mass: 0.1 }]).unwrap();
    let big = SpectralMeasure::new(
        SpectralModel::scaled(base, 1.5),
        vec![Atom { angle: 0.5, mass: 0.3 }, Atom { angle: 2.0, mass: 0.2 }],
    )
    .unwrap();
    let probes = [one(), Complex64::from_polar(1.0, 0.5)];
    let s1 = szego_recursion(&small, 40, &probes).unwrap();
    let s2 = szego_recursion(&big, 40, &probes).unwrap();
    for &p in &probes {
        for m in 0..=40 {
            assert!(s2.kernel_diagonal(p, m).unwrap() <= s1.kernel_diagonal(p, m).unwrap() + 1e-12);
        }
    }
}

#[test]
fn atom_at_zero_matches_gram_schmidt() {
    // Gram-Schmidt on monomials in the moment inner product gives the
    // Verblunsky coefficients as -Phi_{k+1}(0)
    let w = 0.5;
    let m = SpectralMeasure::new(SpectralModel::white_noise(1.0), vec![Atom { angle: 0.0, mass: w }]).unwrap();
    let n = 32;
    let st = szego_recursion(&m, n, &[]).unwrap();
    let r = |k: i64| if k == 0 { 2.0 * PI + w } else { w };
    let gram = nalgebra::DMatrix::from_fn(n + 1, n + 1, |i, j| r(i as i64 - j as i64));
    for k in 0..n {
        // Phi_{k+1} = z^{k+1} - proj onto span{1..z^k}
        let g = gram.view((0, 0), (k + 1, k + 1)).into_owned();
        let rhs = nalgebra::DVector::from_fn(k + 1, |i, _| r(k as i64 + 1 - i as i64));
        let c = g.cholesky().unwrap().solve(&rhs);
        let alpha = c[0];
        assert!((alpha - st.verblunsky[k]).abs() < 1e-9, "k={k}: {alpha} vs {}", st.verblunsky[k]);
    }
}
