use statmean_core::estimators::lse_weights;
use statmean_core::simulate::{monte_carlo_variance, sample_paths, variance_with_jackknife};
use statmean_core::{Generator, SpectralMeasure, SpectralModel};

fn ma() -> SpectralMeasure {
    SpectralModel::ma(&[1.0, 0.5], 1.0).into()
}

#[test]
fn golden_paths() {
    let b = sample_paths(&ma(), 4, 3, 42).unwrap();
    let golden = [
        [1.1556750491783259, 0.10765481840976276, 0.707285807675994, 0.5158159996052178],
        [0.6877992382875261, 1.8198061547262125, 0.9276976099979388, 0.7785277995879362],
        [0.23983116909241198, 1.8461464192850188, 1.6841003923068663, 0.040380632804000505],
    ];
    for (p, g) in b.paths.iter().zip(golden) {
        for (x, y) in p.iter().zip(g) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn golden_monte_carlo() {
    let mc = monte_carlo_variance(&lse_weights(9), &ma(), 1000, 7).unwrap();
    assert!((mc.estimate - 0.20567028436410176).abs() < 1e-12);
    assert!((mc.standard_error - 0.00893264357869833).abs() < 1e-12);
    assert_eq!(mc.generator, Generator::CirculantEmbedding);
}

#[test]
fn output_is_independent_of_thread_count() {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = one.install(|| sample_paths(&ma(), 32, 9, 5).unwrap());
    let b = three.install(|| sample_paths(&ma(), 32, 9, 5).unwrap());
    assert_eq!(a, b);
}

#[test]
fn prefix_of_replicates_is_stable() {
    let a = sample_paths(&ma(), 16, 4, 9).unwrap();
    let b = sample_paths(&ma(), 16, 7, 9).unwrap();
    assert_eq!(a.paths[..], b.paths[..4]);
}

#[test]
fn jackknife_scales_quadratically() {
    let x: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
    let (s1, e1) = variance_with_jackknife(&x);
    let (s2, e2) = variance_with_jackknife(&y);
    assert!((s2 / s1 - 9.0).abs() < 1e-12);
    assert!((e2 / e1 - 9.0).abs() < 1e-9);
}

#[test]
fn invalid_requests_are_rejected() {
    assert!(monte_carlo_variance(&lse_weights(3), &ma(), 2, 1).is_err());
    assert!(sample_paths(&ma(), 0, 4, 1).is_err());
}
