//! Gaussian sample paths and Monte Carlo variances.
//!
//! Paths come in pairs: the real and imaginary parts of one circulant
//! embedding draw are independent. Pair `p` uses the ChaCha8 stream `p` of
//! the seed, with standard normals from the ziggurat sampler, so output does
//! not depend on the number of worker threads.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::covariance::{covariance_sequence, discretize};
use crate::error::{Error, Result};
use crate::estimators::EstimatorWeights;
use crate::quadrature::Discretization;
use crate::spectra::SpectralMeasure;

/// Relative size of a negative embedding eigenvalue that forces the fallback.
const EMBEDDING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    CirculantEmbedding,
    SpectralSynthesis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathBatch {
    /// `replicates x length`.
    pub paths: Vec<Vec<f64>>,
    pub seed: u64,
    pub generator: Generator,
}

enum Sampler {
    Circulant {
        scale: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Synthesis {
        nodes: Vec<f64>,
        amplitudes: Vec<f64>,
    },
}

impl Sampler {
    fn new(measure: &SpectralMeasure, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::validation("path length must be positive"));
        }
        let cov = covariance_sequence(measure, length)?;
        let r = &cov.values;
        let size = 2 * length;
        let mut c: Vec<Complex64> = (0..size)
            .map(|j| Complex64::new(r[j.min(size - j)], 0.0))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(size);
        fft.process(&mut c);
        let eig: Vec<f64> = c.iter().map(|z| z.re).collect();
        let top = eig.iter().cloned().fold(0.0, f64::max);
        if eig.iter().all(|&e| e >= -EMBEDDING_TOL * top) {
            let scale = eig.iter().map(|&e| (e.max(0.0) / size as f64).sqrt()).collect();
            return Ok(Sampler::Circulant { scale, fft });
        }
        let mut disc = if measure.density.identically_zero() {
            Discretization::default()
        } else {
            discretize(&measure.density, length)?
        };
        for a in &measure.atoms {
            disc.push_atom(a.angle, a.mass);
        }
        Ok(Sampler::Synthesis {
            amplitudes: disc.masses.iter().map(|m| m.max(0.0).sqrt()).collect(),
            nodes: disc.nodes,
        })
    }

    fn generator(&self) -> Generator {
        match self {
            Sampler::Circulant { .. } => Generator::CirculantEmbedding,
            Sampler::Synthesis { .. } => Generator::SpectralSynthesis,
        }
    }

    fn pair(&self, length: usize, seed: u64, index: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        match self {
            Sampler::Circulant { scale, fft } => {
                let mut z: Vec<Complex64> = scale
                    .iter()
                    .map(|&s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(re, im) * s
                    })
                    .collect();
                fft.process(&mut z);
                (
                    z[..length].iter().map(|v| v.re).collect(),
                    z[..length].iter().map(|v| v.im).collect(),
                )
            }
            Sampler::Synthesis { nodes, amplitudes } => {
                let mut draw = || {
                    let mut x = vec![0.0; length];
                    for (&l, &a) in nodes.iter().zip(amplitudes) {
                        let ca: f64 = rng.sample(StandardNormal);
                        let sa: f64 = rng.sample(StandardNormal);
                        let (s1, c1) = l.sin_cos();
                        let (mut s, mut c) = (0.0, 1.0);
                        for (t, xt) in x.iter_mut().enumerate() {
                            if t % 64 == 0 {
                                (s, c) = (t as f64 * l).sin_cos();
                            }
                            *xt += a * (ca * c + sa * s);
                            let cn = c * c1 - s * s1;
                            s = s * c1 + c * s1;
                            c = cn;
                        }
                    }
                    x
                };
                let first = draw();
                (first, draw())
            }
        }
    }
}

/// `replicates` independent zero-mean Gaussian paths `X(0..length)`.
pub fn sample_paths(measure: &SpectralMeasure, length: usize, replicates: usize, seed: u64) -> Result<PathBatch> {
    measure.validate()?;
    let sampler = Sampler::new(measure, length)?;
    let pairs = replicates.div_ceil(2);
    let mut paths: Vec<Vec<f64>> = (0..pairs as u64)
        .into_par_iter()
        .flat_map_iter(|p| {
            let (a, b) = sampler.pair(length, seed, p);
            [a, b]
        })
        .collect();
    paths.truncate(replicates);
    Ok(PathBatch {
        paths,
        seed,
        generator: sampler.generator(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub replicates: usize,
    pub seed: u64,
    pub generator: Generator,
}

/// Sample variance of `sum_k c_k X(k)` across replicates, with a jackknife
/// standard error. Paths are generated and consumed without being stored.
pub fn monte_carlo_variance(
    weights: &EstimatorWeights,
    measure: &SpectralMeasure,
    replicates: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    weights.check()?;
    measure.validate()?;
    if replicates < 3 {
        return Err(Error::validation("at least three replicates are needed"));
    }
    let c = &weights.coefficients;
    let length = c.len();
    let sampler = Sampler::new(measure, length)?;
    let dot = |x: &[f64]| x.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
    let mut values: Vec<f64> = (0..replicates.div_ceil(2) as u64)
        .into_par_iter()
        .flat_map_iter(|p| {
            let (a, b) = sampler.pair(length, seed, p);
            [dot(&a), dot(&b)]
        })
        .collect();
    values.truncate(replicates);
    let (estimate, standard_error) = variance_with_jackknife(&values);
    Ok(MonteCarloEstimate {
        estimate,
        standard_error,
        replicates,
        seed,
        generator: sampler.generator(),
    })
}

/// Unbiased sample variance and its jackknife standard error.
pub fn variance_with_jackknife(x: &[f64]) -> (f64, f64) {
    let r = x.len() as f64;
    let mean = x.iter().sum::<f64>() / r;
    let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let s2 = ss / (r - 1.0);
    // leave-one-out variances in closed form
    let loo: Vec<f64> = x
        .iter()
        .map(|v| (ss - r / (r - 1.0) * (v - mean).powi(2)) / (r - 2.0))
        .collect();
    let loo_mean = loo.iter().sum::<f64>() / r;
    let jack = (r - 1.0) / r * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>();
    (s2, jack.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{Atom, SpectralModel};

    fn lag_stats(batch: &PathBatch, lag: usize) -> (f64, f64) {
        let per: Vec<f64> = batch
            .paths
            .iter()
            .map(|p| p.iter().zip(&p[lag..]).map(|(a, b)| a * b).sum::<f64>() / (p.len() - lag) as f64)
            .collect();
        let k = per.len() as f64;
        let m = per.iter().sum::<f64>() / k;
        let sd = (per.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
        (m, sd / k.sqrt())
    }

    #[test]
    fn white_noise_lag_zero() {
        let m = SpectralMeasure::from(SpectralModel::white_noise(1.0 / (2.0 * std::f64::consts::PI)));
        let b = sample_paths(&m, 4096, 256, 7).unwrap();
        assert_eq!(b.generator, Generator::CirculantEmbedding);
        assert_eq!(b.paths.len(), 256);
        let (m0, se) = lag_stats(&b, 0);
        assert!((m0 - 1.0).abs() < 3.0 * se, "{m0} +- {se}");
    }

    #[test]
    fn power_at_origin_lag_one() {
        let m = SpectralMeasure::from(SpectralModel::power_at_origin(1.0));
        let b = sample_paths(&m, 1024, 64, 11).unwrap();
        let (m1, se) = lag_stats(&b, 1);
        assert!((m1 + 1.0).abs() < 3.0 * se, "{m1} +- {se}");
    }

    #[test]
    fn arfima_uses_embedding() {
        let m = SpectralMeasure::from(SpectralModel::ArfimaFactor {
            d: 0.25,
            base: Box::new(SpectralModel::white_noise(1.0)),
        });
        assert_eq!(sample_paths(&m, 4096, 2, 1).unwrap().generator, Generator::CirculantEmbedding);
    }

    #[test]
    fn seeds_reproduce() {
        let m = SpectralMeasure::from(SpectralModel::ma(&[1.0, 0.5], 1.0));
        let a = sample_paths(&m, 16, 5, 3).unwrap();
        let b = sample_paths(&m, 16, 5, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.paths, sample_paths(&m, 16, 5, 4).unwrap().paths);
    }

    #[test]
    fn atoms_fall_back_to_synthesis() {
        let m = SpectralMeasure::new(
            SpectralModel::white_noise(0.01),
            vec![Atom { angle: 0.3, mass: 1.0 }],
        )
        .unwrap();
        let b = sample_paths(&m, 64, 400, 5).unwrap();
        assert_eq!(b.generator, Generator::SpectralSynthesis);
        let r0 = covariance_sequence(&m, 0).unwrap().values[0];
        let (m0, se) = lag_stats(&b, 0);
        assert!((m0 - r0).abs() < 4.0 * se, "{m0} vs {r0} +- {se}");
    }

    #[test]
    fn jackknife_matches_normal_theory() {
        let x: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 / 1000.0 - 0.5).collect();
        let (s2, se) = variance_with_jackknife(&x);
        assert!((s2 - 1.0 / 12.0).abs() < 1e-3);
        // uniform: Var(s^2) ~ (mu4 - s^4) / n with mu4 = 1/80
        let expect = ((1.0 / 80.0 - 1.0 / 144.0) / 1000.0f64).sqrt();
        assert!((se / expect - 1.0).abs() < 0.05, "{se} vs {expect}");
    }
}
