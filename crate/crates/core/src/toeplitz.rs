//! Symmetric Toeplitz solves for the BLUE: `c = R^{-1} 1 / (1' R^{-1} 1)`,
//! `sigma^2 = 1 / (1' R^{-1} 1)`.
//!
//! The production path is Levinson–Durbin with an all-ones right-hand side
//! followed by one refinement step whose residual is accumulated in
//! double-double. A dense double-double Cholesky factorization takes over
//! when the extended-precision recursion breaks down on small systems.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{covariance_sequence_with, CovarianceSequence};
use crate::dd::{DoubleDouble, Real};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorWeights, WeightLabel};
use crate::spectra::SpectralMeasure;
use crate::Precision;

/// `R_n^{-1}` is approximated by `INVERSE_DENSITY_CALIBRATION` times the
/// Toeplitz matrix of the Fourier coefficients `int e^{ik lambda} (2 pi)^2 / f`.
/// The constant makes the approximation exact for constant densities.
pub const INVERSE_DENSITY_CALIBRATION: f64 = 1.0 / (16.0 * PI * PI * PI * PI);

const CHOLESKY_FALLBACK_MAX: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlueSolution {
    pub n: usize,
    pub variance: f64,
    pub weights: EstimatorWeights,
    /// Levinson reflection coefficients of the normalized system.
    pub reflections: Vec<f64>,
    /// `log10 prod_k 1/(1 - kappa_k^2)`, a cheap growth proxy.
    pub log10_condition_estimate: f64,
    pub precision: Precision,
    pub solver: Solver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Solver {
    Levinson,
    Cholesky,
}

/// Breakdown in the recursion: the order reached and the offending reflection.
#[derive(Debug, Clone, Copy)]
pub struct Breakdown {
    pub order: usize,
    pub reflection: f64,
}

/// Solves `T x = b` for the symmetric Toeplitz matrix with first column `t`
/// (`t[0] = 1` assumed). Returns the solution and the reflection coefficients.
pub fn levinson<T: Real>(t: &[T], b: &[T]) -> std::result::Result<(Vec<T>, Vec<f64>), Breakdown> {
    let n = b.len();
    assert!(t.len() >= n && n >= 1);
    let margin = T::breakdown_margin();
    let mut x = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];
    let mut refl = Vec::with_capacity(n.saturating_sub(1));
    x[0] = b[0];
    if n == 1 {
        return Ok((x, refl));
    }
    let mut alpha = -t[1];
    if alpha.abs().to_f64() >= 1.0 - margin {
        return Err(Breakdown { order: 1, reflection: alpha.to_f64() });
    }
    refl.push(alpha.to_f64());
    y[0] = alpha;
    let mut beta = T::one();
    let mut scratch = vec![T::zero(); n];
    for k in 1..n {
        beta = (T::one() - alpha * alpha) * beta;
        let mut dot = T::zero();
        for j in 0..k {
            dot += t[j + 1] * x[k - 1 - j];
        }
        let mu = (b[k] - dot) / beta;
        for j in 0..k {
            x[j] += mu * y[k - 1 - j];
        }
        x[k] = mu;
        if k < n - 1 {
            let mut dot = T::zero();
            for j in 0..k {
                dot += t[j + 1] * y[k - 1 - j];
            }
            alpha = -(t[k + 1] + dot) / beta;
            if alpha.abs().to_f64() >= 1.0 - margin {
                return Err(Breakdown { order: k + 1, reflection: alpha.to_f64() });
            }
            refl.push(alpha.to_f64());
            for j in 0..k {
                scratch[j] = y[j] + alpha * y[k - 1 - j];
            }
            y[..k].copy_from_slice(&scratch[..k]);
            y[k] = alpha;
        }
    }
    Ok((x, refl))
}

/// `b - T x` accumulated in double-double.
fn residual_dd(t: &[DoubleDouble], x: &[DoubleDouble], b: &[DoubleDouble]) -> Vec<DoubleDouble> {
    let n = x.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = b[i];
            for (j, &xj) in x.iter().enumerate() {
                acc -= t[i.abs_diff(j)] * xj;
            }
            acc
        })
        .collect()
}

/// Dense Cholesky solve of the symmetric Toeplitz system, in double-double.
pub fn cholesky_solve_dd(t: &[DoubleDouble], b: &[DoubleDouble]) -> std::result::Result<Vec<DoubleDouble>, Breakdown> {
    let n = b.len();
    let mut l = vec![DoubleDouble::ZERO; n * n];
    for j in 0..n {
        let mut d = t[0];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d.hi > 0.0) {
            return Err(Breakdown { order: j, reflection: d.to_f64() });
        }
        let dj = d.sqrt();
        l[j * n + j] = dj;
        let rows: Vec<(usize, DoubleDouble)> = ((j + 1)..n)
            .into_par_iter()
            .map(|i| {
                let mut s = t[i - j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                (i, s / dj)
            })
            .collect();
        for (i, v) in rows {
            l[i * n + j] = v;
        }
    }
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    Ok(z)
}

fn refine<T: Real>(t: &[T], x: &mut [T]) {
    let t_dd: Vec<DoubleDouble> = t.iter().map(|v| v.to_dd()).collect();
    let x_dd: Vec<DoubleDouble> = x.iter().map(|v| v.to_dd()).collect();
    let ones = vec![DoubleDouble::ONE; x.len()];
    let res = residual_dd(&t_dd, &x_dd, &ones);
    let res_t: Vec<T> = res.iter().map(|v| T::from_dd(*v)).collect();
    if let Ok((d, _)) = levinson(t, &res_t) {
        for (xi, di) in x.iter_mut().zip(d) {
            *xi += di;
        }
    }
}

fn finish(
    n: usize,
    r0: f64,
    x: Vec<DoubleDouble>,
    reflections: Vec<f64>,
    precision: Precision,
    solver: Solver,
) -> BlueSolution {
    let sum = x.iter().fold(DoubleDouble::ZERO, |a, &b| a + b);
    let mut c: Vec<f64> = x.iter().map(|&v| (v / sum).to_f64()).collect();
    let s: f64 = c.iter().sum();
    c.iter_mut().for_each(|v| *v /= s);
    let log10_condition_estimate = reflections.iter().map(|k| -(1.0 - k * k).log10()).sum();
    BlueSolution {
        n,
        variance: (DoubleDouble::from_f64(r0) / sum).to_f64(),
        weights: EstimatorWeights {
            coefficients: c,
            label: WeightLabel::Custom,
        },
        reflections,
        log10_condition_estimate,
        precision,
        solver,
    }
}

/// BLUE of order `n` (observations `X(0..=n)`) from `r(0..=n)`.
pub fn blue_solve(cov: &CovarianceSequence, n: usize, precision: Precision) -> Result<BlueSolution> {
    if cov.order() < n {
        return Err(Error::validation(format!(
            "covariance has order {} but order {n} was requested",
            cov.order()
        )));
    }
    let r0 = cov.values[0];
    match precision {
        Precision::Double => {
            let t: Vec<f64> = cov.values[..=n].iter().map(|v| v / r0).collect();
            let ones = vec![1.0; n + 1];
            let (mut x, refl) = levinson(&t, &ones).map_err(|b| Error::NearSingular {
                order: b.order,
                precision,
                reflection: b.reflection,
            })?;
            refine(&t, &mut x);
            let x = x.into_iter().map(DoubleDouble::from_f64).collect();
            Ok(finish(n, r0, x, refl, precision, Solver::Levinson))
        }
        Precision::DoubleDouble => {
            let vals = cov.dd_values();
            let r0d = vals[0];
            let t: Vec<DoubleDouble> = vals[..=n].iter().map(|&v| v / r0d).collect();
            let ones = vec![DoubleDouble::ONE; n + 1];
            match levinson(&t, &ones) {
                Ok((mut x, refl)) => {
                    refine(&t, &mut x);
                    Ok(finish_dd(n, r0d, x, refl, Solver::Levinson))
                }
                Err(b) if n < CHOLESKY_FALLBACK_MAX => {
                    let x = cholesky_solve_dd(&t, &ones).map_err(|c| Error::NearSingular {
                        order: c.order.max(b.order),
                        precision,
                        reflection: b.reflection,
                    })?;
                    Ok(finish_dd(n, r0d, x, vec![], Solver::Cholesky))
                }
                Err(b) => Err(Error::NearSingular {
                    order: b.order,
                    precision,
                    reflection: b.reflection,
                }),
            }
        }
    }
}

fn finish_dd(n: usize, r0: DoubleDouble, x: Vec<DoubleDouble>, refl: Vec<f64>, solver: Solver) -> BlueSolution {
    let sum = x.iter().fold(DoubleDouble::ZERO, |a, &b| a + b);
    let mut s = finish(n, r0.to_f64(), x, refl, Precision::DoubleDouble, solver);
    s.variance = (r0 / sum).to_f64();
    s
}

/// BLUE for a measure, computing the covariance in the requested precision.
pub fn blue_for(measure: &SpectralMeasure, n: usize, precision: Precision) -> Result<BlueSolution> {
    measure.check_order(n)?;
    let cov = covariance_sequence_with(measure, n, precision)?;
    let mut s = blue_solve(&cov, n, precision)?;
    s.weights.label = WeightLabel::Blue {
        model: measure.density.name(),
    };
    Ok(s)
}

/// Tries double precision first and escalates on breakdown.
pub fn blue_for_auto(measure: &SpectralMeasure, n: usize) -> Result<BlueSolution> {
    match blue_for(measure, n, Precision::Double) {
        Err(Error::NearSingular { .. }) => blue_for(measure, n, Precision::DoubleDouble),
        other => other,
    }
}

/// `sum_{j,k} c_j c_k r(|j - k|)`, aggregated by lag over the nonzero
/// covariances with products accumulated in double-double.
pub fn quadratic_form(weights: &[f64], cov: &CovarianceSequence) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::validation("empty weight vector"));
    }
    if weights.len() > cov.values.len() {
        return Err(Error::validation(format!(
            "{} weights need covariance order {}, have {}",
            weights.len(),
            weights.len() - 1,
            cov.order()
        )));
    }
    let n = weights.len();
    let total = (0..n)
        .into_par_iter()
        .filter(|&t| cov.values[t] != 0.0)
        .map(|t| {
            let mut a = DoubleDouble::ZERO;
            for k in 0..n - t {
                a += DoubleDouble::mul_f64s(weights[k], weights[k + t]);
            }
            let r = cov.extended.as_ref().map_or(DoubleDouble::from_f64(cov.values[t]), |e| e[t]);
            let term = a * r;
            if t == 0 {
                term
            } else {
                term.mul_f64(2.0)
            }
        })
        .reduce(|| DoubleDouble::ZERO, |a, b| a + b);
    Ok(total.to_f64().max(0.0))
}

/// BLUE variance approximated through the Fourier coefficients of `1/f`.
pub fn inverse_density_approx_variance(measure: &SpectralMeasure, n: usize) -> Result<f64> {
    measure.validate()?;
    if !measure.atoms.is_empty() {
        return Err(Error::validation(
            "the inverse-density approximation applies to absolutely continuous measures",
        ));
    }
    let model = &measure.density;
    if !model.inverse_integrable() {
        return Err(Error::validation("1/f is not integrable"));
    }
    let scale = 4.0 * PI * PI;
    let inv = crate::quadrature::Discretization::from_density(&model.plan(n), |l| scale / model.evaluate(l))?;
    let u = inv.moments(n);
    let mut q = (n as f64 + 1.0) * u[0];
    for (t, ut) in u.iter().enumerate().skip(1) {
        q += 2.0 * (n + 1 - t) as f64 * ut;
    }
    Ok(1.0 / (INVERSE_DENSITY_CALIBRATION * q))
}
