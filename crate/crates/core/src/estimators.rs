//! Weight vectors of linear unbiased estimators `sum_k c_k X(k)` and their
//! variances under a spectral measure.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::covariance_sequence;
use crate::error::{Error, Result};
use crate::quadrature::{fold_angle, integrate_even};
use crate::special::{ln_beta, ln_binomial};
use crate::spectra::{SpectralMeasure, SpectralModel};
use crate::toeplitz::{blue_for, quadratic_form};
use crate::Precision;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum WeightLabel {
    Lse,
    Parabolic,
    Adenstedt { alpha: f64 },
    Blue { model: String },
    PseudoBest { model: String },
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorWeights {
    pub coefficients: Vec<f64>,
    pub label: WeightLabel,
}

impl EstimatorWeights {
    /// Custom weights; they must sum to one.
    pub fn custom(coefficients: Vec<f64>) -> Result<Self> {
        let w = EstimatorWeights {
            coefficients,
            label: WeightLabel::Custom,
        };
        w.check()?;
        Ok(w)
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn check(&self) -> Result<()> {
        if self.coefficients.is_empty() {
            return Err(Error::validation("estimator needs at least one weight"));
        }
        let s: f64 = self.coefficients.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!("weights sum to {s}, not 1")));
        }
        Ok(())
    }

    /// `sum_k c_k e^{ik lambda}`.
    pub fn transfer(&self, lambda: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, lambda);
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }
}

/// Sample mean of `X(0..=n)`.
pub fn lse_weights(n: usize) -> EstimatorWeights {
    EstimatorWeights {
        coefficients: vec![1.0 / (n as f64 + 1.0); n + 1],
        label: WeightLabel::Lse,
    }
}

/// `c_k = 6n/(n^2 - 1) (k/n)(1 - k/n)`.
pub fn parabolic_weights(n: usize) -> Result<EstimatorWeights> {
    if n < 2 {
        return Err(Error::validation("parabolic weights need n >= 2"));
    }
    let nf = n as f64;
    let scale = 6.0 / (nf * (nf * nf - 1.0));
    let coefficients = (0..=n)
        .map(|k| scale * (k * (n - k)) as f64)
        .collect();
    Ok(EstimatorWeights {
        coefficients,
        label: WeightLabel::Parabolic,
    })
}

/// `c_k(n, alpha) = C(n, k) B(alpha + k + 1, alpha + n - k + 1) / B(alpha + 1, alpha + 1)`,
/// optimal for `f_alpha`.
pub fn adenstedt_weights(n: usize, alpha: f64) -> Result<EstimatorWeights> {
    if !(alpha > -0.5) {
        return Err(Error::validation("Adenstedt weights need alpha > -1/2"));
    }
    let base = ln_beta(alpha + 1.0, alpha + 1.0);
    let nf = n as f64;
    let mut c: Vec<f64> = (0..=n)
        .map(|k| {
            let kf = k as f64;
            (ln_binomial(n as u64, k as u64) + ln_beta(alpha + kf + 1.0, alpha + nf - kf + 1.0) - base).exp()
        })
        .collect();
    // enforce the exact symmetry c_k = c_{n-k}
    for k in 0..=n / 2 {
        let v = 0.5 * (c[k] + c[n - k]);
        c[k] = v;
        c[n - k] = v;
    }
    let s: f64 = c.iter().sum();
    c.iter_mut().for_each(|v| *v /= s);
    Ok(EstimatorWeights {
        coefficients: c,
        label: WeightLabel::Adenstedt { alpha },
    })
}

/// `B(n + 1, 2 alpha + 1) / B(alpha + 1, alpha + 1)`.
pub fn adenstedt_variance_closed_form(n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > -0.5) {
        return Err(Error::validation("alpha must exceed -1/2"));
    }
    Ok((ln_beta(n as f64 + 1.0, 2.0 * alpha + 1.0) - ln_beta(alpha + 1.0, alpha + 1.0)).exp())
}

/// Gegenbauer polynomial `C_n^{(a)}(x)` by the three-term recurrence.
pub fn gegenbauer(n: usize, a: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = 2.0 * a * x;
    for m in 2..=n {
        let mf = m as f64;
        let p2 = (2.0 * x * (mf + a - 1.0) * p1 - (mf + 2.0 * a - 2.0) * p0) / mf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Coefficients of `p_{n,alpha}` from `p(e^{2i theta}) = e^{in theta} C_n^{(alpha+1)}(cos theta) / C_n^{(alpha+1)}(1)`,
/// recovered by sampling at the `(n+1)`-th roots of unity.
pub fn gegenbauer_optimal(n: usize, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > -0.5) {
        return Err(Error::validation("alpha must exceed -1/2"));
    }
    let a = alpha + 1.0;
    let norm = gegenbauer(n, a, 1.0);
    let m = n + 1;
    let samples: Vec<Complex64> = (0..m)
        .map(|j| {
            let theta = PI * j as f64 / m as f64;
            Complex64::from_polar(1.0, n as f64 * theta) * (gegenbauer(n, a, theta.cos()) / norm)
        })
        .collect();
    Ok((0..=n)
        .map(|k| {
            let s: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, &p)| p * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / m as f64))
                .sum();
            s.re / m as f64
        })
        .collect())
}

/// BLUE weights computed under `design`, to be evaluated under another measure.
pub fn pseudo_best_weights(design: &SpectralModel, n: usize) -> Result<EstimatorWeights> {
    let s = blue_for(&design.clone().into(), n, Precision::Double)?;
    Ok(EstimatorWeights {
        coefficients: s.weights.coefficients,
        label: WeightLabel::PseudoBest { model: design.name() },
    })
}

/// Fejér kernel `F_T(lambda) = |sum_{t<T} e^{it lambda}|^2 / (2 pi T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FejerKernel {
    pub order: usize,
}

impl FejerKernel {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::validation("Fejér kernel order must be positive"));
        }
        Ok(FejerKernel { order })
    }

    pub fn evaluate(&self, lambda: f64) -> f64 {
        let t = self.order as f64;
        let l = fold_angle(lambda);
        let d = if l == 0.0 {
            t
        } else {
            (0.5 * t * l).sin() / (0.5 * l).sin()
        };
        d * d / (2.0 * PI * t)
    }
}

/// Variance of `sum_k c_k X(k)` under `measure`.
///
/// For least-squares weights the value is cross-checked against the Fejér
/// integral `(2 pi/T) int F_T f + sum_j w_j |sum_k c_k e^{ik lambda_j}|^2`.
pub fn variance_under(weights: &EstimatorWeights, measure: &SpectralMeasure) -> Result<f64> {
    weights.check()?;
    let n = weights.order();
    let cov = covariance_sequence(measure, n)?;
    let v = quadratic_form(&weights.coefficients, &cov)?;
    if weights.label == WeightLabel::Lse {
        let f = fejer_variance(weights, measure)?;
        let err = (f - v).abs() / v.abs().max(f64::MIN_POSITIVE);
        if err > 1e-9 {
            return Err(Error::Accuracy {
                achieved: err,
                context: "Fejér-integral and covariance routes disagree".into(),
            });
        }
    }
    Ok(v)
}

/// LSE variance through the Fejér kernel.
pub fn fejer_variance(weights: &EstimatorWeights, measure: &SpectralMeasure) -> Result<f64> {
    let t = weights.coefficients.len();
    let kernel = FejerKernel::new(t)?;
    let model = &measure.density;
    let density_part = if model.identically_zero() {
        0.0
    } else {
        integrate_even(&model.plan(t), |l| kernel.evaluate(l) * model.evaluate(l))?
    };
    let atoms: f64 = measure
        .atoms
        .iter()
        .map(|a| a.mass * weights.transfer(a.angle).norm_sqr())
        .sum();
    Ok(2.0 * PI / t as f64 * density_part + atoms)
}
