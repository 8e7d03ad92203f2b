//! Covariance sequences `r(0..=n)` of spectral measures.
//!
//! `r(k) = int e^{ik lambda} f(lambda) d lambda + sum_j w_j cos(k lambda_j)`.
//! Densities of the form `c f_alpha P` with `P` a trigonometric polynomial
//! (white noise, MA models, ARFIMA factors of those, products) use the
//! closed form for `f_alpha`; arc indicators have their own closed form;
//! everything else goes through graded quadrature.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::quadrature::{fold_angle, Discretization};
use crate::special::{binomial, ln_gamma, ln_gamma_signed, sin_pi};
use crate::spectra::{SpectralMeasure, SpectralModel};
use crate::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Exact,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSequence {
    pub values: Vec<f64>,
    /// Double-double values when computed in extended precision.
    #[serde(skip)]
    pub extended: Option<Vec<DoubleDouble>>,
    pub provenance: Provenance,
    pub precision: Precision,
}

impl CovarianceSequence {
    /// Wraps raw values (caller vouches for their origin).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let s = CovarianceSequence {
            values,
            extended: None,
            provenance: Provenance::Exact,
            precision: Precision::Double,
        };
        s.check()?;
        Ok(s)
    }

    /// Highest lag available.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn check(&self) -> Result<()> {
        let r0 = *self
            .values
            .first()
            .ok_or_else(|| Error::validation("empty covariance sequence"))?;
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::validation("r(0) must be positive"));
        }
        if let Some(k) = self.values.iter().position(|r| !r.is_finite() || r.abs() > r0 * (1.0 + 1e-12)) {
            return Err(Error::validation(format!("|r({k})| exceeds r(0)")));
        }
        Ok(())
    }

    /// Values as double-double, widening the double values if needed.
    pub fn dd_values(&self) -> Vec<DoubleDouble> {
        match &self.extended {
            Some(v) => v.clone(),
            None => self.values.iter().map(|&x| DoubleDouble::from_f64(x)).collect(),
        }
    }

    /// Leading part up to lag `n`.
    pub fn truncated(&self, n: usize) -> Self {
        CovarianceSequence {
            values: self.values[..=n].to_vec(),
            extended: self.extended.as_ref().map(|v| v[..=n].to_vec()),
            provenance: self.provenance,
            precision: self.precision,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -0.5) || !alpha.is_finite() {
        return Err(Error::validation("alpha must exceed -1/2"));
    }
    Ok(())
}

/// `r_alpha(k) = (-1)^k Gamma(2 alpha + 1) / (Gamma(alpha + k + 1) Gamma(alpha - k + 1))`
/// for `f_alpha = (2 pi)^{-1} |1 - e^{i lambda}|^{2 alpha}`.
pub fn covariance_exact_falpha(alpha: f64, k: u64) -> Result<f64> {
    check_alpha(alpha)?;
    let kf = k as f64;
    let (lg_b, sign_b) = ln_gamma_signed(alpha - kf + 1.0);
    if sign_b == 0.0 {
        return Ok(0.0);
    }
    let parity = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let ln = ln_gamma(2.0 * alpha + 1.0) - ln_gamma(alpha + kf + 1.0) - lg_b;
    Ok(parity * sign_b * ln.exp())
}

/// `r_alpha(0) = Gamma(2 alpha + 1) / Gamma(alpha + 1)^2`, exact for integer alpha.
fn falpha_r0(alpha: f64) -> f64 {
    if alpha == alpha.floor() && alpha <= 30.0 {
        binomial(2 * alpha as u64, alpha as u64)
    } else {
        (ln_gamma(2.0 * alpha + 1.0) - 2.0 * ln_gamma(alpha + 1.0)).exp()
    }
}

/// `r_alpha(0..=n)` by the ratio `r(k+1)/r(k) = (k - alpha)/(k + alpha + 1)`.
fn falpha_sequence_dd(alpha: f64, n: usize) -> Vec<DoubleDouble> {
    let a = DoubleDouble::from_f64(alpha);
    let mut out = Vec::with_capacity(n + 1);
    let mut r = DoubleDouble::from_f64(falpha_r0(alpha));
    out.push(r);
    for k in 0..n {
        let kd = DoubleDouble::from_f64(k as f64);
        r = r * (kd - a) / (kd + a + DoubleDouble::ONE);
        out.push(r);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptote {
    pub value: f64,
    /// `C_alpha = 0` because `sin(pi alpha) = 0`.
    pub degenerate: bool,
}

/// `C_alpha k^{-2 alpha - 1}` with `C_alpha = Gamma(2 alpha + 1)(-sin pi alpha)/pi`.
pub fn covariance_asymptote_falpha(alpha: f64, k: u64) -> Result<Asymptote> {
    check_alpha(alpha)?;
    if k == 0 {
        return Err(Error::validation("asymptote needs k >= 1"));
    }
    let s = sin_pi(alpha);
    if s == 0.0 {
        return Ok(Asymptote {
            value: 0.0,
            degenerate: true,
        });
    }
    let c = ln_gamma(2.0 * alpha + 1.0).exp() * (-s) / PI;
    Ok(Asymptote {
        value: c * (k as f64).powf(-2.0 * alpha - 1.0),
        degenerate: false,
    })
}

/// `f = c f_alpha(lambda) (p_0 + 2 sum_j p_j cos(j lambda))`.
#[derive(Debug, Clone)]
struct ExactForm {
    alpha: f64,
    c: f64,
    p: Vec<f64>,
}

fn symmetric_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let full = |v: &[f64], j: isize| -> f64 { v.get(j.unsigned_abs()).copied().unwrap_or(0.0) };
    let q = a.len() + b.len() - 2;
    (0..=q as isize)
        .map(|j| {
            let lo = -(a.len() as isize - 1);
            let hi = a.len() as isize - 1;
            (lo..=hi).map(|i| full(a, i) * full(b, j - i)).sum()
        })
        .collect()
}

fn exact_form(model: &SpectralModel) -> Option<ExactForm> {
    match model {
        SpectralModel::WhiteNoise { level } => Some(ExactForm {
            alpha: 0.0,
            c: 2.0 * PI * level,
            p: vec![1.0],
        }),
        SpectralModel::PowerAtOrigin { alpha } => Some(ExactForm {
            alpha: *alpha,
            c: 1.0,
            p: vec![1.0],
        }),
        SpectralModel::Arma {
            ma_coefficients,
            ar_coefficients,
            scale,
        } if ar_coefficients.len() <= 1 => {
            let psi0 = ar_coefficients.first().copied().unwrap_or(1.0);
            let theta: Vec<f64> = if ma_coefficients.is_empty() {
                vec![1.0]
            } else {
                ma_coefficients.clone()
            };
            let q = theta.len() - 1;
            let p = (0..=q)
                .map(|j| (0..=q - j).map(|i| theta[i] * theta[i + j]).sum())
                .collect();
            Some(ExactForm {
                alpha: 0.0,
                c: scale / (psi0 * psi0),
                p,
            })
        }
        SpectralModel::ArfimaFactor { d, base } => {
            let b = exact_form(base)?;
            Some(ExactForm {
                alpha: b.alpha - d,
                ..b
            })
        }
        SpectralModel::Scaled { model, factor } => {
            let b = exact_form(model)?;
            Some(ExactForm { c: b.c * factor, ..b })
        }
        SpectralModel::FrequencyShifted { model, shift } if fold_angle(*shift) < 1e-12 => {
            exact_form(model)
        }
        SpectralModel::Product { left, right } => {
            let l = exact_form(left)?;
            let r = exact_form(right)?;
            Some(ExactForm {
                alpha: l.alpha + r.alpha,
                c: l.c * r.c / (2.0 * PI),
                p: symmetric_convolve(&l.p, &r.p),
            })
        }
        _ => None,
    }
}

fn exact_values(form: &ExactForm, n: usize) -> Vec<DoubleDouble> {
    let q = form.p.len() - 1;
    let ra = falpha_sequence_dd(form.alpha, n + q);
    let at = |m: isize| ra[m.unsigned_abs()];
    let c = DoubleDouble::from_f64(form.c);
    (0..=n as isize)
        .map(|k| {
            let mut acc = DoubleDouble::from_f64(form.p[0]) * at(k);
            for (j, &pj) in form.p.iter().enumerate().skip(1) {
                let j = j as isize;
                acc += DoubleDouble::from_f64(pj) * (at(k + j) + at(k - j));
            }
            c * acc
        })
        .collect()
}

/// `level * int_{alpha <= |lambda| <= pi} cos(k lambda)`.
fn arc_values(alpha: f64, level: f64, n: usize) -> Vec<DoubleDouble> {
    let lv = DoubleDouble::from_f64(level);
    (0..=n)
        .map(|k| {
            if k == 0 {
                (DoubleDouble::PI - DoubleDouble::from_f64(alpha)).mul_f64(2.0) * lv
            } else {
                let (s, _) = DoubleDouble::mul_f64s(k as f64, alpha).sin_cos();
                -(s.mul_f64(2.0) / DoubleDouble::from_f64(k as f64)) * lv
            }
        })
        .collect()
}

fn density_values(model: &SpectralModel, n: usize, precision: Precision) -> Result<(Vec<DoubleDouble>, Provenance)> {
    if let Some(form) = exact_form(model) {
        return Ok((exact_values(&form, n), Provenance::Exact));
    }
    match model {
        SpectralModel::ArcSupported { alpha, level } => {
            return Ok((arc_values(*alpha, *level, n), Provenance::Exact));
        }
        SpectralModel::Scaled { model: inner, factor } => {
            if let SpectralModel::ArcSupported { alpha, level } = inner.as_ref() {
                return Ok((arc_values(*alpha, level * factor, n), Provenance::Exact));
            }
        }
        _ => {}
    }
    let disc = discretize(model, n)?;
    let values = match precision {
        Precision::Double => disc.moments(n).into_iter().map(DoubleDouble::from_f64).collect(),
        Precision::DoubleDouble => disc.moments_dd(n),
    };
    Ok((values, Provenance::Quadrature))
}

/// Positive discrete measure approximating the density, resolving lags to `n`.
pub fn discretize(model: &SpectralModel, n: usize) -> Result<Discretization> {
    Discretization::from_density(&model.plan(n), |l| model.evaluate(l))
}

/// `r(0..=n)` in double precision.
pub fn covariance_sequence(measure: &SpectralMeasure, n: usize) -> Result<CovarianceSequence> {
    covariance_sequence_with(measure, n, Precision::Double)
}

pub fn covariance_sequence_with(
    measure: &SpectralMeasure,
    n: usize,
    precision: Precision,
) -> Result<CovarianceSequence> {
    measure.validate()?;
    let (mut values, provenance) = density_values(&measure.density, n, precision)?;
    for atom in &measure.atoms {
        let w = DoubleDouble::from_f64(atom.mass);
        let a = fold_angle(atom.angle);
        let extra: Vec<DoubleDouble> = (0..=n)
            .into_par_iter()
            .map(|k| {
                let (_, c) = DoubleDouble::mul_f64s(k as f64, a).sin_cos();
                w * c
            })
            .collect();
        values.iter_mut().zip(extra).for_each(|(v, e)| *v += e);
    }
    let seq = CovarianceSequence {
        values: values.iter().map(|v| v.to_f64()).collect(),
        extended: (precision == Precision::DoubleDouble).then_some(values),
        provenance,
        precision,
    };
    seq.check()?;
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Atom;

    #[test]
    fn falpha_closed_form_values() {
        assert!((covariance_exact_falpha(1.0, 0).unwrap() - 2.0).abs() < 1e-14);
        assert!((covariance_exact_falpha(1.0, 1).unwrap() + 1.0).abs() < 1e-14);
        assert_eq!(covariance_exact_falpha(1.0, 2).unwrap(), 0.0);
        assert_eq!(covariance_exact_falpha(2.0, 7).unwrap(), 0.0);
        assert!((covariance_exact_falpha(0.0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(covariance_exact_falpha(0.0, 3).unwrap(), 0.0);
        assert!(covariance_exact_falpha(-0.5, 1).is_err());
    }

    #[test]
    fn recursion_matches_gamma_form() {
        for &alpha in &[-0.4, -0.25, 0.25, 0.5, 1.5, 2.0] {
            let seq = falpha_sequence_dd(alpha, 40);
            for (k, v) in seq.iter().enumerate() {
                let g = covariance_exact_falpha(alpha, k as u64).unwrap();
                assert!((v.to_f64() - g).abs() <= 1e-13 * g.abs().max(1e-3), "alpha={alpha} k={k}");
            }
        }
    }

    #[test]
    fn sequences_for_small_examples() {
        let s = covariance_sequence(&SpectralModel::power_at_origin(1.0).into(), 2).unwrap();
        assert_eq!(s.provenance, Provenance::Exact);
        assert_eq!(s.values, vec![2.0, -1.0, 0.0]);
        let w = covariance_sequence(&SpectralModel::white_noise(1.0 / (2.0 * PI)).into(), 3).unwrap();
        assert!((w.values[0] - 1.0).abs() < 1e-15);
        assert!(w.values[1..].iter().all(|&v| v == 0.0));
        let atom = SpectralMeasure::new(
            SpectralModel::white_noise(1.0 / (2.0 * PI)),
            vec![Atom { angle: 0.0, mass: 0.5 }],
        )
        .unwrap();
        let a = covariance_sequence(&atom, 1).unwrap();
        assert!((a.values[0] - 1.5).abs() < 1e-15 && (a.values[1] - 0.5).abs() < 1e-15);
        let ma = covariance_sequence(&SpectralModel::ma(&[1.0, -0.5], 1.0).into(), 2).unwrap();
        assert!((ma.values[0] - 1.25).abs() < 1e-15);
        assert!((ma.values[1] + 0.5).abs() < 1e-15);
        assert_eq!(ma.values[2], 0.0);
    }

    #[test]
    fn quadrature_reproduces_falpha() {
        // wrap in a shift by 0 so the quadrature path is forced
        for &alpha in &[-0.4, -0.25, 0.25, 1.0, 2.0] {
            let m = SpectralModel::FisherHartwig {
                base: Box::new(SpectralModel::white_noise(1.0 / (2.0 * PI))),
                singular_points: vec![crate::spectra::SingularPoint { angle: 0.0, exponent: alpha }],
            };
            let q = covariance_sequence(&m.into(), 64).unwrap();
            assert_eq!(q.provenance, Provenance::Quadrature);
            for k in 0..=64 {
                let e = covariance_exact_falpha(alpha, k as u64).unwrap();
                assert!((q.values[k] - e).abs() <= 1e-9 * e.abs().max(1.0), "alpha={alpha} k={k}");
            }
        }
    }

    #[test]
    fn arc_closed_form_matches_quadrature() {
        let alpha = PI / 2.0;
        let exact = arc_values(alpha, 1.0, 30);
        let m = SpectralModel::arc_supported(alpha, 1.0);
        let q = discretize(&m, 30).unwrap().moments(30);
        for k in 0..=30 {
            assert!((exact[k].to_f64() - q[k]).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn asymptote_and_degenerate_flag() {
        let a = covariance_asymptote_falpha(1.0, 10).unwrap();
        assert!(a.degenerate && a.value == 0.0);
        let a = covariance_asymptote_falpha(-0.25, 100).unwrap();
        let e = covariance_exact_falpha(-0.25, 100).unwrap();
        assert!((e / a.value - 1.0).abs() < 0.02);
    }
}
