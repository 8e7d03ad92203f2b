//! Spectral density models, spectral measures, and Szegő-type classification.
//!
//! Every model is real and even, so it is evaluated through `|lambda|` folded
//! into `[0, pi]`. Parameter validation happens once, in
//! [`SpectralModel::validate`]; evaluation itself never fails.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{fold_angle, integrate_half, HalfLinePlan};

const TWO_PI: f64 = 2.0 * PI;
const ANGLE_EPS: f64 = 1e-12;

fn default_scale() -> f64 {
    1.0
}

fn default_truncation() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub angle: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum SpectralModel {
    /// Constant density equal to `level`.
    WhiteNoise { level: f64 },
    /// `scale / (2 pi) * |theta(e^{i lambda})|^2 / |psi(e^{i lambda})|^2`,
    /// polynomials given by their coefficients in increasing degree. An empty
    /// list stands for the constant polynomial 1.
    Arma {
        #[serde(default, alias = "ma")]
        ma_coefficients: Vec<f64>,
        #[serde(default, alias = "ar")]
        ar_coefficients: Vec<f64>,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// `(2 pi)^{-1} |1 - e^{i lambda}|^{2 alpha}`.
    PowerAtOrigin { alpha: f64 },
    /// `|1 - e^{-i lambda}|^{-2d}` times `base`.
    ArfimaFactor { d: f64, base: Box<SpectralModel> },
    /// `scale |1 - e^{-i lambda}|^2 sum_k |lambda + 2 pi k|^{-(2H+1)}`.
    FgnDensity {
        hurst: f64,
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default = "default_truncation")]
        series_truncation: usize,
    },
    /// `base` times `prod_k |e^{i lambda} - e^{i lambda_k}|^{2 alpha_k}`.
    FisherHartwig {
        base: Box<SpectralModel>,
        singular_points: Vec<SingularPoint>,
    },
    /// `exp(-|lambda|^{-a})`, zero at the origin.
    FlatZero { a: f64 },
    PollaczekSzego { a: f64 },
    /// `level` on `alpha <= |lambda| <= pi`, zero elsewhere.
    ArcSupported { alpha: f64, level: f64 },
    Product {
        left: Box<SpectralModel>,
        right: Box<SpectralModel>,
    },
    Scaled { model: Box<SpectralModel>, factor: f64 },
    /// `model` evaluated at `lambda + shift`, reduced mod `2 pi`.
    FrequencyShifted { model: Box<SpectralModel>, shift: f64 },
}

fn two_sin_half(lambda: f64) -> f64 {
    (2.0 * (0.5 * lambda).sin()).abs()
}

fn poly_at(coefs: &[f64], z: Complex64) -> Complex64 {
    if coefs.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    coefs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn poly_abs2(coefs: &[f64], lambda: f64) -> f64 {
    poly_at(coefs, Complex64::from_polar(1.0, lambda)).norm_sqr()
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn same_angle(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(TWO_PI);
    d < ANGLE_EPS || TWO_PI - d < ANGLE_EPS
}

fn fgn_sum(lambda: f64, s: f64, k_max: usize) -> f64 {
    // terms k != 0 of sum_k |lambda + 2 pi k|^{-s}, with an integral tail
    let mut acc = 0.0;
    for k in (1..=k_max).rev() {
        let k = k as f64;
        acc += (TWO_PI * k + lambda).powf(-s) + (TWO_PI * k - lambda).powf(-s);
    }
    // midpoint-rule Euler-Maclaurin tail: int_{K+1/2}^inf g + g'(K+1/2)/24
    let edge = TWO_PI * (k_max as f64 + 0.5);
    let (hi, lo) = (edge + lambda, edge - lambda);
    acc + (hi.powf(1.0 - s) + lo.powf(1.0 - s)) / (TWO_PI * (s - 1.0))
        - TWO_PI * s / 24.0 * (hi.powf(-s - 1.0) + lo.powf(-s - 1.0))
}

impl SpectralModel {
    pub fn white_noise(level: f64) -> Self {
        SpectralModel::WhiteNoise { level }
    }

    pub fn power_at_origin(alpha: f64) -> Self {
        SpectralModel::PowerAtOrigin { alpha }
    }

    /// MA model `scale/(2 pi) |theta(e^{i lambda})|^2`.
    pub fn ma(theta: &[f64], scale: f64) -> Self {
        SpectralModel::Arma {
            ma_coefficients: theta.to_vec(),
            ar_coefficients: vec![],
            scale,
        }
    }

    /// AR model `scale/(2 pi) / |psi(e^{i lambda})|^2`.
    pub fn ar(psi: &[f64], scale: f64) -> Self {
        SpectralModel::Arma {
            ma_coefficients: vec![],
            ar_coefficients: psi.to_vec(),
            scale,
        }
    }

    pub fn arc_supported(alpha: f64, level: f64) -> Self {
        SpectralModel::ArcSupported { alpha, level }
    }

    pub fn product(left: SpectralModel, right: SpectralModel) -> Self {
        SpectralModel::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn scaled(model: SpectralModel, factor: f64) -> Self {
        SpectralModel::Scaled {
            model: Box::new(model),
            factor,
        }
    }

    /// Parse and validate a model from JSON.
    pub fn from_json(text: &str) -> Result<Self> {
        let m: SpectralModel =
            serde_json::from_str(text).map_err(|e| Error::validation(format!("model JSON: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    /// Short label used in estimator metadata.
    pub fn name(&self) -> String {
        match self {
            SpectralModel::WhiteNoise { level } => format!("WhiteNoise({level})"),
            SpectralModel::Arma { .. } => "Arma".into(),
            SpectralModel::PowerAtOrigin { alpha } => format!("PowerAtOrigin({alpha})"),
            SpectralModel::ArfimaFactor { d, base } => format!("ArfimaFactor({d}, {})", base.name()),
            SpectralModel::FgnDensity { hurst, .. } => format!("FgnDensity({hurst})"),
            SpectralModel::FisherHartwig { base, .. } => format!("FisherHartwig({})", base.name()),
            SpectralModel::FlatZero { a } => format!("FlatZero({a})"),
            SpectralModel::PollaczekSzego { a } => format!("PollaczekSzego({a})"),
            SpectralModel::ArcSupported { alpha, .. } => format!("ArcSupported({alpha})"),
            SpectralModel::Product { left, right } => format!("{}*{}", left.name(), right.name()),
            SpectralModel::Scaled { model, factor } => format!("{factor}*{}", model.name()),
            SpectralModel::FrequencyShifted { model, shift } => {
                format!("Shifted({}, {shift})", model.name())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| -> Result<()> {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(format!("{what} must be finite")))
            }
        };
        match self {
            SpectralModel::WhiteNoise { level } => {
                finite(*level, "level")?;
                if *level < 0.0 {
                    return Err(Error::validation("white-noise level must be nonnegative"));
                }
            }
            SpectralModel::Arma {
                ma_coefficients,
                ar_coefficients,
                scale,
            } => {
                finite(*scale, "scale")?;
                if *scale <= 0.0 {
                    return Err(Error::validation("ARMA scale must be positive"));
                }
                for &c in ma_coefficients.iter().chain(ar_coefficients) {
                    finite(c, "ARMA coefficient")?;
                }
                if !ar_coefficients.is_empty() {
                    let norm: f64 = ar_coefficients.iter().map(|c| c.abs()).sum();
                    let min = (0..=4096)
                        .map(|i| poly_abs2(ar_coefficients, PI * i as f64 / 4096.0).sqrt())
                        .fold(f64::INFINITY, f64::min);
                    if min <= 1e-8 * norm {
                        return Err(Error::validation(
                            "AR polynomial has a zero on the unit circle",
                        ));
                    }
                }
                if !ma_coefficients.is_empty() && ma_coefficients.iter().all(|&c| c == 0.0) {
                    return Err(Error::validation("MA polynomial is identically zero"));
                }
            }
            SpectralModel::PowerAtOrigin { alpha } => {
                finite(*alpha, "alpha")?;
                if *alpha <= -0.5 {
                    return Err(Error::validation("PowerAtOrigin needs alpha > -1/2"));
                }
            }
            SpectralModel::ArfimaFactor { d, base } => {
                finite(*d, "d")?;
                if *d >= 0.5 {
                    return Err(Error::validation("ArfimaFactor needs d < 1/2"));
                }
                base.validate()?;
                if let Some(e) = base.local_exponent(0.0) {
                    if e - 2.0 * d <= -1.0 {
                        return Err(Error::validation(
                            "ArfimaFactor density is not integrable at the origin",
                        ));
                    }
                }
            }
            SpectralModel::FgnDensity {
                hurst,
                scale,
                series_truncation,
            } => {
                finite(*hurst, "hurst")?;
                if !(*hurst > 0.0 && *hurst < 1.0) {
                    return Err(Error::validation("FgnDensity needs 0 < H < 1"));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::validation("FgnDensity scale must be positive"));
                }
                if *series_truncation == 0 {
                    return Err(Error::validation("series_truncation must be positive"));
                }
            }
            SpectralModel::FisherHartwig {
                base,
                singular_points,
            } => {
                base.validate()?;
                for (i, p) in singular_points.iter().enumerate() {
                    finite(p.angle, "singular angle")?;
                    finite(p.exponent, "singular exponent")?;
                    if p.angle.abs() > PI + ANGLE_EPS {
                        return Err(Error::validation("singular angle outside [-pi, pi]"));
                    }
                    if p.exponent <= -0.5 {
                        return Err(Error::validation("Fisher-Hartwig exponent must exceed -1/2"));
                    }
                    if singular_points[..i].iter().any(|q| same_angle(q.angle, p.angle)) {
                        return Err(Error::validation("Fisher-Hartwig angles must be distinct"));
                    }
                }
                // the library handles real (even) densities only
                for p in singular_points {
                    if same_angle(p.angle, -p.angle) {
                        continue;
                    }
                    let mirrored = singular_points
                        .iter()
                        .any(|q| same_angle(q.angle, -p.angle) && (q.exponent - p.exponent).abs() < 1e-15);
                    if !mirrored {
                        return Err(Error::validation(format!(
                            "Fisher-Hartwig point {} needs a mirror at {} with the same exponent",
                            p.angle, -p.angle
                        )));
                    }
                }
            }
            SpectralModel::FlatZero { a } | SpectralModel::PollaczekSzego { a } => {
                finite(*a, "a")?;
                if *a <= 0.0 {
                    return Err(Error::validation("parameter a must be positive"));
                }
            }
            SpectralModel::ArcSupported { alpha, level } => {
                finite(*alpha, "alpha")?;
                if !(*alpha > 0.0 && *alpha < PI) {
                    return Err(Error::validation("ArcSupported needs 0 < alpha < pi"));
                }
                if !(*level > 0.0 && level.is_finite()) {
                    return Err(Error::validation("ArcSupported level must be positive"));
                }
            }
            SpectralModel::Product { left, right } => {
                left.validate()?;
                right.validate()?;
                for &s in left.singular_angles().iter().chain(&right.singular_angles()) {
                    let e = left.local_exponent(s).unwrap_or(0.0) + right.local_exponent(s).unwrap_or(0.0);
                    if e <= -1.0 {
                        return Err(Error::validation(format!(
                            "product density is not integrable near angle {s}"
                        )));
                    }
                }
            }
            SpectralModel::Scaled { model, factor } => {
                model.validate()?;
                if !(*factor > 0.0 && factor.is_finite()) {
                    return Err(Error::validation("scale factor must be positive"));
                }
            }
            SpectralModel::FrequencyShifted { model, shift } => {
                model.validate()?;
                finite(*shift, "shift")?;
                if !(same_angle(*shift, 0.0) || same_angle(*shift, PI)) {
                    return Err(Error::validation(
                        "FrequencyShifted keeps the density even only for shifts 0 or pi",
                    ));
                }
            }
        }
        Ok(())
    }

    /// `f(lambda)`; `+inf` exactly at an integrable pole.
    pub fn evaluate(&self, angle: f64) -> f64 {
        let l = fold_angle(angle);
        match self {
            SpectralModel::WhiteNoise { level } => *level,
            SpectralModel::Arma {
                ma_coefficients,
                ar_coefficients,
                scale,
            } => scale / TWO_PI * poly_abs2(ma_coefficients, l) / poly_abs2(ar_coefficients, l),
            SpectralModel::PowerAtOrigin { alpha } => {
                if *alpha == 0.0 {
                    1.0 / TWO_PI
                } else {
                    two_sin_half(l).powf(2.0 * alpha) / TWO_PI
                }
            }
            SpectralModel::ArfimaFactor { d, base } => {
                let b = base.evaluate(l);
                if b == 0.0 {
                    return 0.0;
                }
                if *d == 0.0 {
                    b
                } else {
                    two_sin_half(l).powf(-2.0 * d) * b
                }
            }
            SpectralModel::FgnDensity {
                hurst,
                scale,
                series_truncation,
            } => {
                let s = 2.0 * hurst + 1.0;
                let near = if l == 0.0 {
                    if *hurst < 0.5 {
                        0.0
                    } else if *hurst == 0.5 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    let sinc = two_sin_half(l) / l;
                    sinc * sinc * l.powf(2.0 - s)
                };
                let far = two_sin_half(l).powi(2) * fgn_sum(l, s, *series_truncation);
                scale * (near + far)
            }
            SpectralModel::FisherHartwig {
                base,
                singular_points,
            } => {
                let b = base.evaluate(l);
                if b == 0.0 {
                    return 0.0;
                }
                singular_points
                    .iter()
                    .fold(b, |acc, p| acc * two_sin_half(l - p.angle).powf(2.0 * p.exponent))
            }
            SpectralModel::FlatZero { a } => {
                if l == 0.0 {
                    0.0
                } else {
                    (-l.powf(-a)).exp()
                }
            }
            SpectralModel::PollaczekSzego { .. } => self.log_evaluate(l).exp(),
            SpectralModel::ArcSupported { alpha, level } => {
                if l >= *alpha {
                    *level
                } else {
                    0.0
                }
            }
            SpectralModel::Product { left, right } => {
                let a = left.evaluate(l);
                let b = right.evaluate(l);
                if a == 0.0 || b == 0.0 {
                    0.0
                } else {
                    a * b
                }
            }
            SpectralModel::Scaled { model, factor } => factor * model.evaluate(l),
            SpectralModel::FrequencyShifted { model, shift } => model.evaluate(l + shift),
        }
    }

    /// `ln f(lambda)`, computed without forming `f` where it would underflow.
    pub fn log_evaluate(&self, angle: f64) -> f64 {
        let l = fold_angle(angle);
        match self {
            SpectralModel::WhiteNoise { level } => level.ln(),
            SpectralModel::Arma {
                ma_coefficients,
                ar_coefficients,
                scale,
            } => {
                (scale / TWO_PI).ln() + poly_abs2(ma_coefficients, l).ln()
                    - poly_abs2(ar_coefficients, l).ln()
            }
            SpectralModel::PowerAtOrigin { alpha } => {
                let base = -TWO_PI.ln();
                if *alpha == 0.0 {
                    base
                } else {
                    base + 2.0 * alpha * two_sin_half(l).ln()
                }
            }
            SpectralModel::ArfimaFactor { d, base } => {
                let b = base.log_evaluate(l);
                if *d == 0.0 {
                    b
                } else {
                    b - 2.0 * d * two_sin_half(l).ln()
                }
            }
            SpectralModel::FgnDensity { .. } => self.evaluate(l).ln(),
            SpectralModel::FisherHartwig {
                base,
                singular_points,
            } => singular_points.iter().fold(base.log_evaluate(l), |acc, p| {
                acc + 2.0 * p.exponent * two_sin_half(l - p.angle).ln()
            }),
            SpectralModel::FlatZero { a } => -l.powf(-a),
            SpectralModel::PollaczekSzego { a } => {
                if l == 0.0 || l == PI {
                    return f64::NEG_INFINITY;
                }
                let phi = 0.5 * a / l.tan();
                (2.0 * l - PI) * phi - ln_cosh(PI * phi)
            }
            SpectralModel::ArcSupported { alpha, level } => {
                if l >= *alpha {
                    level.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            SpectralModel::Product { left, right } => left.log_evaluate(l) + right.log_evaluate(l),
            SpectralModel::Scaled { model, factor } => factor.ln() + model.log_evaluate(l),
            SpectralModel::FrequencyShifted { model, shift } => model.log_evaluate(l + shift),
        }
    }

    /// Angles in `[0, pi]` where the density or its logarithm is singular.
    pub fn singular_angles(&self) -> Vec<f64> {
        let mut out = match self {
            SpectralModel::WhiteNoise { .. }
            | SpectralModel::Arma { .. }
            | SpectralModel::ArcSupported { .. } => vec![],
            SpectralModel::PowerAtOrigin { alpha } => {
                if *alpha == 0.0 {
                    vec![]
                } else {
                    vec![0.0]
                }
            }
            SpectralModel::ArfimaFactor { d, base } => {
                let mut v = base.singular_angles();
                if *d != 0.0 {
                    v.push(0.0);
                }
                v
            }
            SpectralModel::FgnDensity { hurst, .. } => {
                if *hurst == 0.5 {
                    vec![]
                } else {
                    vec![0.0]
                }
            }
            SpectralModel::FisherHartwig {
                base,
                singular_points,
            } => {
                let mut v = base.singular_angles();
                v.extend(singular_points.iter().map(|p| fold_angle(p.angle)));
                v
            }
            SpectralModel::FlatZero { .. } => vec![0.0],
            SpectralModel::PollaczekSzego { .. } => vec![0.0, PI],
            SpectralModel::Product { left, right } => {
                let mut v = left.singular_angles();
                v.extend(right.singular_angles());
                v
            }
            SpectralModel::Scaled { model, .. } => model.singular_angles(),
            SpectralModel::FrequencyShifted { model, shift } => model
                .singular_angles()
                .into_iter()
                .map(|a| fold_angle(a - shift))
                .collect(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < ANGLE_EPS);
        out
    }

    /// Angles in `[0, pi]` where the density jumps.
    pub fn kink_angles(&self) -> Vec<f64> {
        match self {
            SpectralModel::ArcSupported { alpha, .. } => vec![*alpha],
            SpectralModel::ArfimaFactor { base, .. }
            | SpectralModel::FisherHartwig { base, .. } => base.kink_angles(),
            SpectralModel::Product { left, right } => {
                let mut v = left.kink_angles();
                v.extend(right.kink_angles());
                v
            }
            SpectralModel::Scaled { model, .. } => model.kink_angles(),
            SpectralModel::FrequencyShifted { model, shift } => model
                .kink_angles()
                .into_iter()
                .map(|a| fold_angle(a - shift))
                .collect(),
            _ => vec![],
        }
    }

    /// Quadrature layout resolving the model's singularities and `cos(k lambda)`
    /// up to `k = max_lag`.
    pub fn plan(&self, max_lag: usize) -> HalfLinePlan {
        HalfLinePlan::new(&self.singular_angles(), &self.kink_angles(), max_lag)
    }

    /// Exponent `e` with `f(lambda) ~ const |lambda - at|^e` near `at`, when it
    /// is known analytically. `None` for zeros of infinite order or where the
    /// density vanishes identically.
    pub fn local_exponent(&self, at: f64) -> Option<f64> {
        let at = fold_angle(at);
        let at_origin = at.abs() < ANGLE_EPS;
        match self {
            SpectralModel::WhiteNoise { level } => (*level > 0.0).then_some(0.0),
            SpectralModel::Arma {
                ma_coefficients, ..
            } => {
                let v = poly_abs2(ma_coefficients, at).sqrt();
                let norm: f64 = ma_coefficients.iter().map(|c| c.abs()).sum::<f64>().max(1.0);
                (v > 1e-10 * norm).then_some(0.0)
            }
            SpectralModel::PowerAtOrigin { alpha } => Some(if at_origin { 2.0 * alpha } else { 0.0 }),
            SpectralModel::ArfimaFactor { d, base } => {
                let b = base.local_exponent(at)?;
                Some(if at_origin { b - 2.0 * d } else { b })
            }
            SpectralModel::FgnDensity { hurst, .. } => {
                Some(if at_origin { 1.0 - 2.0 * hurst } else { 0.0 })
            }
            SpectralModel::FisherHartwig {
                base,
                singular_points,
            } => {
                let b = base.local_exponent(at)?;
                Some(
                    b + singular_points
                        .iter()
                        .filter(|p| same_angle(p.angle, at))
                        .map(|p| 2.0 * p.exponent)
                        .sum::<f64>(),
                )
            }
            SpectralModel::FlatZero { .. } => (!at_origin).then_some(0.0),
            SpectralModel::PollaczekSzego { .. } => {
                (!at_origin && (at - PI).abs() > ANGLE_EPS).then_some(0.0)
            }
            SpectralModel::ArcSupported { alpha, .. } => (at > *alpha).then_some(0.0),
            SpectralModel::Product { left, right } => {
                Some(left.local_exponent(at)? + right.local_exponent(at)?)
            }
            SpectralModel::Scaled { model, .. } => model.local_exponent(at),
            SpectralModel::FrequencyShifted { model, shift } => model.local_exponent(at + shift),
        }
    }

    /// True when the model is the zero function.
    pub fn identically_zero(&self) -> bool {
        match self {
            SpectralModel::WhiteNoise { level } => *level == 0.0,
            SpectralModel::Product { left, right } => left.identically_zero() || right.identically_zero(),
            SpectralModel::Scaled { model, .. }
            | SpectralModel::FrequencyShifted { model, .. }
            | SpectralModel::ArfimaFactor { base: model, .. }
            | SpectralModel::FisherHartwig { base: model, .. } => model.identically_zero(),
            _ => false,
        }
    }

    /// True when the density vanishes on a set of positive measure.
    pub fn vanishes_on_interval(&self) -> bool {
        match self {
            SpectralModel::WhiteNoise { level } => *level == 0.0,
            SpectralModel::ArcSupported { .. } => true,
            SpectralModel::Product { left, right } => {
                left.vanishes_on_interval() || right.vanishes_on_interval()
            }
            SpectralModel::Scaled { model, .. }
            | SpectralModel::FrequencyShifted { model, .. }
            | SpectralModel::ArfimaFactor { base: model, .. }
            | SpectralModel::FisherHartwig { base: model, .. } => model.vanishes_on_interval(),
            _ => false,
        }
    }

    /// Analytic test for a divergent Szegő integral.
    fn szego_divergent(&self) -> bool {
        match self {
            SpectralModel::WhiteNoise { level } => *level == 0.0,
            SpectralModel::ArcSupported { .. } | SpectralModel::PollaczekSzego { .. } => true,
            SpectralModel::FlatZero { a } => *a >= 1.0,
            SpectralModel::Product { left, right } => left.szego_divergent() || right.szego_divergent(),
            SpectralModel::Scaled { model, .. }
            | SpectralModel::FrequencyShifted { model, .. }
            | SpectralModel::ArfimaFactor { base: model, .. }
            | SpectralModel::FisherHartwig { base: model, .. } => model.szego_divergent(),
            SpectralModel::Arma { .. }
            | SpectralModel::PowerAtOrigin { .. }
            | SpectralModel::FgnDensity { .. } => false,
        }
    }

    /// `int_{-pi}^{pi} ln f`.
    pub fn szego_integral(&self) -> Result<SzegoIntegral> {
        if self.szego_divergent() {
            return Ok(SzegoIntegral::MinusInfinity);
        }
        let plan = self.plan(0);
        let half = integrate_half(&plan, |l| self.log_evaluate(l))?;
        Ok(SzegoIntegral::Finite(2.0 * half))
    }

    /// `G(f) = exp((2 pi)^{-1} int ln f)`.
    pub fn geometric_mean(&self) -> Result<f64> {
        Ok(match self.szego_integral()? {
            SzegoIntegral::Finite(v) => (v / TWO_PI).exp(),
            SzegoIntegral::MinusInfinity => 0.0,
        })
    }

    /// `1/f` is integrable on the circle.
    pub fn inverse_integrable(&self) -> bool {
        if self.szego_divergent() || self.vanishes_on_interval() {
            return false;
        }
        let mut points = self.singular_angles();
        if let SpectralModel::Arma { .. } = self {
            points.push(0.0);
        }
        if !points.iter().all(|&a| matches!(self.local_exponent(a), Some(e) if e < 1.0)) {
            return false;
        }
        // MA zeros on the circle are not registered as singular angles
        (0..=2048).all(|i| {
            let l = PI * (i as f64 + 0.5) / 2049.0;
            self.evaluate(l) > 0.0
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SzegoIntegral {
    Finite(f64),
    MinusInfinity,
}

impl SzegoIntegral {
    pub fn finite(self) -> Option<f64> {
        match self {
            SzegoIntegral::Finite(v) => Some(v),
            SzegoIntegral::MinusInfinity => None,
        }
    }
}

/// Point mass `mass` at the pair `+-angle`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    pub density: SpectralModel,
    #[serde(default)]
    pub atoms: Vec<Atom>,
}

impl From<SpectralModel> for SpectralMeasure {
    fn from(density: SpectralModel) -> Self {
        SpectralMeasure {
            density,
            atoms: vec![],
        }
    }
}

impl SpectralMeasure {
    pub fn new(density: SpectralModel, atoms: Vec<Atom>) -> Result<Self> {
        let m = SpectralMeasure { density, atoms };
        m.validate()?;
        Ok(m)
    }

    /// Accepts either a bare model (with a `variant` field) or
    /// `{"density": model, "atoms": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::validation(format!("model JSON: {e}")))?;
        let m = if value.get("variant").is_some() {
            let density: SpectralModel = serde_json::from_value(value)
                .map_err(|e| Error::validation(format!("model JSON: {e}")))?;
            SpectralMeasure::from(density)
        } else {
            serde_json::from_value(value).map_err(|e| Error::validation(format!("measure JSON: {e}")))?
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.density.validate()?;
        for (i, a) in self.atoms.iter().enumerate() {
            if !a.angle.is_finite() || a.angle.abs() > PI + ANGLE_EPS {
                return Err(Error::validation("atom angle outside [-pi, pi]"));
            }
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return Err(Error::validation("atom mass must be positive"));
            }
            let fa = fold_angle(a.angle);
            if self.atoms[..i].iter().any(|b| (fold_angle(b.angle) - fa).abs() < ANGLE_EPS) {
                return Err(Error::validation("atom angles must be pairwise distinct"));
            }
        }
        if self.density.identically_zero() && self.atoms.is_empty() {
            return Err(Error::validation("measure has zero total mass"));
        }
        Ok(())
    }

    /// Rejects measures whose support is too small for an order-`n` problem.
    pub fn check_order(&self, n: usize) -> Result<()> {
        if self.density.identically_zero() && self.atoms.len() < n + 2 {
            return Err(Error::validation(format!(
                "purely atomic measure with {} atoms cannot support order {n}",
                self.atoms.len()
            )));
        }
        Ok(())
    }

    pub fn classify(&self) -> Result<Classification> {
        let szego = self.density.szego_integral()?;
        let determinism = match szego {
            SzegoIntegral::Finite(_) if self.atoms.is_empty() => Determinism::Regular,
            SzegoIntegral::Finite(_) => Determinism::Mixed,
            SzegoIntegral::MinusInfinity if self.density.vanishes_on_interval() => {
                Determinism::PurelyDeterministic
            }
            SzegoIntegral::MinusInfinity => Determinism::LightDeterministic,
        };
        let origin_exponent = if self.density.identically_zero() {
            None
        } else {
            self.density.local_exponent(0.0)
        };
        let memory = match origin_exponent {
            Some(e) if e.abs() < 1e-14 => Memory::Short,
            Some(e) if e < 0.0 => Memory::Long,
            Some(_) => Memory::Antipersistent,
            None => Memory::Unclassified,
        };
        Ok(Classification {
            determinism,
            memory,
            origin_exponent,
            szego_integral: szego,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Determinism {
    /// Purely nondeterministic: finite Szegő integral, no singular part.
    Regular,
    /// Finite Szegő integral together with point masses.
    Mixed,
    /// Szegő integral diverges though the density is positive almost everywhere.
    LightDeterministic,
    /// The density vanishes on a set of positive measure.
    PurelyDeterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Memory {
    Short,
    Long,
    Antipersistent,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub determinism: Determinism,
    pub memory: Memory,
    pub origin_exponent: Option<f64>,
    pub szego_integral: SzegoIntegral,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointwise_values() {
        assert!((SpectralModel::power_at_origin(1.0).evaluate(PI) - 2.0 / PI).abs() < 1e-15);
        assert_eq!(SpectralModel::FlatZero { a: 1.0 }.evaluate(0.0), 0.0);
        let w = SpectralModel::white_noise(1.0 / TWO_PI);
        assert_eq!(w.evaluate(0.3), 1.0 / TWO_PI);
        let ma = SpectralModel::ma(&[1.0, -0.5], 1.0);
        assert!((ma.evaluate(0.0) - 0.25 / TWO_PI).abs() < 1e-16);
    }

    #[test]
    fn szego_integrals() {
        let s = SpectralModel::FlatZero { a: 0.5 }.szego_integral().unwrap();
        assert!((s.finite().unwrap() + 4.0 * PI.sqrt()).abs() < 1e-10);
        assert_eq!(
            SpectralModel::FlatZero { a: 1.0 }.szego_integral().unwrap(),
            SzegoIntegral::MinusInfinity
        );
        let w = SpectralModel::white_noise(1.0 / TWO_PI).szego_integral().unwrap();
        assert!((w.finite().unwrap() + TWO_PI * TWO_PI.ln()).abs() < 1e-12);
    }

    #[test]
    fn geometric_means() {
        let g = SpectralModel::white_noise(3.0).geometric_mean().unwrap();
        assert!((g - 3.0).abs() < 1e-13);
        let g = SpectralModel::power_at_origin(1.0).geometric_mean().unwrap();
        assert!((g - 1.0 / TWO_PI).abs() < 1e-12, "{g}");
        assert_eq!(SpectralModel::arc_supported(1.0, 2.0).geometric_mean().unwrap(), 0.0);
    }

    #[test]
    fn classification_examples() {
        let arfima = SpectralMeasure::from(SpectralModel::ArfimaFactor {
            d: 0.25,
            base: Box::new(SpectralModel::white_noise(1.0 / TWO_PI)),
        });
        let c = arfima.classify().unwrap();
        assert_eq!(c.determinism, Determinism::Regular);
        assert_eq!(c.memory, Memory::Long);
        assert_eq!(c.origin_exponent, Some(-0.5));

        let fgn = SpectralMeasure::from(SpectralModel::FgnDensity {
            hurst: 0.25,
            scale: 1.0,
            series_truncation: 200,
        });
        let c = fgn.classify().unwrap();
        assert_eq!(c.memory, Memory::Antipersistent);
        assert_eq!(c.origin_exponent, Some(0.5));

        let arc = SpectralMeasure::from(SpectralModel::arc_supported(PI / 2.0, 1.0));
        assert_eq!(arc.classify().unwrap().determinism, Determinism::PurelyDeterministic);

        let ps = SpectralMeasure::from(SpectralModel::PollaczekSzego { a: 1.0 });
        assert_eq!(ps.classify().unwrap().determinism, Determinism::LightDeterministic);

        let mixed = SpectralMeasure::new(
            SpectralModel::white_noise(1.0 / TWO_PI),
            vec![Atom { angle: 0.0, mass: 0.5 }],
        )
        .unwrap();
        assert_eq!(mixed.classify().unwrap().determinism, Determinism::Mixed);
    }

    #[test]
    fn flat_zero_regular_iff_a_below_one() {
        for &(a, regular) in &[(0.3, true), (0.99, true), (1.0, false), (2.0, false)] {
            let c = SpectralMeasure::from(SpectralModel::FlatZero { a }).classify().unwrap();
            assert_eq!(c.determinism == Determinism::Regular, regular, "a={a}");
        }
    }

    #[test]
    fn fgn_series_tail_is_accurate() {
        let coarse = SpectralModel::FgnDensity {
            hurst: 0.75,
            scale: 1.0,
            series_truncation: 200,
        };
        let fine = SpectralModel::FgnDensity {
            hurst: 0.75,
            scale: 1.0,
            series_truncation: 20000,
        };
        for &l in &[1e-3, 0.5, 2.0, PI] {
            let (a, b) = (coarse.evaluate(l), fine.evaluate(l));
            assert!(((a - b) / b).abs() < 1e-10, "lambda={l}: {a} vs {b}");
        }
    }

    #[test]
    fn pollaczek_is_positive_and_symmetric() {
        let m = SpectralModel::PollaczekSzego { a: 1.0 };
        assert!((m.evaluate(PI / 2.0) - 1.0).abs() < 1e-15);
        for &l in &[0.05, 0.7, 2.9] {
            let v = m.evaluate(l);
            assert!(v > 0.0 && v.is_finite());
            assert_eq!(v, m.evaluate(-l));
        }
        assert_eq!(m.evaluate(0.0), 0.0);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(SpectralModel::power_at_origin(-0.5).validate().is_err());
        assert!(SpectralModel::arc_supported(0.0, 1.0).validate().is_err());
        assert!(SpectralModel::ar(&[1.0, -1.0], 1.0).validate().is_err());
        let fh = SpectralModel::FisherHartwig {
            base: Box::new(SpectralModel::white_noise(1.0)),
            singular_points: vec![SingularPoint { angle: 1.0, exponent: 0.2 }],
        };
        assert!(fh.validate().is_err());
        let shifted = SpectralModel::FrequencyShifted {
            model: Box::new(SpectralModel::power_at_origin(0.3)),
            shift: 0.4,
        };
        assert!(shifted.validate().is_err());
        let dup = SpectralMeasure::new(
            SpectralModel::white_noise(1.0),
            vec![Atom { angle: 0.5, mass: 1.0 }, Atom { angle: -0.5, mass: 1.0 }],
        );
        assert!(dup.is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"variant":"Product","left":{"variant":"PowerAtOrigin","alpha":0.25},
            "right":{"variant":"Arma","ma":[1.0,-0.5],"scale":6.283185307179586}}"#;
        let m = SpectralModel::from_json(text).unwrap();
        let back = SpectralModel::from_json(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
        let measure = SpectralMeasure::from_json(
            r#"{"density":{"variant":"WhiteNoise","level":0.1},"atoms":[{"angle":0,"mass":0.5}]}"#,
        )
        .unwrap();
        assert_eq!(measure.atoms.len(), 1);
        assert!(SpectralModel::from_json(r#"{"variant":"PowerAtOrigin","alpha":-1}"#).is_err());
    }
}
