//! Finite-sample and asymptotic efficiencies relative to the BLUE.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::covariance_sequence_with;
use crate::error::{Error, Result};
use crate::estimators::EstimatorWeights;
use crate::special::{beta, binomial, ln_beta, ln_gamma};
use crate::spectra::{SpectralMeasure, SpectralModel};
use crate::toeplitz::{blue_for_auto, blue_solve, quadratic_form};
use crate::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    Finite(usize),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EfficiencyLaw {
    /// Ratio of the BLUE variance to the estimator's variance.
    Finite,
    Overestimation,
    LseAsymptotic,
    SamarovTaqqu,
    BeranKunsch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub n: Horizon,
    pub value: f64,
    pub numerator_variance: Option<f64>,
    pub denominator_variance: Option<f64>,
    pub law: EfficiencyLaw,
}

impl EfficiencyReport {
    fn closed_form(value: f64, law: EfficiencyLaw, n: Horizon) -> Self {
        EfficiencyReport {
            n,
            value,
            numerator_variance: None,
            denominator_variance: None,
            law,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -0.5) || !alpha.is_finite() {
        return Err(Error::validation("alpha must exceed -1/2"));
    }
    Ok(())
}

/// `Var(BLUE) / Var(weights)` at order `n`, both as quadratic forms over the
/// same covariance sequence. Double-double is engaged when the double solve
/// breaks down.
pub fn efficiency_finite(weights: &EstimatorWeights, measure: &SpectralMeasure, n: usize) -> Result<EfficiencyReport> {
    weights.check()?;
    if weights.order() != n {
        return Err(Error::validation(format!(
            "weights have order {} but n = {n}",
            weights.order()
        )));
    }
    measure.check_order(n)?;
    let mut cov = covariance_sequence_with(measure, n, Precision::Double)?;
    let blue = match blue_solve(&cov, n, Precision::Double) {
        Err(Error::NearSingular { .. }) => {
            cov = covariance_sequence_with(measure, n, Precision::DoubleDouble)?;
            blue_solve(&cov, n, Precision::DoubleDouble)?
        }
        other => other?,
    };
    let num = quadratic_form(&blue.weights.coefficients, &cov)?;
    let den = quadratic_form(&weights.coefficients, &cov)?;
    if !(den > 0.0) {
        return Err(Error::validation("estimator variance vanishes"));
    }
    Ok(EfficiencyReport {
        n: Horizon::Finite(n),
        value: num / den,
        numerator_variance: Some(num),
        denominator_variance: Some(den),
        law: EfficiencyLaw::Finite,
    })
}

fn factorial_u128(k: u64) -> Option<u128> {
    (1..=k as u128).try_fold(1u128, |acc, j| acc.checked_mul(j))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Eq. (7.8) for integer `alpha` in exact integer arithmetic, when it fits.
fn overestimation_integer(alpha: u64, beta: u64) -> Option<f64> {
    let f = factorial_u128;
    let num = f(2 * alpha + 1)?
        .checked_mul(f(alpha + beta)?.checked_pow(2)?)?
        .checked_mul(f(2 * alpha + 4 * beta + 1)?)?;
    let c = f(2 * beta)? / f(beta)?.checked_pow(2)?;
    let den = c
        .checked_mul(f(alpha)?)?
        .checked_mul(f(alpha + 2 * beta)?)?
        .checked_mul(f(2 * alpha + 2 * beta + 1)?.checked_pow(2)?)?;
    let g = gcd(num, den);
    Some((num / g) as f64 / (den / g) as f64)
}

/// Asymptotic efficiency `e(alpha, beta)` of the Adenstedt estimator of
/// order `alpha + beta` when the true density is `f_alpha`.
pub fn overestimation_efficiency(alpha: f64, beta: u32) -> Result<EfficiencyReport> {
    check_alpha(alpha)?;
    let law = EfficiencyLaw::Overestimation;
    if beta == 0 {
        return Ok(EfficiencyReport::closed_form(1.0, law, Horizon::Infinity));
    }
    let b = beta as f64;
    if alpha >= 0.0 && alpha == alpha.floor() {
        if let Some(v) = overestimation_integer(alpha as u64, beta as u64) {
            return Ok(EfficiencyReport::closed_form(v, law, Horizon::Infinity));
        }
    }
    let a = alpha;
    let ln = ln_gamma(2.0 * a + 2.0) + 2.0 * ln_gamma(a + b + 1.0) + ln_gamma(2.0 * a + 4.0 * b + 2.0)
        - binomial(2 * beta as u64, beta as u64).ln()
        - ln_gamma(a + 1.0)
        - ln_gamma(a + 2.0 * b + 1.0)
        - 2.0 * ln_gamma(2.0 * a + 2.0 * b + 2.0);
    Ok(EfficiencyReport::closed_form(ln.exp(), law, Horizon::Infinity))
}

/// `pi x / sin(pi x)` with the removable singularity at 0.
fn pi_x_over_sin(x: f64) -> f64 {
    let t = PI * x;
    if t.abs() < 1e-4 {
        1.0 + t * t / 6.0 + 7.0 * t.powi(4) / 360.0
    } else {
        t / t.sin()
    }
}

/// Asymptotic LSE efficiency in the class `f_alpha g`.
pub fn lse_asymptotic_efficiency(alpha: f64) -> Result<EfficiencyReport> {
    check_alpha(alpha)?;
    let value = if alpha >= 0.5 {
        0.0
    } else if alpha == 0.0 {
        1.0
    } else {
        (1.0 - 2.0 * alpha) * pi_x_over_sin(alpha) / beta(alpha + 1.0, alpha + 1.0)
    };
    Ok(EfficiencyReport::closed_form(value, EfficiencyLaw::LseAsymptotic, Horizon::Infinity))
}

/// Exact LSE efficiency under `f_alpha` at order `n` through the
/// Samarov–Taqqu product/sum; the formula is indexed by the sample size
/// `N = n + 1`.
pub fn lse_efficiency_exact_falpha(n: usize, alpha: f64) -> Result<EfficiencyReport> {
    check_alpha(alpha)?;
    if n < 1 {
        return Err(Error::validation("order must be at least 1"));
    }
    let big_n = (n + 1) as f64;
    let ln_p: f64 = (2..=n + 1).map(|j| (2.0 * alpha / j as f64).ln_1p()).sum();
    let mut q = 1.0 / (1.0 + alpha);
    let mut s = (1.0 - 1.0 / big_n) * q;
    for k in 2..=n {
        let kf = k as f64;
        q *= (kf - 1.0 - alpha) / (kf + alpha);
        s += (1.0 - kf / big_n) * q;
    }
    let inner = 1.0 - 2.0 * alpha * s;
    let value = (-ln_p).exp() / inner;
    Ok(EfficiencyReport::closed_form(
        value,
        EfficiencyLaw::SamarovTaqqu,
        Horizon::Finite(n),
    ))
}

/// Second-order expansion of the LSE efficiency around `alpha = 0`.
pub fn beran_kunsch_expansion(alpha: f64) -> Result<EfficiencyReport> {
    if !(alpha.abs() <= 0.2) {
        return Err(Error::validation("the expansion is only used for |alpha| <= 0.2"));
    }
    let value = 1.0 - (1.0 - PI * PI / 12.0) * (2.0 * alpha).powi(2);
    Ok(EfficiencyReport::closed_form(value, EfficiencyLaw::BeranKunsch, Horizon::Infinity))
}

/// Limit of `n^{2 alpha + 2} Var(m_alpha)` when the density is
/// `f_{alpha+1} g`: `[(2 alpha + 1)! / alpha!]^2 pi^{-1} int g`.
pub fn underestimation_limit(alpha: u32, g: &SpectralModel) -> Result<f64> {
    g.validate()?;
    let ratio: f64 = (alpha as u64 + 1..=2 * alpha as u64 + 1).map(|j| j as f64).product();
    let cov = covariance_sequence_with(&g.clone().into(), 0, Precision::Double)?;
    Ok(ratio * ratio / PI * cov.values[0])
}

/// `lim n Var(BLUE) = 2 pi f(0)` for densities positive and continuous at 0.
pub fn short_memory_variance_limit(model: &SpectralModel) -> Result<f64> {
    model.validate()?;
    let f0 = model.evaluate(0.0);
    match model.local_exponent(0.0) {
        Some(e) if e == 0.0 && f0 > 0.0 && f0.is_finite() => Ok(2.0 * PI * f0),
        _ if f0 == 0.0 => Err(Error::validation(
            "f(0) = 0; use the f_alpha asymptote (general_class_asymptote) instead",
        )),
        _ => Err(Error::validation("density is not positive and continuous at the origin")),
    }
}

/// `lim n^{2 alpha + 1} Var(BLUE) = Gamma(2 alpha + 1) g0 / B(alpha + 1, alpha + 1)`.
pub fn general_class_asymptote(alpha: f64, g0: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(g0 > 0.0 && g0.is_finite()) {
        return Err(Error::validation("g(0) must be positive"));
    }
    Ok((ln_gamma(2.0 * alpha + 1.0) - ln_beta(alpha + 1.0, alpha + 1.0)).exp() * g0)
}

/// BLUE variances over a grid of orders, in parallel.
pub fn blue_variance_curve(measure: &SpectralMeasure, n_grid: &[usize]) -> Result<Vec<f64>> {
    n_grid
        .par_iter()
        .map(|&n| blue_for_auto(measure, n).map(|s| s.variance))
        .collect()
}

/// Constant `a` in `values ~ a n^{-p}` with `p` fixed:
/// `a = exp(mean ln(values n^p))`.
pub fn fit_constant(n_grid: &[usize], values: &[f64], p: f64) -> Result<f64> {
    if n_grid.is_empty() || n_grid.len() != values.len() {
        return Err(Error::validation("grid and values must be nonempty and of equal length"));
    }
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::validation("values must be positive"));
    }
    let mean = n_grid
        .iter()
        .zip(values)
        .map(|(&n, v)| v.ln() + p * (n as f64).ln())
        .sum::<f64>()
        / n_grid.len() as f64;
    Ok(mean.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{lse_weights, parabolic_weights};

    #[test]
    fn overestimation_exact_values() {
        assert_eq!(overestimation_efficiency(0.0, 1).unwrap().value, 5.0 / 6.0);
        assert_eq!(overestimation_efficiency(0.0, 2).unwrap().value, 0.7);
        for a in [-0.3, 0.0, 0.7, 3.0] {
            assert_eq!(overestimation_efficiency(a, 0).unwrap().value, 1.0);
        }
        // integer and log-gamma routes agree
        let exact = overestimation_efficiency(2.0, 3).unwrap().value;
        let near = overestimation_efficiency(2.0 + 1e-12, 3).unwrap().value;
        assert!((exact - near).abs() < 1e-10);
    }

    #[test]
    fn lse_asymptotic_values() {
        assert_eq!(lse_asymptotic_efficiency(0.0).unwrap().value, 1.0);
        assert!((lse_asymptotic_efficiency(1e-9).unwrap().value - 1.0).abs() < 1e-8);
        assert!((lse_asymptotic_efficiency(0.25).unwrap().value - 0.8986).abs() < 1e-4);
        assert_eq!(lse_asymptotic_efficiency(0.75).unwrap().value, 0.0);
    }

    #[test]
    fn samarov_taqqu_trivial_alpha() {
        for n in [1, 5, 100] {
            assert!((lse_efficiency_exact_falpha(n, 0.0).unwrap().value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn beran_kunsch_values() {
        assert_eq!(beran_kunsch_expansion(0.0).unwrap().value, 1.0);
        assert!((beran_kunsch_expansion(-0.05).unwrap().value - 0.998225).abs() < 1e-6);
        assert!(beran_kunsch_expansion(0.3).is_err());
    }

    #[test]
    fn limits() {
        let one = SpectralModel::white_noise(1.0);
        assert!((underestimation_limit(0, &one).unwrap() - 2.0).abs() < 1e-14);
        assert!((underestimation_limit(1, &one).unwrap() - 72.0).abs() < 1e-12);
        let g = SpectralModel::ma(&[1.0, 1.0], 1.0);
        // scale/(2 pi) |1 + z|^2 integrates to 2
        assert!((underestimation_limit(0, &g).unwrap() - 2.0 / PI).abs() < 1e-14);
        let ma = SpectralModel::ma(&[1.0, -0.5], 1.0);
        assert!((short_memory_variance_limit(&ma).unwrap() - 0.25).abs() < 1e-14);
        let ar = SpectralModel::ar(&[1.0, -0.5], 1.0);
        assert!((short_memory_variance_limit(&ar).unwrap() - 4.0).abs() < 1e-13);
        assert!(short_memory_variance_limit(&SpectralModel::power_at_origin(1.0)).is_err());
        assert!((general_class_asymptote(1.0, 1.0).unwrap() - 12.0).abs() < 1e-12);
        assert!((general_class_asymptote(0.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn finite_efficiency_examples() {
        let f1: SpectralMeasure = SpectralModel::power_at_origin(1.0).into();
        let e = efficiency_finite(&lse_weights(2), &f1, 2).unwrap();
        assert!((e.value - 0.9).abs() < 1e-14);
        let w: SpectralMeasure = SpectralModel::white_noise(0.3).into();
        assert!((efficiency_finite(&lse_weights(40), &w, 40).unwrap().value - 1.0).abs() < 1e-14);
        assert!(efficiency_finite(&parabolic_weights(5).unwrap(), &w, 5).unwrap().value < 1.0);
        assert!(efficiency_finite(&lse_weights(4), &w, 5).is_err());
    }

    #[test]
    fn fit_constant_recovers_power_law() {
        let ns = [10, 20, 40];
        let v: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powf(-1.5)).collect();
        assert!((fit_constant(&ns, &v, 1.5).unwrap() - 3.0).abs() < 1e-13);
    }
}
