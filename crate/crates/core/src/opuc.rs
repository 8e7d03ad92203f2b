//! Orthogonal polynomials on the unit circle for even measures.
//!
//! The inner product is `<p, q> = int p conj(q) d mu` over `[-pi, pi]`, so the
//! moments are the covariances `r(k)` and Lebesgue measure has moments
//! `2 pi delta_k`. With real Verblunsky coefficients the recursion reads
//! `Phi_{k+1}(z) = z Phi_k(z) - alpha_k Phi*_k(z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::covariance_sequence_with;
use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_half, Discretization};
use crate::spectra::{SpectralMeasure, SpectralModel, SzegoIntegral};
use crate::Precision;

const TRIVIAL_MARGIN: f64 = 1e-28;
const PROBE_MATCH: f64 = 1e-14;

#[derive(Clone, Copy)]
struct CDd {
    re: DoubleDouble,
    im: DoubleDouble,
}

impl CDd {
    fn from_c(z: Complex64) -> Self {
        CDd {
            re: DoubleDouble::from_f64(z.re),
            im: DoubleDouble::from_f64(z.im),
        }
    }
    fn to_c(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
    fn mul(self, o: CDd) -> CDd {
        CDd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
    fn scale(self, s: DoubleDouble) -> CDd {
        CDd {
            re: self.re * s,
            im: self.im * s,
        }
    }
    fn sub(self, o: CDd) -> CDd {
        CDd {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
    fn norm_sqr(self) -> DoubleDouble {
        self.re * self.re + self.im * self.im
    }
}

/// Szegő recursion output up to degree `order`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpucState {
    pub order: usize,
    /// `alpha_0 .. alpha_{n-1}`.
    pub verblunsky: Vec<f64>,
    /// `||Phi_k||^2` for `k = 0..=n`.
    pub monic_norms: Vec<f64>,
    pub probes: Vec<Complex64>,
    /// `phi_at_probes[p][k] = phi_k(probes[p])`, orthonormal values.
    pub phi_at_probes: Vec<Vec<Complex64>>,
    pub moments: Vec<f64>,
    #[serde(skip)]
    alpha_dd: Vec<DoubleDouble>,
    #[serde(skip)]
    norms_dd: Vec<DoubleDouble>,
    /// Running `S_m(xi, xi)` per probe.
    #[serde(skip)]
    kernel_diag: Vec<Vec<DoubleDouble>>,
}

/// Runs the recursion on the moments of `measure` (computed in double-double).
pub fn szego_recursion(measure: &SpectralMeasure, n: usize, probes: &[Complex64]) -> Result<OpucState> {
    if n == 0 {
        return Err(Error::validation("order must be positive"));
    }
    measure.check_order(n)?;
    let cov = covariance_sequence_with(measure, n, Precision::DoubleDouble)?;
    szego_recursion_from_moments(&cov.dd_values(), probes)
}

/// Recursion from moments `r(0..=n)`, `n = moments.len() - 1`.
pub fn szego_recursion_from_moments(moments: &[DoubleDouble], probes: &[Complex64]) -> Result<OpucState> {
    let n = moments.len().saturating_sub(1);
    if moments.is_empty() || !(moments[0].to_f64() > 0.0) {
        return Err(Error::validation("r(0) must be positive"));
    }
    let mut a = vec![DoubleDouble::ONE];
    let mut next = Vec::with_capacity(n + 1);
    let mut e = moments[0];
    let mut alphas = Vec::with_capacity(n);
    let mut norms = vec![e];

    let xs: Vec<CDd> = probes.iter().map(|&z| CDd::from_c(z)).collect();
    let mut phi: Vec<CDd> = vec![CDd::from_c(Complex64::new(1.0, 0.0)); probes.len()];
    let mut phi_star = phi.clone();
    let inv0 = e.recip();
    let mut sums: Vec<Vec<DoubleDouble>> = vec![vec![inv0]; probes.len()];
    let s0 = inv0.sqrt().to_f64();
    let mut tables: Vec<Vec<Complex64>> = vec![vec![Complex64::new(s0, 0.0)]; probes.len()];

    for k in 0..n {
        let mut num = DoubleDouble::ZERO;
        for (j, &aj) in a.iter().enumerate() {
            num += aj * moments[j + 1];
        }
        let alpha = num / e;
        let mag = alpha.abs().to_f64();
        if mag >= 1.0 - TRIVIAL_MARGIN || !mag.is_finite() {
            return Err(Error::NearTrivialMeasure { k, magnitude: mag });
        }
        next.clear();
        for j in 0..=k + 1 {
            let shifted = if j == 0 { DoubleDouble::ZERO } else { a[j - 1] };
            let reversed = if j <= k { a[k - j] } else { DoubleDouble::ZERO };
            next.push(shifted - alpha * reversed);
        }
        std::mem::swap(&mut a, &mut next);
        e *= DoubleDouble::ONE - alpha * alpha;
        if !(e.to_f64() > 0.0) {
            return Err(Error::NearTrivialMeasure { k, magnitude: mag });
        }
        alphas.push(alpha);
        norms.push(e);

        let inv_norm = e.recip();
        let inv_sqrt = inv_norm.sqrt();
        for p in 0..probes.len() {
            let zphi = xs[p].mul(phi[p]);
            let new_phi = zphi.sub(phi_star[p].scale(alpha));
            let new_star = phi_star[p].sub(zphi.scale(alpha));
            phi[p] = new_phi;
            phi_star[p] = new_star;
            let last = *sums[p].last().unwrap();
            sums[p].push(last + new_phi.norm_sqr() * inv_norm);
            tables[p].push(new_phi.scale(inv_sqrt).to_c());
        }
    }

    Ok(OpucState {
        order: n,
        verblunsky: alphas.iter().map(|x| x.to_f64()).collect(),
        monic_norms: norms.iter().map(|x| x.to_f64()).collect(),
        probes: probes.to_vec(),
        phi_at_probes: tables,
        moments: moments.iter().map(|x| x.to_f64()).collect(),
        alpha_dd: alphas,
        norms_dd: norms,
        kernel_diag: sums,
    })
}

impl OpucState {
    fn probe_index(&self, probe: Complex64) -> Result<usize> {
        self.probes
            .iter()
            .position(|&p| (p - probe).norm() <= PROBE_MATCH)
            .ok_or_else(|| Error::validation(format!("probe {probe} was not registered")))
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m > self.order {
            return Err(Error::validation(format!(
                "order {m} exceeds the computed order {}",
                self.order
            )));
        }
        Ok(())
    }

    /// `S_m(xi, xi) = sum_{k <= m} |phi_k(xi)|^2`.
    pub fn kernel_diagonal(&self, probe: Complex64, m: usize) -> Result<f64> {
        self.check_m(m)?;
        Ok(self.kernel_diag[self.probe_index(probe)?][m].to_f64())
    }

    /// Leading coefficient `kappa_m = ||Phi_m||^{-1}` of `phi_m`.
    pub fn kappa(&self, m: usize) -> Result<f64> {
        self.check_m(m)?;
        Ok(self.norms_dd[m].sqrt().recip().to_f64())
    }
}

/// Christoffel function `lambda_m(xi) = 1 / S_m(xi, xi)`.
pub fn christoffel(state: &OpucState, probe: Complex64, m: usize) -> Result<f64> {
    state.check_m(m)?;
    let i = state.probe_index(probe)?;
    Ok(state.kernel_diag[i][m].recip().to_f64())
}

/// `lambda_0(xi), ..., lambda_n(xi)` for a registered probe.
pub fn christoffel_curve(state: &OpucState, probe: Complex64) -> Result<Vec<f64>> {
    let i = state.probe_index(probe)?;
    Ok(state.kernel_diag[i].iter().map(|s| s.recip().to_f64()).collect())
}

/// Coefficients of `p_m(z) = S_m(z, 1) / S_m(1, 1)`, the extremal polynomial
/// normalized at 1; for `xi = 1` these are the BLUE weights.
pub fn optimal_polynomial(state: &OpucState, m: usize) -> Result<Vec<f64>> {
    state.check_m(m)?;
    let mut a = vec![DoubleDouble::ONE];
    let mut acc = vec![DoubleDouble::ZERO; m + 1];
    let mut total = DoubleDouble::ZERO;
    for k in 0..=m {
        // phi_k(1) phi_k(z) = Phi_k(1) Phi_k(z) / ||Phi_k||^2
        let at_one = a.iter().fold(DoubleDouble::ZERO, |s, &c| s + c);
        let w = at_one / state.norms_dd[k];
        for (slot, &c) in acc.iter_mut().zip(&a) {
            *slot += w * c;
        }
        total += w * at_one;
        if k < m {
            let alpha = state.alpha_dd[k];
            let mut next = Vec::with_capacity(k + 2);
            for j in 0..=k + 1 {
                let shifted = if j == 0 { DoubleDouble::ZERO } else { a[j - 1] };
                let reversed = if j <= k { a[k - j] } else { DoubleDouble::ZERO };
                next.push(shifted - alpha * reversed);
            }
            a = next;
        }
    }
    let mut coefs: Vec<f64> = acc.iter().map(|&c| (c / total).to_f64()).collect();
    let s: f64 = coefs.iter().sum();
    coefs.iter_mut().for_each(|c| *c /= s);
    Ok(coefs)
}

/// One-step prediction error from `m` past values, `||Phi_m||^2`.
pub fn prediction_error(state: &OpucState, m: usize) -> Result<f64> {
    state.check_m(m)?;
    Ok(state.monic_norms[m])
}

fn poisson_log_integral(model: &SpectralModel, xi: Complex64) -> Result<f64> {
    let r2 = xi.norm_sqr();
    let kernel = |l: f64| {
        let e = Complex64::from_polar(1.0, l);
        (1.0 - r2) / (e - xi).norm_sqr() + (1.0 - r2) / (e.conj() - xi).norm_sqr()
    };
    integrate_half(&model.plan(0), |l| model.log_evaluate(l) * kernel(l))
}

/// Limit of `lambda_n(xi)` inside the disk: `2 pi G(xi, f) (1 - |xi|^2)` with
/// the Poisson-weighted geometric mean `G(xi, f)`.
pub fn christoffel_limit_in_disk(model: &SpectralModel, xi: Complex64) -> Result<f64> {
    model.validate()?;
    if !(xi.norm() < 1.0) {
        return Err(Error::validation("probe must lie strictly inside the unit disk"));
    }
    if model.szego_integral()? == SzegoIntegral::MinusInfinity {
        return Ok(0.0);
    }
    let g = (poisson_log_integral(model, xi)? / (2.0 * PI)).exp();
    Ok(2.0 * PI * g * (1.0 - xi.norm_sqr()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SzegoFunctionEval {
    pub point: Complex64,
    pub value: Complex64,
    /// `d_k = (2 pi)^{-1} int ln f(lambda) e^{-ik lambda} d lambda`.
    pub log_fourier: Vec<f64>,
}

const SZEGO_TAIL_TOL: f64 = 1e-10;
const SZEGO_MAX_TERMS: usize = 1 << 16;

/// `D(f, z) = exp(d_0 / 2 + sum_{k >= 1} d_k z^k)`, so `|D|^2 = f` on the
/// circle and `D(f, 0)^2 = G(f)`.
pub fn szego_function(model: &SpectralModel, z: Complex64) -> Result<SzegoFunctionEval> {
    model.validate()?;
    let r = z.norm();
    if !(r < 1.0) {
        return Err(Error::validation("point must lie strictly inside the unit disk"));
    }
    if model.szego_integral()? == SzegoIntegral::MinusInfinity {
        return Err(Error::validation("the Szegő condition fails for this model"));
    }
    let mut terms = 64;
    loop {
        let disc = Discretization::from_density(&model.plan(terms), |l| model.log_evaluate(l))?;
        let d: Vec<f64> = disc.moments(terms).into_iter().map(|m| m / (2.0 * PI)).collect();
        let quarter = terms - terms / 4;
        let tail_coef = d[quarter..].iter().map(|x| x.abs()).fold(0.0, f64::max);
        let tail = tail_coef * r.powi(quarter as i32) / (1.0 - r);
        if tail < SZEGO_TAIL_TOL || d[quarter..].iter().all(|&x| x == 0.0) {
            let mut log_d = Complex64::new(0.5 * d[0], 0.0);
            let mut zk = Complex64::new(1.0, 0.0);
            for &dk in &d[1..] {
                zk *= z;
                log_d += zk * dk;
            }
            return Ok(SzegoFunctionEval {
                point: z,
                value: log_d.exp(),
                log_fourier: d,
            });
        }
        if terms >= SZEGO_MAX_TERMS {
            return Err(Error::Accuracy {
                achieved: tail,
                context: "Szegő function series truncation".into(),
            });
        }
        terms *= 2;
    }
}
