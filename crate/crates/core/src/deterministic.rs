//! Generalized Chebyshev polynomials on unions of circular arcs and the
//! exponential decay of the BLUE variance for deterministic spectra.
//!
//! Regions are conjugate-symmetric, so extremal polynomials have real
//! coefficients and only the upper half `[0, pi]` needs to be sampled.
//! Each Lawson step is a weighted least-squares problem with `q(1) = 1`,
//! whose solution is the normalized Szegő kernel `S_n(z, 1) / S_n(1, 1)` of
//! the discrete weighted measure; orthonormal polynomials are generated on
//! the grid nodes themselves rather than from moments.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::{DoubleDouble, Real};
use crate::error::{Error, Result};
use crate::special::binomial;
use crate::spectra::SpectralMeasure;
use crate::toeplitz::blue_for;
use crate::Precision;

const ARC_EPS: f64 = 1e-12;
const LAWSON_MAX_ITER: usize = 500;
const LAWSON_RTOL: f64 = 1e-8;
const WEIGHT_FLOOR: f64 = 1e-14;
/// Orders up to this use double precision in the Lawson iteration.
const LAWSON_DOUBLE_MAX_ORDER: usize = 128;
/// Relative variance below which double results are redone in double-double.
pub const DOUBLE_VARIANCE_FLOOR: f64 = 1e-12;
/// Relative variance below which double-double results are not trusted.
pub const DD_VARIANCE_FLOOR: f64 = 1e-24;

/// Closed, conjugate-symmetric union of arcs of the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcRegion {
    /// Disjoint sorted intervals within `[-pi, pi]`.
    pub arcs: Vec<(f64, f64)>,
    pub contains_one: bool,
}

impl ArcRegion {
    pub fn new(arcs: &[(f64, f64)]) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::validation("region needs at least one arc"));
        }
        let mut v = Vec::with_capacity(arcs.len());
        for &(a, b) in arcs {
            if !(a.is_finite() && b.is_finite()) || a > b {
                return Err(Error::validation(format!("arc [{a}, {b}] is not an interval")));
            }
            if a < -PI - ARC_EPS || b > PI + ARC_EPS {
                return Err(Error::validation(format!("arc [{a}, {b}] leaves [-pi, pi]")));
            }
            v.push((a.max(-PI), b.min(PI)));
        }
        let arcs = merge(v);
        let mirrored = merge(arcs.iter().map(|&(a, b)| (-b, -a)).collect());
        let symmetric = mirrored.len() == arcs.len()
            && mirrored
                .iter()
                .zip(&arcs)
                .all(|(m, a)| (m.0 - a.0).abs() < 1e-9 && (m.1 - a.1).abs() < 1e-9);
        if !symmetric {
            return Err(Error::validation("region must be symmetric under lambda -> -lambda"));
        }
        let contains_one = arcs.iter().any(|&(a, b)| a <= 0.0 && 0.0 <= b);
        Ok(ArcRegion { arcs, contains_one })
    }

    pub fn full_circle() -> Self {
        ArcRegion::new(&[(-PI, PI)]).expect("valid")
    }

    /// `{alpha <= |lambda| <= pi}`.
    pub fn complement_arc(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(Error::validation("alpha must lie in (0, pi)"));
        }
        ArcRegion::new(&[(-PI, -alpha), (alpha, PI)])
    }

    /// `{|lambda| <= beta}`.
    pub fn arc_around_one(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= PI) {
            return Err(Error::validation("beta must lie in (0, pi]"));
        }
        ArcRegion::new(&[(-beta, beta)])
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.arcs.iter().any(|&(a, b)| a - ARC_EPS <= lambda && lambda <= b + ARC_EPS)
    }

    fn upper_half(&self) -> Vec<(f64, f64)> {
        self.arcs
            .iter()
            .filter(|&&(_, b)| b >= 0.0)
            .map(|&(a, b)| (a.max(0.0), b))
            .collect()
    }

    /// About `m` equispaced angles covering the upper half, endpoints included.
    pub fn grid(&self, m: usize) -> Vec<f64> {
        let half = self.upper_half();
        let total: f64 = half.iter().map(|(a, b)| b - a).sum();
        let mut out = Vec::with_capacity(m + 2 * half.len());
        for (a, b) in half {
            let len = b - a;
            if len <= ARC_EPS || total <= 0.0 {
                out.push(a);
                continue;
            }
            let cnt = ((m as f64 * len / total).round() as usize).max(2);
            for j in 0..cnt {
                out.push(a + len * j as f64 / (cnt - 1) as f64);
            }
        }
        out
    }
}

fn merge(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 + ARC_EPS => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevSolution {
    pub order: usize,
    /// Coefficients of `T_n` in increasing degree.
    pub coefficients: Vec<f64>,
    /// Maximum modulus over the discretized region, from the node values of
    /// the iteration (the rounded monomial coefficients cannot resolve
    /// moduli much below `1e-16`).
    pub deviation: f64,
    /// `deviation^{1/n}`.
    pub constant_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grid_points: usize,
    pub precision: Precision,
    /// The power `((z + 1) / 2)^n` beat the iteration and is reported instead.
    pub used_power_candidate: bool,
}

/// Node-based Szegő recursion for the measure `sum_i w_i (delta_{z_i} + delta_{conj z_i})`.
struct KernelStep<T> {
    reflections: Vec<T>,
    /// Scale applied to each new polynomial.
    scales: Vec<T>,
    /// `phi_k(1)`.
    at_one: Vec<T>,
    kernel_at_one: T,
    q_abs: Vec<T>,
}

fn kernel_step<T: Real>(cos: &[T], sin: &[T], w: &[T], n: usize) -> KernelStep<T> {
    let two = T::from_f64(2.0);
    let m = cos.len();
    let mut re = vec![T::one(); m];
    let mut im = vec![T::zero(); m];
    let mut sre = vec![T::one(); m];
    let mut sim = vec![T::zero(); m];
    let mut acc_re = vec![T::zero(); m];
    let mut acc_im = vec![T::zero(); m];

    let norm0 = two * w.iter().fold(T::zero(), |a, &x| a + x);
    let s0 = T::one() / norm0.sqrt();
    for i in 0..m {
        re[i] = s0;
        sre[i] = s0;
    }
    let mut p1 = s0;

    let mut reflections = Vec::with_capacity(n);
    let mut scales = vec![s0];
    let mut at_one = vec![p1];
    let mut kernel = T::zero();
    for k in 0..=n {
        for i in 0..m {
            acc_re[i] += p1 * re[i];
            acc_im[i] += p1 * im[i];
        }
        kernel += p1 * p1;
        if k == n {
            break;
        }
        // alpha = <z phi, phi*>
        let mut x = T::zero();
        for i in 0..m {
            let zr = cos[i] * re[i] - sin[i] * im[i];
            let zi = cos[i] * im[i] + sin[i] * re[i];
            x += w[i] * (zr * sre[i] + zi * sim[i]);
        }
        let alpha = two * x;
        let mut norm = T::zero();
        for i in 0..m {
            let zr = cos[i] * re[i] - sin[i] * im[i];
            let zi = cos[i] * im[i] + sin[i] * re[i];
            let nr = zr - alpha * sre[i];
            let ni = zi - alpha * sim[i];
            sre[i] -= alpha * zr;
            sim[i] -= alpha * zi;
            re[i] = nr;
            im[i] = ni;
            norm += w[i] * (nr * nr + ni * ni);
        }
        let scale = T::one() / (two * norm).sqrt();
        for i in 0..m {
            re[i] = re[i] * scale;
            im[i] = im[i] * scale;
            sre[i] = sre[i] * scale;
            sim[i] = sim[i] * scale;
        }
        p1 = (T::one() - alpha) * p1 * scale;
        reflections.push(alpha);
        scales.push(scale);
        at_one.push(p1);
    }
    let inv = T::one() / kernel;
    let q_abs = (0..m)
        .map(|i| {
            let (a, b) = (acc_re[i] * inv, acc_im[i] * inv);
            (a * a + b * b).sqrt()
        })
        .collect();
    KernelStep {
        reflections,
        scales,
        at_one,
        kernel_at_one: kernel,
        q_abs,
    }
}

/// Monomial coefficients of `sum_k phi_k(1) phi_k(z) / sum_k phi_k(1)^2`.
fn kernel_coefficients<T: Real>(step: &KernelStep<T>) -> Vec<f64> {
    let n = step.reflections.len();
    let mut c = vec![step.scales[0]];
    let mut acc = vec![T::zero(); n + 1];
    for k in 0..=n {
        for (slot, &ck) in acc.iter_mut().zip(&c) {
            *slot += step.at_one[k] * ck;
        }
        if k == n {
            break;
        }
        let alpha = step.reflections[k];
        let scale = step.scales[k + 1];
        let mut next = Vec::with_capacity(k + 2);
        for j in 0..=k + 1 {
            let shifted = if j == 0 { T::zero() } else { c[j - 1] };
            let reversed = if j <= k { c[k - j] } else { T::zero() };
            next.push((shifted - alpha * reversed) * scale);
        }
        c = next;
    }
    let inv = T::one() / step.kernel_at_one;
    acc.into_iter().map(|a| (a * inv).to_f64()).collect()
}

fn lawson<T: Real>(angles: &[f64], n: usize) -> (KernelStep<T>, f64, usize, bool) {
    let m = angles.len();
    let (cos, sin): (Vec<T>, Vec<T>) = angles
        .iter()
        .map(|&a| {
            let (s, c) = DoubleDouble::from_f64(a).sin_cos();
            (T::from_dd(c), T::from_dd(s))
        })
        .unzip();
    let floor = T::from_f64(WEIGHT_FLOOR);
    let mut w = vec![T::from_f64(1.0 / m as f64); m];
    let mut best: Option<(KernelStep<T>, f64)> = None;
    let mut prev = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=LAWSON_MAX_ITER {
        iterations = it;
        let step = kernel_step(&cos, &sin, &w, n);
        let dev = step.q_abs.iter().map(|q| q.to_f64()).fold(0.0, f64::max);
        let done = (dev - prev).abs() <= LAWSON_RTOL * dev;
        prev = dev;
        let mut total = T::zero();
        for (wi, &q) in w.iter_mut().zip(&step.q_abs) {
            *wi = *wi * q;
            total += *wi;
        }
        for wi in w.iter_mut() {
            *wi = *wi / total;
            if *wi < floor {
                *wi = floor;
            }
        }
        if best.as_ref().is_none_or(|(_, d)| dev < *d) {
            best = Some((step, dev));
        }
        if done {
            converged = true;
            break;
        }
    }
    let (step, dev) = best.expect("at least one iteration");
    (step, dev, iterations, converged)
}

/// Default grid size `max(64 n, 4096)`.
pub fn default_grid_points(n: usize) -> usize {
    (64 * n).max(4096)
}

/// Minimizes `max |q|` over the discretized region among `deg q <= n`,
/// `q(1) = 1`, by Lawson's iteratively reweighted least squares.
pub fn chebyshev_min_max(region: &ArcRegion, n: usize, grid_points: Option<usize>) -> Result<ChebyshevSolution> {
    if n == 0 {
        return Err(Error::validation("order must be at least 1"));
    }
    let angles = region.grid(grid_points.unwrap_or_else(|| default_grid_points(n)));
    if 2 * angles.len() < n + 1 {
        return Err(Error::validation("grid too coarse for the requested order"));
    }
    if region.contains_one {
        // |q(1)| = 1 bounds the maximum below, and q = 1 attains it
        let mut coefficients = vec![0.0; n + 1];
        coefficients[0] = 1.0;
        return Ok(ChebyshevSolution {
            order: n,
            coefficients,
            deviation: 1.0,
            constant_estimate: 1.0,
            iterations: 0,
            converged: true,
            grid_points: angles.len(),
            precision: Precision::Double,
            used_power_candidate: false,
        });
    }
    let (coefficients, deviation, iterations, converged, precision) = if n <= LAWSON_DOUBLE_MAX_ORDER {
        let (s, d, it, c) = lawson::<f64>(&angles, n);
        (kernel_coefficients(&s), d, it, c, Precision::Double)
    } else {
        let (s, d, it, c) = lawson::<DoubleDouble>(&angles, n);
        (kernel_coefficients(&s), d, it, c, Precision::DoubleDouble)
    };
    let power_dev = angles
        .iter()
        .map(|&l| (0.5 * l).cos().abs().powi(n as i32))
        .fold(0.0, f64::max);
    let (coefficients, deviation, used_power_candidate) = if power_dev < deviation {
        let scale = 0.5f64.powi(n as i32);
        let c = (0..=n).map(|k| binomial(n as u64, k as u64) * scale).collect();
        (c, power_dev, true)
    } else {
        (coefficients, deviation, false)
    };
    Ok(ChebyshevSolution {
        order: n,
        coefficients,
        deviation,
        constant_estimate: deviation.powf(1.0 / n as f64),
        iterations,
        converged,
        grid_points: angles.len(),
        precision,
        used_power_candidate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub n_grid: Vec<usize>,
    pub deviations: Vec<f64>,
    /// `tau_n = deviation_n^{1/n}` for each order.
    pub taus: Vec<f64>,
    /// The last `tau_n`.
    pub estimate: f64,
    /// Max over the grid minus min over the top half.
    pub oscillation: f64,
    pub all_converged: bool,
}

/// Generalized Chebyshev constant estimated by the last `tau_n` on the grid.
pub fn chebyshev_constant_estimate(region: &ArcRegion, n_grid: &[usize]) -> Result<ConstantEstimate> {
    check_grid(n_grid)?;
    let sols: Vec<ChebyshevSolution> = n_grid
        .par_iter()
        .map(|&n| chebyshev_min_max(region, n, None))
        .collect::<Result<_>>()?;
    let taus: Vec<f64> = sols.iter().map(|s| s.constant_estimate).collect();
    let top = &taus[taus.len() / 2..];
    let oscillation = taus.iter().cloned().fold(f64::MIN, f64::max) - top.iter().cloned().fold(f64::MAX, f64::min);
    Ok(ConstantEstimate {
        n_grid: n_grid.to_vec(),
        deviations: sols.iter().map(|s| s.deviation).collect(),
        estimate: *taus.last().unwrap(),
        taus,
        oscillation,
        all_converged: sols.iter().all(|s| s.converged),
    })
}

fn check_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() {
        return Err(Error::validation("order grid is empty"));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("order grid must be positive and strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Neutrality {
    ExponentiallyNeutral,
    ExponentiallyDecreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionMode {
    Double,
    #[serde(rename = "dd")]
    DoubleDouble,
    #[default]
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Orders actually used (a prefix of the requested grid).
    pub n_grid: Vec<usize>,
    pub variances: Vec<f64>,
    pub precisions: Vec<Precision>,
    /// `(sigma_{n_{i+1}} / sigma_{n_i})^{1/(n_{i+1} - n_i)}`.
    pub step_ratios: Vec<f64>,
    pub rho: f64,
    pub standard_error: f64,
    /// `-d log(-log ratio) / d log n`: near 0 for geometric decay, near 1
    /// for power-law decay.
    pub subexponential_index: Option<f64>,
    pub neutrality: Neutrality,
    pub warning: Option<String>,
}

fn variance_at(measure: &SpectralMeasure, n: usize, mode: PrecisionMode) -> Result<(f64, Precision)> {
    let r0 = crate::covariance::covariance_sequence(measure, 0)?.values[0];
    let run = |p: Precision| -> Result<f64> {
        let v = blue_for(measure, n, p)?.variance;
        let floor = if p == Precision::Double {
            DOUBLE_VARIANCE_FLOOR
        } else {
            DD_VARIANCE_FLOOR
        };
        if v < floor * r0 {
            return Err(Error::Accuracy {
                achieved: v / r0,
                context: format!("relative BLUE variance at order {n} is below the {p:?} resolution"),
            });
        }
        Ok(v)
    };
    match mode {
        PrecisionMode::Double => run(Precision::Double).map(|v| (v, Precision::Double)),
        PrecisionMode::DoubleDouble => run(Precision::DoubleDouble).map(|v| (v, Precision::DoubleDouble)),
        PrecisionMode::Auto => match run(Precision::Double) {
            Ok(v) => Ok((v, Precision::Double)),
            Err(e) if e.is_numerical() => run(Precision::DoubleDouble).map(|v| (v, Precision::DoubleDouble)),
            Err(e) => Err(e),
        },
    }
}

/// Fits `rho = lim sigma_n^{1/n}` from BLUE variances by geometric means of
/// per-step ratios over the top half of the grid.
pub fn decay_rate_from_variances(measure: &SpectralMeasure, n_grid: &[usize], mode: PrecisionMode) -> Result<DecayFit> {
    check_grid(n_grid)?;
    let results: Vec<Result<(f64, Precision)>> = n_grid.par_iter().map(|&n| variance_at(measure, n, mode)).collect();
    let mut ns = Vec::new();
    let mut variances = Vec::new();
    let mut precisions = Vec::new();
    let mut warning = None;
    for (&n, r) in n_grid.iter().zip(results) {
        match r {
            Ok((v, p)) => {
                ns.push(n);
                variances.push(v);
                precisions.push(p);
            }
            Err(e) if e.is_numerical() => {
                warning = Some(format!("grid truncated before n = {n}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if ns.len() < 2 {
        return Err(Error::Accuracy {
            achieved: ns.len() as f64,
            context: format!(
                "fewer than two reachable orders{}",
                warning.as_deref().map(|w| format!(" ({w})")).unwrap_or_default()
            ),
        });
    }
    let log_ratios: Vec<f64> = ns
        .windows(2)
        .zip(variances.windows(2))
        .map(|(n, v)| 0.5 * (v[1] / v[0]).ln() / (n[1] - n[0]) as f64)
        .collect();
    let mids: Vec<f64> = ns.windows(2).map(|n| 0.5 * (n[0] + n[1]) as f64).collect();
    let top = log_ratios.len() / 2;
    let tail = &log_ratios[top..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let rho = mean.exp();
    let standard_error = if tail.len() > 1 {
        let var = tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (tail.len() - 1) as f64;
        rho * (var / tail.len() as f64).sqrt()
    } else {
        0.0
    };
    let subexponential_index = subexponential_index(&mids, &log_ratios);
    let decreasing = rho <= 1.0 - 5.0 * standard_error
        && rho < 1.0
        && tail.iter().all(|&x| x < 0.0)
        && subexponential_index.is_some_and(|g| g < 0.25);
    Ok(DecayFit {
        n_grid: ns,
        variances,
        precisions,
        step_ratios: log_ratios.iter().map(|x| x.exp()).collect(),
        rho,
        standard_error,
        subexponential_index,
        neutrality: if decreasing {
            Neutrality::ExponentiallyDecreasing
        } else {
            Neutrality::ExponentiallyNeutral
        },
        warning,
    })
}

/// Least-squares slope of `log(-log r)` against `log n`, negated, over the
/// top half (or all points when the top half has fewer than three).
fn subexponential_index(mids: &[f64], log_ratios: &[f64]) -> Option<f64> {
    let start = if log_ratios.len() - log_ratios.len() / 2 >= 3 {
        log_ratios.len() / 2
    } else {
        0
    };
    let pts: Vec<(f64, f64)> = mids[start..]
        .iter()
        .zip(&log_ratios[start..])
        .filter(|(_, &l)| l < 0.0)
        .map(|(&m, &l)| (m.ln(), (-l).ln()))
        .collect();
    if pts.len() < 2 || pts.len() < log_ratios.len() - start {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}
