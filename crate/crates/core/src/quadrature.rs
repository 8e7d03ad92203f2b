//! Composite Gauss–Legendre quadrature on `[0, pi]` with geometric grading
//! toward declared singular angles.
//!
//! Every spectral model in this crate is even, so integrals over `[-pi, pi]`
//! are taken as twice the half-line integral. The same panel layout also
//! produces a [`Discretization`]: a positive discrete measure whose
//! trigonometric moments approximate those of the density.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};

pub const NODES_PER_PANEL: usize = 32;
/// Minimum number of geometric levels laid toward a singular endpoint.
pub const MIN_GRADED_LEVELS: usize = 40;
const MAX_GRADED_LEVELS: usize = 1100;
const GRADING_RTOL: f64 = 1e-15;
const INTERIOR_RESOLUTION: f64 = 1e-6;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(NODES_PER_PANEL))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Break {
    angle: f64,
    singular: bool,
}

/// Panel layout on `[0, pi]`.
#[derive(Debug, Clone)]
pub struct HalfLinePlan {
    breaks: Vec<Break>,
    max_panel: f64,
}

impl HalfLinePlan {
    /// `singular`: angles (any sign, reduced to `[0, pi]`) where the integrand
    /// may blow up or lose smoothness and needs grading. `kinks`: angles
    /// where the integrand is merely discontinuous. `max_lag`: highest
    /// frequency `cos(k lambda)` the layout must resolve.
    pub fn new(singular: &[f64], kinks: &[f64], max_lag: usize) -> Self {
        let mut breaks: Vec<Break> = vec![
            Break { angle: 0.0, singular: false },
            Break { angle: PI, singular: false },
        ];
        let mut push = |angle: f64, singular: bool| {
            let a = fold_angle(angle);
            if let Some(b) = breaks.iter_mut().find(|b| (b.angle - a).abs() < 1e-15) {
                b.singular |= singular;
            } else {
                breaks.push(Break { angle: a, singular });
            }
        };
        for &s in singular {
            push(s, true);
        }
        for &k in kinks {
            push(k, false);
        }
        breaks.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        let max_panel = (40.0 / (max_lag as f64 + 1.0)).min(PI / 8.0);
        Self { breaks, max_panel }
    }

    fn segments(&self) -> impl Iterator<Item = (Break, Break)> + '_ {
        self.breaks.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b.angle > a.angle)
    }
}

/// Map any angle to the representative `|lambda| in [0, pi]` of an even function.
pub fn fold_angle(x: f64) -> f64 {
    let x = x.abs();
    if x <= PI {
        return x;
    }
    let mut r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r = 2.0 * PI - r;
    }
    r
}

/// Receives `(node, weight)` pairs with the weight including the panel
/// Jacobian; `tail` marks the extrapolated remainder at a singular point.
trait Sink {
    fn node(&mut self, x: f64, w_times_g: f64);
    fn tail(&mut self, at: f64, value: f64);
}

fn panel<G: Fn(f64) -> f64, S: Sink>(g: &G, a: f64, b: f64, sink: &mut S) -> f64 {
    let (xs, ws) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut total = 0.0;
    for (x, w) in xs.iter().zip(ws) {
        let t = mid + half * x;
        let v = w * half * g(t);
        sink.node(t, v);
        total += v;
    }
    total
}

/// Geometric levels toward `singular_end`; returns the integral with the
/// extrapolated remainder.
fn graded<G: Fn(f64) -> f64, S: Sink>(
    g: &G,
    singular_end: f64,
    other_end: f64,
    sink: &mut S,
) -> Result<f64> {
    let len = other_end - singular_end;
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut last = 0.0;
    let mut history: Vec<f64> = Vec::new();
    let mut small_run = 0;
    for level in 0..MAX_GRADED_LEVELS {
        let outer = singular_end + len * 0.5f64.powi(level as i32);
        let inner = singular_end + len * 0.5f64.powi(level as i32 + 1);
        if (outer - inner).abs() <= INTERIOR_RESOLUTION * singular_end.abs() {
            // node offsets from an interior singular angle lose relative
            // precision below this width; the tail is extrapolated instead
            let t = match recurrence_tail(&history) {
                Some(t) => {
                    sink.tail(singular_end, t);
                    t
                }
                None => extrapolate(prev, last, singular_end, sink),
            };
            return Ok(total + t);
        }
        let (lo, hi) = if inner < outer { (inner, outer) } else { (outer, inner) };
        let c = panel(g, lo, hi, sink);
        total += c;
        prev = Some(last);
        last = c;
        history.push(c);
        if level >= MIN_GRADED_LEVELS {
            if c.abs() <= GRADING_RTOL * total.abs().max(1e-300) {
                small_run += 1;
                if small_run >= 2 {
                    return Ok(total + extrapolate(prev, last, singular_end, sink));
                }
            } else {
                small_run = 0;
            }
        }
    }
    Err(Error::Accuracy {
        achieved: (last / total).abs(),
        context: format!("graded quadrature did not converge toward angle {singular_end}"),
    })
}

/// Sum of the continuation of the last four panel values under a two-term
/// linear recurrence. This is exact for `(a + b k) q^k` (log singularity) and
/// for `a q1^k + b q2^k` (power singularity plus smooth part).
fn recurrence_tail(c: &[f64]) -> Option<f64> {
    let [c0, c1, c2, c3] = *c.get(c.len().checked_sub(4)?..)? else {
        return None;
    };
    let det = c0 * c2 - c1 * c1;
    if det.abs() <= 1e-8 * c1 * c1 {
        return None;
    }
    // c2 = u c1 - v c0, c3 = u c2 - v c1
    let u = (c1 * c2 - c0 * c3) / (-det);
    let v = (c2 * c2 - c1 * c3) / (-det);
    let disc = u * u - 4.0 * v;
    // largest root modulus; a log singularity gives a (near) double root
    let modulus = if disc < 0.0 {
        v.sqrt()
    } else {
        (u.abs() + disc.sqrt()) / 2.0
    };
    if !(modulus < 0.9) {
        return None;
    }
    Some((u * c3 - v * (c2 + c3)) / (1.0 - u + v))
}

fn extrapolate<S: Sink>(prev: Option<f64>, last: f64, at: f64, sink: &mut S) -> f64 {
    let Some(prev) = prev else { return 0.0 };
    if prev == 0.0 || last == 0.0 {
        return 0.0;
    }
    let q = last / prev;
    if q > 0.0 && q < 1.0 {
        let t = last * q / (1.0 - q);
        sink.tail(at, t);
        t
    } else {
        0.0
    }
}

fn sweep<G: Fn(f64) -> f64, S: Sink>(plan: &HalfLinePlan, g: &G, sink: &mut S) -> Result<f64> {
    let mut total = 0.0;
    for (left, right) in plan.segments() {
        let len = right.angle - left.angle;
        let count = ((len / plan.max_panel).ceil() as usize).max(1);
        let h = len / count as f64;
        for i in 0..count {
            let a = left.angle + h * i as f64;
            let b = if i + 1 == count { right.angle } else { a + h };
            let sing_a = i == 0 && left.singular;
            let sing_b = i + 1 == count && right.singular;
            match (sing_a, sing_b) {
                (false, false) => total += panel(g, a, b, sink),
                (true, false) => total += graded(g, a, b, sink)?,
                (false, true) => total += graded(g, b, a, sink)?,
                (true, true) => {
                    let m = 0.5 * (a + b);
                    total += graded(g, a, m, sink)?;
                    total += graded(g, b, m, sink)?;
                }
            }
        }
    }
    Ok(total)
}

struct Discard;
impl Sink for Discard {
    fn node(&mut self, _: f64, _: f64) {}
    fn tail(&mut self, _: f64, _: f64) {}
}

/// `int_0^pi g`.
pub fn integrate_half<G: Fn(f64) -> f64>(plan: &HalfLinePlan, g: G) -> Result<f64> {
    sweep(plan, &g, &mut Discard)
}

/// `int_{-pi}^{pi} g` for an even integrand.
pub fn integrate_even<G: Fn(f64) -> f64>(plan: &HalfLinePlan, g: G) -> Result<f64> {
    Ok(2.0 * integrate_half(plan, g)?)
}

/// A positive discrete measure on `[0, pi]` standing in for an even measure
/// on the circle: each node carries the mass of both `+lambda` and `-lambda`.
#[derive(Debug, Clone, Default)]
pub struct Discretization {
    pub nodes: Vec<f64>,
    pub masses: Vec<f64>,
}

struct Collect<'a>(&'a mut Discretization);
impl Sink for Collect<'_> {
    fn node(&mut self, x: f64, v: f64) {
        if v != 0.0 {
            self.0.nodes.push(x);
            self.0.masses.push(2.0 * v);
        }
    }
    fn tail(&mut self, at: f64, v: f64) {
        self.0.nodes.push(at);
        self.0.masses.push(2.0 * v);
    }
}

impl Discretization {
    /// Discretize the even density `g >= 0`.
    pub fn from_density<G: Fn(f64) -> f64>(plan: &HalfLinePlan, g: G) -> Result<Self> {
        let mut d = Discretization::default();
        sweep(plan, &g, &mut Collect(&mut d))?;
        Ok(d)
    }

    /// Adds a point mass at the pair `+-angle` with the given total mass.
    pub fn push_atom(&mut self, angle: f64, total_mass: f64) {
        self.nodes.push(fold_angle(angle));
        self.masses.push(total_mass);
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Moments `sum_i m_i cos(k lambda_i)` for `k = 0..=max_lag`.
    pub fn moments(&self, max_lag: usize) -> Vec<f64> {
        use rayon::prelude::*;
        const ANCHOR: usize = 64;
        let chunk = 256;
        self.nodes
            .par_chunks(chunk)
            .zip(self.masses.par_chunks(chunk))
            .map(|(xs, ms)| {
                let mut acc = vec![0.0; max_lag + 1];
                for (&x, &m) in xs.iter().zip(ms) {
                    let (s1, c1) = x.sin_cos();
                    let mut k = 0;
                    while k <= max_lag {
                        let (mut s, mut c) = (k as f64 * x).sin_cos();
                        let end = (k + ANCHOR).min(max_lag + 1);
                        for slot in &mut acc[k..end] {
                            *slot += m * c;
                            let cn = c * c1 - s * s1;
                            s = s * c1 + c * s1;
                            c = cn;
                        }
                        k = end;
                    }
                }
                acc
            })
            .reduce(
                || vec![0.0; max_lag + 1],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }

    /// Moments accumulated in double-double arithmetic.
    pub fn moments_dd(&self, max_lag: usize) -> Vec<DoubleDouble> {
        use rayon::prelude::*;
        const ANCHOR: usize = 32;
        self.nodes
            .par_iter()
            .zip(self.masses.par_iter())
            .fold(
                || vec![DoubleDouble::ZERO; max_lag + 1],
                |mut acc, (&x, &m)| {
                    let (s1, c1) = DoubleDouble::from_f64(x).sin_cos();
                    let m = DoubleDouble::from_f64(m);
                    let mut k = 0;
                    while k <= max_lag {
                        let (mut s, mut c) = DoubleDouble::mul_f64s(k as f64, x).sin_cos();
                        let end = (k + ANCHOR).min(max_lag + 1);
                        for slot in &mut acc[k..end] {
                            *slot += m * c;
                            let cn = c * c1 - s * s1;
                            s = s * c1 + c * s1;
                            c = cn;
                        }
                        k = end;
                    }
                    acc
                },
            )
            .reduce(
                || vec![DoubleDouble::ZERO; max_lag + 1],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(32);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m62: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(62)).sum();
        assert!((m62 - 2.0 / 63.0).abs() < 1e-14);
    }

    #[test]
    fn graded_quadrature_handles_power_singularity() {
        // int_0^pi x^{-0.8} dx = 5 pi^{0.2}
        let plan = HalfLinePlan::new(&[0.0], &[], 0);
        let v = integrate_half(&plan, |x| x.powf(-0.8)).unwrap();
        assert!((v - 5.0 * PI.powf(0.2)).abs() < 1e-12, "{v}");
    }

    #[test]
    fn graded_quadrature_handles_log_singularity() {
        // int_0^pi ln x dx = pi ln pi - pi
        let plan = HalfLinePlan::new(&[0.0], &[], 0);
        let v = integrate_half(&plan, f64::ln).unwrap();
        assert!((v - (PI * PI.ln() - PI)).abs() < 1e-13, "{v}");
    }

    #[test]
    fn interior_singularity() {
        // int_0^pi |x-1|^{-0.5} dx = 2 + 2 sqrt(pi-1)
        let plan = HalfLinePlan::new(&[1.0], &[], 0);
        let v = integrate_half(&plan, |x| (x - 1.0).abs().powf(-0.5)).unwrap();
        let exact = 2.0 + 2.0 * (PI - 1.0).sqrt();
        assert!((v - exact).abs() < 1e-11, "{v} vs {exact}");
    }

    #[test]
    fn interior_log_singularity() {
        let plan = HalfLinePlan::new(&[1.0], &[], 0);
        let v = integrate_half(&plan, |x| (x - 1.0).abs().ln()).unwrap();
        let exact = (PI - 1.0) * (PI - 1.0).ln() - PI;
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
    }

    #[test]
    fn discretization_moments_match_oscillatory_integrals() {
        // density 1 on [-pi, pi]: r(0) = 2 pi, r(k) = 0
        let plan = HalfLinePlan::new(&[], &[], 500);
        let d = Discretization::from_density(&plan, |_| 1.0).unwrap();
        let r = d.moments(500);
        assert!((r[0] - 2.0 * PI).abs() < 1e-13);
        assert!(r[1..].iter().all(|v| v.abs() < 1e-12));
        let rd = d.moments_dd(40);
        for k in 0..=40 {
            assert!((rd[k].to_f64() - r[k]).abs() < 1e-13);
        }
    }
}
