//! Gamma, Beta and binomial evaluators.
//!
//! All heavy formulas (Adenstedt weights, the closed-form BLUE variance, the
//! Samarov–Taqqu product) go through these in log space.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `sin(pi x)` with the argument reduced exactly before scaling by pi.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r in [-1, 1]
    let (r, sign) = if r < 0.0 { (-r, -1.0) } else { (r, 1.0) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

/// `ln |Gamma(x)|` together with the sign of `Gamma(x)`.
///
/// At the poles (non-positive integers) the magnitude is `+inf` and the sign is
/// reported as `0.0`, which is what the `1/Gamma = 0` convention needs.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x <= 0.0 && x == x.floor() {
        return (f64::INFINITY, 0.0);
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let (lg, _) = ln_gamma_signed(1.0 - x);
        return (PI.ln() - s.abs().ln() - lg, s.signum());
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln(), 1.0)
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    ln_gamma_signed(x).0
}

pub fn gamma(x: f64) -> f64 {
    let (lg, s) = ln_gamma_signed(x);
    if s == 0.0 {
        return f64::NAN;
    }
    s * lg.exp()
}

/// `1/Gamma(x)`, exactly zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    let (lg, s) = ln_gamma_signed(x);
    if s == 0.0 {
        0.0
    } else {
        s * (-lg).exp()
    }
}

/// `ln B(a, b)` for positive arguments.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn beta(a: f64, b: f64) -> f64 {
    ln_beta(a, b).exp()
}

/// `ln C(n, k)` for integers `0 <= k <= n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Exact binomial coefficient for the small arguments used by the efficiency
/// laws (falls back to log space past 2^53).
pub fn binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n);
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > (1u128 << 53) {
            return ln_binomial(n, k).exp();
        }
    }
    acc as f64
}

/// Rising factorial `(x)_m = x (x+1) ... (x+m-1)`.
pub fn pochhammer(x: f64, m: u32) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (x + i as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_matches_factorials() {
        let mut fact = 1.0;
        for n in 1..25 {
            assert!(rel(gamma(n as f64), fact) < 2e-14, "n={n}");
            fact *= n as f64;
        }
        assert!(rel(gamma(0.5), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(1.5), 0.5 * PI.sqrt()) < 1e-14);
    }

    #[test]
    fn reflection_signs() {
        // Gamma(-0.5) = -2 sqrt(pi), Gamma(-1.5) = 4/3 sqrt(pi)
        assert!(rel(gamma(-0.5), -2.0 * PI.sqrt()) < 1e-14);
        assert!(rel(gamma(-1.5), 4.0 / 3.0 * PI.sqrt()) < 1e-14);
        assert_eq!(recip_gamma(0.0), 0.0);
        assert_eq!(recip_gamma(-3.0), 0.0);
    }

    #[test]
    fn beta_agrees_with_gamma_ratio() {
        let grid = [0.1, 0.5, 1.0, 2.5, 7.3, 19.0, 33.3, 50.0];
        for &a in &grid {
            for &b in &grid {
                let direct = gamma(a) * gamma(b) / gamma(a + b);
                assert!(rel(beta(a, b), direct) < 1e-12, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(10, 3), 120.0);
        assert!(rel(ln_binomial(40, 20).exp(), 137_846_528_820.0) < 1e-12);
        assert_eq!(pochhammer(2.0, 3), 24.0);
    }
}
