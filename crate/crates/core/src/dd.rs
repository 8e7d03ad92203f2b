//! Double-double arithmetic and the scalar abstraction shared by the solvers.
//!
//! A [`DoubleDouble`] stores an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! which gives roughly 32 significant decimal digits. Only the operations the
//! Toeplitz and moment code needs are provided.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };
    // third limb of pi, used only for argument reduction
    const PI_LO2: f64 = -2.994_769_809_718_339_7e-33;

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn mul_f64s(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Self { hi: p, lo: e }
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::ZERO } else { Self::from_f64(f64::NAN) };
        }
        let s = self.hi.sqrt();
        let ss = Self::mul_f64s(s, s);
        let corr = (self - ss).hi / (2.0 * s);
        let (hi, lo) = quick_two_sum(s, corr);
        Self { hi, lo }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    /// Simultaneous sine and cosine, accurate to roughly 1e-31 absolute for
    /// arguments of moderate size (|x| < 1e6).
    pub fn sin_cos(self) -> (Self, Self) {
        let half_pi = Self::PI.mul_f64(0.5);
        let q = (self.hi / half_pi.hi).round();
        // r = x - q*pi/2 with a three-limb pi
        let r = self - Self::mul_f64s(q, half_pi.hi) - Self::mul_f64s(q, half_pi.lo)
            - Self::from_f64(q * 0.5 * Self::PI_LO2);
        let (s, c) = taylor_sin_cos(r);
        match (q as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

fn taylor_sin_cos(r: DoubleDouble) -> (DoubleDouble, DoubleDouble) {
    // |r| <= pi/4; 30 terms put the truncation error far below 1e-32
    let r2 = r * r;
    let mut term = DoubleDouble::ONE;
    let mut cos = DoubleDouble::ONE;
    let mut sin = DoubleDouble::ZERO;
    let mut k = 1.0;
    let mut sin_term = r;
    sin += sin_term;
    for _ in 0..16 {
        term = -(term * r2) / DoubleDouble::from_f64(k * (k + 1.0));
        cos += term;
        sin_term = -(sin_term * r2) / DoubleDouble::from_f64((k + 1.0) * (k + 2.0));
        sin += sin_term;
        k += 2.0;
        if term.hi.abs() < 1e-36 && sin_term.hi.abs() < 1e-36 {
            break;
        }
    }
    (sin, cos)
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

impl AddAssign for DoubleDouble {
    #[inline]
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for DoubleDouble {
    #[inline]
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl MulAssign for DoubleDouble {
    #[inline]
    fn mul_assign(&mut self, b: Self) {
        *self = *self * b;
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(std::cmp::Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

/// Scalar type the Levinson and Cholesky kernels are generic over.
pub trait Real:
    Copy
    + PartialOrd
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Send
    + Sync
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn to_dd(self) -> DoubleDouble;
    fn from_dd(x: DoubleDouble) -> Self;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    /// Smallest admissible value of `1 - |reflection|` before the recursion
    /// is declared numerically singular.
    fn breakdown_margin() -> f64;
}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn to_dd(self) -> DoubleDouble {
        DoubleDouble::from_f64(self)
    }
    #[inline]
    fn from_dd(x: DoubleDouble) -> Self {
        x.to_f64()
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn breakdown_margin() -> f64 {
        1e-14
    }
}

impl Real for DoubleDouble {
    #[inline]
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    #[inline]
    fn to_dd(self) -> DoubleDouble {
        self
    }
    #[inline]
    fn from_dd(x: DoubleDouble) -> Self {
        x
    }
    #[inline]
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn breakdown_margin() -> f64 {
        1e-30
    }
}
