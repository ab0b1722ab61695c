//! Double-double arithmetic (about 32 significant digits) built on
//! error-free transformations.
//!
//! Used to evaluate error functionals of manufactured solutions: once
//! `‖u - u_h⁰‖` drops below about `1e-8`, rounding of the exact data in
//! plain `f64` is no longer negligible against the error itself.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: 0.6931471805599453,
    lo: 2.3190468138462996e-17,
};
const FRAC_PI_2: Dd = Dd {
    hi: 1.5707963267948966,
    lo: 6.123233995736766e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact sum of two doubles.
    pub fn sum(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    /// Exact product of two doubles.
    pub fn prod(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn powi(self, n: u32) -> Dd {
        let mut r = Dd::ONE;
        for _ in 0..n {
            r = r * self;
        }
        r
    }

    fn ldexp(self, k: i32) -> Dd {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        // exp(x) = 2^k exp(r)^(2^10), |r| ≤ ln2 / 2^11
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * k).ldexp(-10);
        let mut term = r;
        let mut sum = r;
        for n in 2..=14 {
            term = term * r / (n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        // sum = exp(r) - 1; square up keeping the "- 1" form for accuracy
        for _ in 0..10 {
            sum = sum * (sum + 2.0);
        }
        (sum + 1.0).ldexp(k as i32)
    }

    /// `(sin x, cos x)`.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let j = (self.hi / FRAC_PI_2.hi).round();
        let r = self - FRAC_PI_2 * j;
        let r2 = r * r;
        let (mut s, mut c) = (r, Dd::ONE);
        let mut ts = r;
        let mut tc = Dd::ONE;
        for n in 1..=20 {
            ts = -ts * r2 / (((2 * n) * (2 * n + 1)) as f64);
            tc = -tc * r2 / (((2 * n - 1) * (2 * n)) as f64);
            s = s + ts;
            c = c + tc;
            if ts.hi.abs() < 1e-34 && tc.hi.abs() < 1e-34 {
                break;
            }
        }
        match (j as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sin(self) -> Dd {
        self.sin_cos().0
    }

    pub fn cos(self) -> Dd {
        self.sin_cos().1
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + q3
    }
}

macro_rules! mixed_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Dd {
            type Output = Dd;
            fn $m(self, b: f64) -> Dd {
                $tr::$m(self, Dd::from_f64(b))
            }
        }
        impl $tr<Dd> for f64 {
            type Output = Dd;
            fn $m(self, b: Dd) -> Dd {
                $tr::$m(Dd::from_f64(self), b)
            }
        }
    )*};
}

mixed_ops!(Add add, Sub sub, Mul mul, Div div);
