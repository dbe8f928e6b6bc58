//! Hyper-dual numbers `a + b e1 + c e2 + d e1 e2` with `e1^2 = e2^2 = 0`.
//!
//! Seeding both infinitesimal parts with a direction `v` makes the `e1 e2`
//! coefficient of `f(x)` equal to `v^T H v` exactly, with no step size.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperDual {
    pub re: f64,
    pub e1: f64,
    pub e2: f64,
    pub e12: f64,
}

impl HyperDual {
    pub fn constant(x: f64) -> Self {
        Self {
            re: x,
            e1: 0.0,
            e2: 0.0,
            e12: 0.0,
        }
    }

    /// Variable `x` moving along direction `v` in both infinitesimal parts.
    pub fn variable(x: f64, v: f64) -> Self {
        Self {
            re: x,
            e1: v,
            e2: v,
            e12: 0.0,
        }
    }

    /// Applies a scalar function given its value and first two derivatives.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            re: f0,
            e1: f1 * self.e1,
            e2: f1 * self.e2,
            e12: f1 * self.e12 + f2 * self.e1 * self.e2,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let x = self.re;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    /// `ln(1 + x)`.
    pub fn ln_1p(self) -> Self {
        let x = 1.0 + self.re;
        self.chain(self.re.ln_1p(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    pub fn cosh(self) -> Self {
        let (c, s) = (self.re.cosh(), self.re.sinh());
        self.chain(c, s, c)
    }

    pub fn sinh(self) -> Self {
        let (c, s) = (self.re.cosh(), self.re.sinh());
        self.chain(s, c, s)
    }

    pub fn powi(self, mut n: u64) -> Self {
        let mut base = self;
        let mut acc = Self::constant(1.0);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            re: self.re * c,
            e1: self.e1 * c,
            e2: self.e2 * c,
            e12: self.e12 * c,
        }
    }
}

impl Add for HyperDual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            e1: self.e1 + o.e1,
            e2: self.e2 + o.e2,
            e12: self.e12 + o.e12,
        }
    }
}

impl Sub for HyperDual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re,
            e1: self.re * o.e1 + self.e1 * o.re,
            e2: self.re * o.e2 + self.e2 * o.re,
            e12: self.re * o.e12 + self.e1 * o.e2 + self.e2 * o.e1 + self.e12 * o.re,
        }
    }
}

impl Div for HyperDual {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let x = o.re;
        let inv = o.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x));
        self * inv
    }
}

impl Add<f64> for HyperDual {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        Self { re: self.re + c, ..self }
    }
}

impl Sub<f64> for HyperDual {
    type Output = Self;
    fn sub(self, c: f64) -> Self {
        Self { re: self.re - c, ..self }
    }
}

impl Mul<f64> for HyperDual {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        self.scale(c)
    }
}
