//! Second-order forward-mode jets in the three real coordinates (x, y, t).
//!
//! Coefficients are complex so that complex-valued fields of real variables
//! (the deformation f, the Rossi factor φ, frame derivatives of real fields)
//! propagate through the same arithmetic.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Packed index of the symmetric Hessian entry (i, j).
#[inline]
pub const fn hidx(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Value, gradient and packed Hessian (xx, xy, xt, yy, yt, tt).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Taylor2 {
    pub v: Complex64,
    pub g: [Complex64; 3],
    pub h: [Complex64; 6],
}

impl Default for Taylor2 {
    fn default() -> Self {
        Self::constant(ZERO)
    }
}

impl Taylor2 {
    pub const fn constant(c: Complex64) -> Self {
        Self { v: c, g: [ZERO; 3], h: [ZERO; 6] }
    }

    pub const fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    /// The coordinate function number `idx` evaluated at `value`.
    pub fn var(value: f64, idx: usize) -> Self {
        let mut out = Self::real(value);
        out.g[idx] = Complex64::new(1.0, 0.0);
        out
    }

    pub fn hess(&self, i: usize, j: usize) -> Complex64 {
        self.h[hidx(i, j)]
    }

    pub fn conj(&self) -> Self {
        Self {
            v: self.v.conj(),
            g: self.g.map(|c| c.conj()),
            h: self.h.map(|c| c.conj()),
        }
    }

    pub fn re(&self) -> Self {
        Self {
            v: Complex64::new(self.v.re, 0.0),
            g: self.g.map(|c| Complex64::new(c.re, 0.0)),
            h: self.h.map(|c| Complex64::new(c.re, 0.0)),
        }
    }

    pub fn im(&self) -> Self {
        Self {
            v: Complex64::new(self.v.im, 0.0),
            g: self.g.map(|c| Complex64::new(c.im, 0.0)),
            h: self.h.map(|c| Complex64::new(c.im, 0.0)),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            v: self.v * c,
            g: self.g.map(|x| x * c),
            h: self.h.map(|x| x * c),
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        Self {
            v: self.v * c,
            g: self.g.map(|x| x * c),
            h: self.h.map(|x| x * c),
        }
    }

    /// Apply a scalar function given its value and first two derivatives at `self.v`.
    pub fn chain(&self, f0: Complex64, f1: Complex64, f2: Complex64) -> Self {
        let g = self.g.map(|x| f1 * x);
        let mut h = [ZERO; 6];
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            h[k] = f1 * self.h[k] + f2 * self.g[i] * self.g[j];
        }
        Self { v: f0, g, h }
    }

    pub fn recip(&self) -> Self {
        let r = self.v.inv();
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    /// Principal-branch power with real exponent.
    pub fn powf(&self, e: f64) -> Self {
        let f0 = self.v.powf(e);
        let f1 = e * self.v.powf(e - 1.0);
        let f2 = e * (e - 1.0) * self.v.powf(e - 2.0);
        self.chain(f0, f1, f2)
    }

    pub fn powi(&self, n: i32) -> Self {
        match n {
            0 => Self::real(1.0),
            1 => *self,
            2 => *self * *self,
            3 => *self * *self * *self,
            _ => {
                let f0 = self.v.powi(n);
                let f1 = n as f64 * self.v.powi(n - 1);
                let f2 = (n * (n - 1)) as f64 * self.v.powi(n - 2);
                self.chain(f0, f1, f2)
            }
        }
    }

    pub fn sqrt(&self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn exp(&self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    /// |u|² as a real jet.
    pub fn abs2(&self) -> Self {
        (*self * self.conj()).re()
    }

    /// |u| as a real jet; requires u(p) ≠ 0.
    pub fn abs(&self) -> Self {
        self.abs2().powf(0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.g.iter().all(|c| c.is_finite()) && self.h.iter().all(|c| c.is_finite())
    }
}

impl Add for Taylor2 {
    type Output = Taylor2;
    fn add(self, o: Taylor2) -> Taylor2 {
        let mut r = self;
        r += o;
        r
    }
}

impl AddAssign for Taylor2 {
    fn add_assign(&mut self, o: Taylor2) {
        self.v += o.v;
        for k in 0..3 {
            self.g[k] += o.g[k];
        }
        for k in 0..6 {
            self.h[k] += o.h[k];
        }
    }
}

impl Sub for Taylor2 {
    type Output = Taylor2;
    fn sub(self, o: Taylor2) -> Taylor2 {
        let mut r = self;
        r -= o;
        r
    }
}

impl SubAssign for Taylor2 {
    fn sub_assign(&mut self, o: Taylor2) {
        self.v -= o.v;
        for k in 0..3 {
            self.g[k] -= o.g[k];
        }
        for k in 0..6 {
            self.h[k] -= o.h[k];
        }
    }
}

impl Neg for Taylor2 {
    type Output = Taylor2;
    fn neg(self) -> Taylor2 {
        self.scale_re(-1.0)
    }
}

impl Mul for Taylor2 {
    type Output = Taylor2;
    fn mul(self, o: Taylor2) -> Taylor2 {
        let (a, b) = (&self, &o);
        let g = [
            a.v * b.g[0] + b.v * a.g[0],
            a.v * b.g[1] + b.v * a.g[1],
            a.v * b.g[2] + b.v * a.g[2],
        ];
        let mut h = [ZERO; 6];
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            h[k] = a.v * b.h[k] + b.v * a.h[k] + a.g[i] * b.g[j] + a.g[j] * b.g[i];
        }
        Taylor2 { v: a.v * b.v, g, h }
    }
}

impl MulAssign for Taylor2 {
    fn mul_assign(&mut self, o: Taylor2) {
        *self = *self * o;
    }
}

impl Div for Taylor2 {
    type Output = Taylor2;
    fn div(self, o: Taylor2) -> Taylor2 {
        self * o.recip()
    }
}

macro_rules! scalar_ops {
    ($t:ty, $conv:expr) => {
        impl Add<$t> for Taylor2 {
            type Output = Taylor2;
            fn add(mut self, c: $t) -> Taylor2 {
                self.v += $conv(c);
                self
            }
        }
        impl Add<Taylor2> for $t {
            type Output = Taylor2;
            fn add(self, u: Taylor2) -> Taylor2 {
                u + self
            }
        }
        impl Sub<$t> for Taylor2 {
            type Output = Taylor2;
            fn sub(mut self, c: $t) -> Taylor2 {
                self.v -= $conv(c);
                self
            }
        }
        impl Sub<Taylor2> for $t {
            type Output = Taylor2;
            fn sub(self, u: Taylor2) -> Taylor2 {
                -u + self
            }
        }
        impl Mul<$t> for Taylor2 {
            type Output = Taylor2;
            fn mul(self, c: $t) -> Taylor2 {
                self.scale($conv(c))
            }
        }
        impl Mul<Taylor2> for $t {
            type Output = Taylor2;
            fn mul(self, u: Taylor2) -> Taylor2 {
                u.scale($conv(self))
            }
        }
        impl Div<$t> for Taylor2 {
            type Output = Taylor2;
            fn div(self, c: $t) -> Taylor2 {
                self.scale(Complex64::new(1.0, 0.0) / $conv(c))
            }
        }
        impl Div<Taylor2> for $t {
            type Output = Taylor2;
            fn div(self, u: Taylor2) -> Taylor2 {
                u.recip().scale($conv(self))
            }
        }
    };
}

scalar_ops!(f64, |c: f64| Complex64::new(c, 0.0));
scalar_ops!(Complex64, |c: Complex64| c);
