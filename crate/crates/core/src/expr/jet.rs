//! Truncated bivariate Taylor arithmetic in `(r, s)` up to total order 3.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Maximum total derivative order carried by a [`Jet3`].
pub const ORDER: usize = 3;

const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

/// Values below this magnitude are treated as zero divisors.
pub const DIVISION_FLOOR: f64 = 1e-300;

/// A truncated bivariate Taylor expansion at a point `(r, s)`.
///
/// Internally the coefficients are normalized Taylor coefficients
/// `∂_r^a ∂_s^b f / (a! b!)`, so multiplication is a plain truncated
/// convolution. [`Jet3::partial`] returns the raw mixed partial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3 {
    c: [[f64; 4]; 4],
}

impl Default for Jet3 {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl Jet3 {
    pub fn constant(v: f64) -> Self {
        let mut c = [[0.0; 4]; 4];
        c[0][0] = v;
        Jet3 { c }
    }

    /// The independent variable `r` evaluated at `r`.
    pub fn var_r(r: f64) -> Self {
        let mut j = Self::constant(r);
        j.c[1][0] = 1.0;
        j
    }

    /// The independent variable `s` evaluated at `s`.
    pub fn var_s(s: f64) -> Self {
        let mut j = Self::constant(s);
        j.c[0][1] = 1.0;
        j
    }

    /// Builds a jet that depends on `r` only, from `[f, f', f'', f''']`.
    pub fn from_r_derivatives(d: [f64; 4]) -> Self {
        let mut j = Self::constant(0.0);
        for (a, v) in d.iter().enumerate() {
            j.c[a][0] = v / FACT[a];
        }
        j
    }

    /// Builds a jet from normalized Taylor coefficients; entries with
    /// `a + b > 3` are discarded.
    pub fn from_taylor(t: [[f64; 4]; 4]) -> Self {
        let mut c = t;
        for (a, row) in c.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                if a + b > ORDER {
                    *v = 0.0;
                }
            }
        }
        Jet3 { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0][0]
    }

    /// Normalized Taylor coefficient `∂_r^a ∂_s^b f / (a! b!)`.
    pub fn taylor(&self, a: usize, b: usize) -> f64 {
        if a + b > ORDER {
            return 0.0;
        }
        self.c[a][b]
    }

    pub fn taylor_coefficients(&self) -> [[f64; 4]; 4] {
        self.c
    }

    /// Mixed partial derivative `∂_r^a ∂_s^b f` at the expansion point.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        if a + b > ORDER {
            return 0.0;
        }
        self.c[a][b] * FACT[a] * FACT[b]
    }

    /// The ten partials in the order `(0,0),(1,0),(0,1),(2,0),(1,1),(0,2),(3,0),(2,1),(1,2),(0,3)`.
    pub fn partials(&self) -> [f64; 10] {
        let mut out = [0.0; 10];
        for (k, (a, b)) in INDEX_ORDER.iter().enumerate() {
            out[k] = self.partial(*a, *b);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        INDEX_ORDER.iter().all(|&(a, b)| self.c[a][b].is_finite())
    }

    /// Jet of `∂_r f`. The result is exact only to total order 2.
    #[allow(clippy::needless_range_loop)]
    pub fn d_r(&self) -> Self {
        let mut out = [[0.0; 4]; 4];
        for a in 0..ORDER {
            for b in 0..ORDER - a {
                out[a][b] = (a + 1) as f64 * self.c[a + 1][b];
            }
        }
        Jet3 { c: out }
    }

    /// Jet of `∂_s f`. The result is exact only to total order 2.
    #[allow(clippy::needless_range_loop)]
    pub fn d_s(&self) -> Self {
        let mut out = [[0.0; 4]; 4];
        for a in 0..ORDER {
            for b in 0..ORDER - a {
                out[a][b] = (b + 1) as f64 * self.c[a][b + 1];
            }
        }
        Jet3 { c: out }
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        for row in out.c.iter_mut() {
            for v in row.iter_mut() {
                *v *= k;
            }
        }
        out
    }

    pub fn add_scalar(&self, k: f64) -> Self {
        let mut out = *self;
        out.c[0][0] += k;
        out
    }

    /// Composes a univariate function with this jet, given the function's
    /// value and first three derivatives at `self.value()`.
    pub fn compose(&self, d: [f64; 4]) -> Self {
        let mut du = *self;
        du.c[0][0] = 0.0;
        let du2 = du * du;
        let du3 = du2 * du;
        let mut out = du.scale(d[1]) + du2.scale(d[2] / 2.0) + du3.scale(d[3] / 6.0);
        out.c[0][0] = d[0];
        out
    }

    pub fn recip(&self) -> Result<Self> {
        let v = self.value();
        if v.abs() <= DIVISION_FLOOR {
            return Err(Error::domain("divide", v));
        }
        let i = 1.0 / v;
        Ok(self.compose([i, -i * i, 2.0 * i * i * i, -6.0 * i * i * i * i]))
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        Ok(*self * rhs.recip()?)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Result<Self> {
        let v = self.value();
        if v <= 0.0 {
            return Err(Error::domain("log", v));
        }
        let i = 1.0 / v;
        Ok(self.compose([v.ln(), i, -i * i, 2.0 * i * i * i]))
    }

    pub fn sqrt(&self) -> Result<Self> {
        let v = self.value();
        if v <= 0.0 {
            return Err(Error::domain("sqrt", v));
        }
        let q = v.sqrt();
        Ok(self.compose([q, 0.5 / q, -0.25 / (q * v), 0.375 / (q * v * v)]))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn atan(&self) -> Self {
        let v = self.value();
        let q = 1.0 / (1.0 + v * v);
        self.compose([
            v.atan(),
            q,
            -2.0 * v * q * q,
            (6.0 * v * v - 2.0) * q * q * q,
        ])
    }

    /// Integer power. Negative exponents require a non-zero base.
    pub fn powi(&self, k: i32) -> Result<Self> {
        let v = self.value();
        if k < 0 && v.abs() <= DIVISION_FLOOR {
            return Err(Error::domain("power", v));
        }
        let kf = k as f64;
        let d = [
            v.powi(k),
            kf * v.powi(k - 1),
            kf * (kf - 1.0) * v.powi(k - 2),
            kf * (kf - 1.0) * (kf - 2.0) * v.powi(k - 3),
        ];
        // For k in 0..3 the v.powi(negative) factors are multiplied by zero
        // but may be infinite at v == 0.
        let mut d = d;
        for (m, dm) in d.iter_mut().enumerate() {
            if k >= 0 && (m as i32) > k {
                *dm = 0.0;
            }
        }
        Ok(self.compose(d))
    }

    /// Real power with a strictly positive base.
    pub fn powf(&self, p: f64) -> Result<Self> {
        let v = self.value();
        if v <= 0.0 {
            return Err(Error::domain("power", v));
        }
        Ok(self.compose([
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * v.powf(p - 3.0),
        ]))
    }
}

/// Enumeration order of the ten `(a, b)` index pairs with `a + b <= 3`.
pub const INDEX_ORDER: [(usize, usize); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, rhs: Jet3) -> Jet3 {
        let mut out = self;
        for &(a, b) in INDEX_ORDER.iter() {
            out.c[a][b] += rhs.c[a][b];
        }
        out
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: Jet3) -> Jet3 {
        let mut out = self;
        for &(a, b) in INDEX_ORDER.iter() {
            out.c[a][b] -= rhs.c[a][b];
        }
        out
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        let mut out = [[0.0; 4]; 4];
        for &(a, b) in INDEX_ORDER.iter() {
            let mut acc = 0.0;
            for i in 0..=a {
                for j in 0..=b {
                    acc += self.c[i][j] * rhs.c[a - i][b - j];
                }
            }
            out[a][b] = acc;
        }
        Jet3 { c: out }
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, k: f64) -> Jet3 {
        self.scale(k)
    }
}

impl Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(self, k: f64) -> Jet3 {
        self.add_scalar(k)
    }
}

impl Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(self, k: f64) -> Jet3 {
        self.add_scalar(-k)
    }
}
