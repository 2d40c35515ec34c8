//! Working precision and the arbitrary-precision scalars used by the series layer.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real scalar at configurable binary precision.
pub type Real = Float;

pub const DEFAULT_BITS: u32 = 256;
pub const MIN_BITS: u32 = 64;
/// Environment variable consulted for the default precision.
pub const BITS_ENV: &str = "ELLIPTIC_NF_BITS";

/// Working precision in bits, with the derived comparison tolerance `2^(-bits/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Precision {
    bits: u32,
}

impl Precision {
    pub fn new(bits: u32) -> Result<Self> {
        if bits < MIN_BITS {
            return Err(Error::InvalidPrecision { bits });
        }
        Ok(Precision { bits })
    }

    /// Precision from `ELLIPTIC_NF_BITS`, falling back to 256 bits.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BITS_ENV) {
            Ok(v) => {
                let bits = v
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Config(format!("{BITS_ENV}={v} is not an integer")))?;
                Precision::new(bits)
            }
            Err(_) => Ok(Precision::default()),
        }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn tolerance(self) -> f64 {
        2f64.powi(-((self.bits / 2) as i32))
    }

    pub fn real(self, x: f64) -> Real {
        Float::with_val(self.bits, x)
    }

    pub fn pi(self) -> Real {
        Float::with_val(self.bits, Constant::Pi)
    }
}

/// `2^(-bits/2)` for a raw bit count.
pub fn tolerance_for(bits: u32) -> f64 {
    2f64.powi(-((bits / 2) as i32))
}

impl Default for Precision {
    fn default() -> Self {
        Precision { bits: DEFAULT_BITS }
    }
}

/// Full-precision decimal rendering (round-trips through [`parse_real`]).
pub fn format_real(x: &Real) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, None)
}

pub fn parse_real(s: &str, bits: u32) -> Result<Real> {
    let parsed = Float::parse(s.trim()).map_err(|e| Error::Parse(format!("'{s}': {e}")))?;
    Ok(Float::with_val(bits, parsed))
}

/// Complex scalar built from two MPFR floats.
#[derive(Clone, PartialEq)]
pub struct Cplx {
    pub re: Real,
    pub im: Real,
}

impl fmt::Debug for Cplx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e} {:+e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl Cplx {
    pub fn new(re: Real, im: Real) -> Self {
        Cplx { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Cplx { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Cplx::from_f64(1.0, 0.0, prec)
    }

    pub fn i(prec: u32) -> Self {
        Cplx::from_f64(0.0, 1.0, prec)
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Cplx { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    pub fn from_real(re: Real) -> Self {
        let im = Float::new(re.prec());
        Cplx { re, im }
    }

    pub fn from_c64(z: Complex64, prec: u32) -> Self {
        Cplx::from_f64(z.re, z.im, prec)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Cplx {
        Cplx { re: self.re.clone(), im: Float::with_val(self.im.prec(), -&self.im) }
    }

    pub fn norm_sqr(&self) -> Real {
        let mut n = Float::with_val(self.prec(), &self.re * &self.re);
        n += &self.im * &self.im;
        n
    }

    pub fn abs(&self) -> Real {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn scale(&self, r: &Real) -> Cplx {
        let p = self.prec();
        Cplx { re: Float::with_val(p, &self.re * r), im: Float::with_val(p, &self.im * r) }
    }

    pub fn scale_f64(&self, r: f64) -> Cplx {
        let p = self.prec();
        Cplx { re: Float::with_val(p, &self.re * r), im: Float::with_val(p, &self.im * r) }
    }

    /// `self += a * b`.
    pub fn mul_add_assign(&mut self, a: &Cplx, b: &Cplx) {
        self.re += &a.re * &b.re;
        self.re -= &a.im * &b.im;
        self.im += &a.re * &b.im;
        self.im += &a.im * &b.re;
    }

    pub fn recip(&self) -> Cplx {
        let n = self.norm_sqr();
        let p = self.prec();
        Cplx {
            re: Float::with_val(p, &self.re / &n),
            im: Float::with_val(p, -Float::with_val(p, &self.im / &n)),
        }
    }

    pub fn exp(&self) -> Cplx {
        let p = self.prec();
        let m = Float::with_val(p, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        Cplx { re: Float::with_val(p, &m * &c), im: Float::with_val(p, &m * &s) }
    }

    /// `e^{2 pi i x}` for real `x`.
    pub fn exp_2pii(x: &Real) -> Cplx {
        let p = x.prec();
        let arg = Float::with_val(p, Constant::Pi) * Float::with_val(p, x * 2u32);
        let (s, c) = arg.sin_cos(Float::new(p));
        Cplx { re: c, im: s }
    }

    pub fn powi(&self, n: i64) -> Cplx {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut acc = Cplx::one(self.prec());
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Cplx {
        let p = self.prec();
        let r = self.abs();
        let mut re = Float::with_val(p, &r + &self.re);
        re /= 2u32;
        let re = re.sqrt();
        let mut im = Float::with_val(p, &r - &self.re);
        im /= 2u32;
        let mut im = im.sqrt();
        if self.im.is_sign_negative() {
            im = -im;
        }
        Cplx { re, im }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Cplx {
        let p = self.prec();
        let re = self.abs().ln();
        let im = Float::with_val(p, self.im.atan2_ref(&self.re));
        Cplx { re, im }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> $tr<&'a Cplx> for &'a Cplx {
            type Output = Cplx;
            fn $m(self, o: &'a Cplx) -> Cplx {
                let f: fn(&Cplx, &Cplx) -> Cplx = $body;
                f(self, o)
            }
        }
        impl $tr<Cplx> for Cplx {
            type Output = Cplx;
            fn $m(self, o: Cplx) -> Cplx {
                let f: fn(&Cplx, &Cplx) -> Cplx = $body;
                f(&self, &o)
            }
        }
    };
}

binop!(Add, add, |a, b| {
    let p = a.prec().max(b.prec());
    Cplx { re: Float::with_val(p, &a.re + &b.re), im: Float::with_val(p, &a.im + &b.im) }
});
binop!(Sub, sub, |a, b| {
    let p = a.prec().max(b.prec());
    Cplx { re: Float::with_val(p, &a.re - &b.re), im: Float::with_val(p, &a.im - &b.im) }
});
binop!(Mul, mul, |a, b| {
    let p = a.prec().max(b.prec());
    let mut re = Float::with_val(p, &a.re * &b.re);
    re -= &a.im * &b.im;
    let mut im = Float::with_val(p, &a.re * &b.im);
    im += &a.im * &b.re;
    Cplx { re, im }
});
binop!(Div, div, |a, b| a * &b.recip());

impl Neg for &Cplx {
    type Output = Cplx;
    fn neg(self) -> Cplx {
        Cplx { re: Float::with_val(self.re.prec(), -&self.re), im: Float::with_val(self.im.prec(), -&self.im) }
    }
}

impl Neg for Cplx {
    type Output = Cplx;
    fn neg(self) -> Cplx {
        Cplx { re: -self.re, im: -self.im }
    }
}

impl AddAssign<&Cplx> for Cplx {
    fn add_assign(&mut self, o: &Cplx) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&Cplx> for Cplx {
    fn sub_assign(&mut self, o: &Cplx) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&Cplx> for Cplx {
    fn mul_assign(&mut self, o: &Cplx) {
        *self = &*self * o;
    }
}

/// Coefficient ring for one-variable truncated series.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync {
    fn zero(prec: u32) -> Self;
    fn from_i64(x: i64, prec: u32) -> Self;
    fn from_real(x: Real) -> Self;
    fn prec(&self) -> u32;
    fn is_zero(&self) -> bool;
    fn magnitude(&self) -> Real;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn over(&self, o: &Self) -> Self;
    fn scaled(&self, r: &Real) -> Self;
    fn mul_add_assign(&mut self, a: &Self, b: &Self);
    fn add_assign_ref(&mut self, o: &Self);
}

impl Scalar for Real {
    fn zero(prec: u32) -> Self {
        Float::new(prec)
    }
    fn from_i64(x: i64, prec: u32) -> Self {
        Float::with_val(prec, x)
    }
    fn from_real(x: Real) -> Self {
        x
    }
    fn prec(&self) -> u32 {
        Float::prec(self)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn magnitude(&self) -> Real {
        Float::with_val(Float::prec(self), self.abs_ref())
    }
    fn plus(&self, o: &Self) -> Self {
        Float::with_val(Float::prec(self).max(Float::prec(o)), self + o)
    }
    fn minus(&self, o: &Self) -> Self {
        Float::with_val(Float::prec(self).max(Float::prec(o)), self - o)
    }
    fn times(&self, o: &Self) -> Self {
        Float::with_val(Float::prec(self).max(Float::prec(o)), self * o)
    }
    fn over(&self, o: &Self) -> Self {
        Float::with_val(Float::prec(self).max(Float::prec(o)), self / o)
    }
    fn scaled(&self, r: &Real) -> Self {
        Float::with_val(Float::prec(self), self * r)
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn add_assign_ref(&mut self, o: &Self) {
        *self += o;
    }
}

impl Scalar for Cplx {
    fn zero(prec: u32) -> Self {
        Cplx::zero(prec)
    }
    fn from_i64(x: i64, prec: u32) -> Self {
        Cplx::from_real(Float::with_val(prec, x))
    }
    fn from_real(x: Real) -> Self {
        Cplx::from_real(x)
    }
    fn prec(&self) -> u32 {
        Cplx::prec(self)
    }
    fn is_zero(&self) -> bool {
        Cplx::is_zero(self)
    }
    fn magnitude(&self) -> Real {
        self.abs()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn scaled(&self, r: &Real) -> Self {
        self.scale(r)
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        Cplx::mul_add_assign(self, a, b)
    }
    fn add_assign_ref(&mut self, o: &Self) {
        *self += o;
    }
}

/// `x^n` for a real and a machine integer exponent.
pub fn real_powi(x: &Real, n: i32) -> Real {
    Float::with_val(x.prec(), x.pow(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_floor() {
        assert!(Precision::new(63).is_err());
        let p = Precision::new(64).unwrap();
        assert_eq!(p.tolerance(), 2f64.powi(-32));
    }

    #[test]
    fn decimal_round_trip() {
        let p = Precision::default();
        let x = Float::with_val(p.bits(), 2u32).sqrt();
        let s = format_real(&x);
        assert_eq!(parse_real(&s, p.bits()).unwrap(), x);
    }

    #[test]
    fn complex_field_ops() {
        let p = 256;
        let a = Cplx::from_f64(1.5, -2.0, p);
        let b = Cplx::from_f64(0.25, 3.0, p);
        let q = &(&a * &b) / &b;
        assert!((&q - &a).abs_f64() < 1e-70);
        let e = Cplx::exp_2pii(&Float::with_val(p, 0.25));
        assert!((&e - &Cplx::i(p)).abs_f64() < 1e-70);
        let s = b.sqrt();
        assert!((&(&s * &s) - &b).abs_f64() < 1e-70);
        let l = a.ln().exp();
        assert!((&l - &a).abs_f64() < 1e-70);
        assert!((&a.powi(-3) * &a.powi(3) - Cplx::one(p)).abs_f64() < 1e-70);
    }
}
