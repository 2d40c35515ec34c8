//! One-variable truncated power series.
//!
//! `RadialSeries` (real coefficients) carries functions of `u = |z|^2` or of the
//! symplectic radius `t`; `UniSeries` (complex coefficients) carries
//! holomorphic parts and the reduced germs of the slope reduction.

use rug::Float;

use crate::error::{Error, Result};
use crate::precision::{Cplx, Real, Scalar};

/// Series `sum_{i <= order} c_i x^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series1<S> {
    order: usize,
    prec: u32,
    coeffs: Vec<S>,
}

pub type RadialSeries = Series1<Real>;
pub type UniSeries = Series1<Cplx>;

impl<S: Scalar> Series1<S> {
    pub fn zero(order: usize, prec: u32) -> Self {
        Series1 { order, prec, coeffs: vec![S::zero(prec); order + 1] }
    }

    pub fn one(order: usize, prec: u32) -> Self {
        let mut s = Self::zero(order, prec);
        s.coeffs[0] = S::from_i64(1, prec);
        s
    }

    /// The variable `x` itself.
    pub fn x(order: usize, prec: u32) -> Self {
        Self::monomial(1, S::from_i64(1, prec), order, prec)
    }

    pub fn monomial(power: usize, c: S, order: usize, prec: u32) -> Self {
        let mut s = Self::zero(order, prec);
        if power <= order {
            s.coeffs[power] = c;
        }
        s
    }

    /// Builds from coefficients `c_0, c_1, ...`, padding or truncating to `order`.
    pub fn from_coeffs(mut coeffs: Vec<S>, order: usize, prec: u32) -> Self {
        coeffs.truncate(order + 1);
        while coeffs.len() < order + 1 {
            coeffs.push(S::zero(prec));
        }
        Series1 { order, prec, coeffs }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Coefficient of `x^i`; beyond the truncation order this is zero.
    pub fn coeff(&self, i: usize) -> S {
        self.coeffs.get(i).cloned().unwrap_or_else(|| S::zero(self.prec))
    }

    pub fn coeff_ref(&self, i: usize) -> &S {
        &self.coeffs[i]
    }

    pub fn set(&mut self, i: usize, c: S) {
        if i <= self.order {
            self.coeffs[i] = c;
        }
    }

    /// Same series re-truncated (or zero-padded) at a new order.
    pub fn with_order(&self, order: usize) -> Self {
        Self::from_coeffs(self.coeffs.clone(), order, self.prec)
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.order != o.order {
            return Err(Error::OrderMismatch { left: self.order, right: o.order });
        }
        if self.prec != o.prec {
            return Err(Error::PrecisionMismatch { left: self.prec, right: o.prec });
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.plus(b)).collect();
        Ok(Series1 { order: self.order, prec: self.prec, coeffs })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.minus(b)).collect();
        Ok(Series1 { order: self.order, prec: self.prec, coeffs })
    }

    pub fn neg(&self) -> Self {
        let m1 = Float::with_val(self.prec, -1);
        self.scale(&m1)
    }

    pub fn scale(&self, r: &Real) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.scaled(r)).collect();
        Series1 { order: self.order, prec: self.prec, coeffs }
    }

    pub fn scale_by(&self, c: &S) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x.times(c)).collect();
        Series1 { order: self.order, prec: self.prec, coeffs }
    }

    /// Truncated product.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = Self::zero(self.order, self.prec);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(self.order + 1 - i).enumerate() {
                if b.is_zero() {
                    continue;
                }
                out.coeffs[i + j].mul_add_assign(a, b);
            }
        }
        Ok(out)
    }

    /// Multiplies by `x^k`, dropping terms beyond the order.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut out = Self::zero(self.order, self.prec);
        for i in 0..=self.order {
            if i + k <= self.order {
                out.coeffs[i + k] = self.coeffs[i].clone();
            }
        }
        out
    }

    /// Divides by `x^k`; the first `k` coefficients must vanish. The order drops by `k`.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if k > self.order {
            return Ok(Self::zero(0, self.prec));
        }
        if self.coeffs[..k].iter().any(|c| !c.is_zero()) {
            return Err(Error::Transform(format!("series has valuation below {k}")));
        }
        Ok(Self::from_coeffs(self.coeffs[k..].to_vec(), self.order - k, self.prec))
    }

    /// Index of the first coefficient with magnitude above `tol`.
    pub fn valuation(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().position(|c| c.magnitude().to_f64() > tol)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude().to_f64()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Zeroes every coefficient whose index exceeds `degree`.
    pub fn jet(&self, degree: usize) -> Self {
        let mut out = self.clone();
        for i in (degree + 1)..=self.order {
            out.coeffs[i] = S::zero(self.prec);
        }
        out
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(self.order, self.prec);
        for i in 1..=self.order {
            let k = Float::with_val(self.prec, i as u64);
            out.coeffs[i - 1] = self.coeffs[i].scaled(&k);
        }
        out
    }

    /// `self(inner(x))`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check(inner)?;
        if !inner.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstant { context: "compose inner series" });
        }
        let mut acc = Self::zero(self.order, self.prec);
        for i in (0..=self.order).rev() {
            acc = acc.mul(inner)?;
            acc.coeffs[0].add_assign_ref(&self.coeffs[i]);
        }
        Ok(acc)
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::Transform("reciprocal of a series with zero constant term".into()));
        }
        let mut out = Self::zero(self.order, self.prec);
        let inv0 = S::from_i64(1, self.prec).over(&self.coeffs[0]);
        out.coeffs[0] = inv0.clone();
        for n in 1..=self.order {
            let mut acc = S::zero(self.prec);
            for k in 1..=n {
                acc.mul_add_assign(&self.coeffs[k], &out.coeffs[n - k]);
            }
            let m1 = Float::with_val(self.prec, -1);
            out.coeffs[n] = acc.times(&inv0).scaled(&m1);
        }
        Ok(out)
    }

    /// `self / d` where both may have positive valuation; the quotient order drops
    /// by the valuation of `d`.
    pub fn divide(&self, d: &Self) -> Result<Self> {
        self.check(d)?;
        let v = d
            .coeffs
            .iter()
            .position(|c| !c.is_zero())
            .ok_or_else(|| Error::Transform("division by the zero series".into()))?;
        let num = self.shift_down(v)?;
        let den = d.shift_down(v)?;
        num.mul(&den.reciprocal()?)
    }

    /// `self^alpha` for a series with constant term exactly one (J.C.P. Miller recurrence).
    pub fn powf(&self, alpha: &Real) -> Result<Self> {
        let one = S::from_i64(1, self.prec);
        if self.coeffs[0] != one {
            return Err(Error::Transform("real power requires constant term 1".into()));
        }
        let mut out = Self::zero(self.order, self.prec);
        out.coeffs[0] = one;
        for n in 1..=self.order {
            let mut acc = S::zero(self.prec);
            for k in 1..=n {
                // ((alpha + 1) k - n) x_k y_{n-k}
                let w = Float::with_val(self.prec, alpha + 1u32) * (k as u64) - (n as u64);
                let term = self.coeffs[k].times(&out.coeffs[n - k]).scaled(&w);
                acc.add_assign_ref(&term);
            }
            let inv_n = Float::with_val(self.prec, 1) / (n as u64);
            out.coeffs[n] = acc.scaled(&inv_n);
        }
        Ok(out)
    }

    /// `exp(self)` for a series with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstant { context: "exponential" });
        }
        let mut out = Self::zero(self.order, self.prec);
        out.coeffs[0] = S::from_i64(1, self.prec);
        let weighted: Vec<S> = (0..=self.order)
            .map(|k| self.coeffs[k].scaled(&Float::with_val(self.prec, k as u64)))
            .collect();
        for n in 1..=self.order {
            let mut acc = S::zero(self.prec);
            for k in 1..=n {
                acc.mul_add_assign(&weighted[k], &out.coeffs[n - k]);
            }
            out.coeffs[n] = acc.scaled(&(Float::with_val(self.prec, 1) / (n as u64)));
        }
        Ok(out)
    }

    /// `log(self)` for a series with constant term one.
    pub fn ln(&self) -> Result<Self> {
        let one = S::from_i64(1, self.prec);
        if self.coeffs[0] != one {
            return Err(Error::Transform("logarithm requires constant term 1".into()));
        }
        // (log s)' = s' / s
        let q = self.derivative().mul(&self.reciprocal()?)?;
        let mut out = Self::zero(self.order, self.prec);
        for n in 1..=self.order {
            out.coeffs[n] = q.coeffs[n - 1].scaled(&(Float::with_val(self.prec, 1) / (n as u64)));
        }
        Ok(out)
    }

    /// Compositional inverse of a series `x + O(x^2)`.
    pub fn reversion(&self) -> Result<Self> {
        let one = S::from_i64(1, self.prec);
        if !self.coeffs[0].is_zero() || self.order == 0 || self.coeffs[1] != one {
            return Err(Error::Transform("reversion requires a series x + O(x^2)".into()));
        }
        let x = Self::x(self.order, self.prec);
        // Fixed point v = x - (K(v) - v): each sweep fixes one more coefficient.
        let nonlinear = self.sub(&x)?;
        let mut v = x.clone();
        for _ in 0..self.order {
            v = x.sub(&nonlinear.compose(&v)?)?;
        }
        Ok(v)
    }

    pub fn eval(&self, x: &S) -> S {
        let mut acc = S::zero(self.prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.times(x);
            acc.add_assign_ref(c);
        }
        acc
    }
}

impl RadialSeries {
    /// Values `[c_0, c_1, ...]` as doubles.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64()).collect()
    }

    pub fn from_f64(values: &[f64], order: usize, prec: u32) -> Self {
        let coeffs = values.iter().map(|v| Float::with_val(prec, *v)).collect();
        Self::from_coeffs(coeffs, order, prec)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    pub fn to_complex(&self) -> UniSeries {
        let coeffs = self.coeffs.iter().map(|c| Cplx::from_real(c.clone())).collect();
        UniSeries::from_coeffs(coeffs, self.order, self.prec)
    }

    /// Given `a` with zero constant term, returns `rho` such that the map
    /// `u -> u (1 + a(u))^2` composed with `u -> u (1 + rho(u))` is the identity.
    pub fn radial_reversion(&self) -> Result<RadialSeries> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstant { context: "radial_reversion" });
        }
        let one = RadialSeries::one(self.order + 1, self.prec);
        let a = self.with_order(self.order + 1);
        let one_plus_a = one.add(&a)?;
        let sq = one_plus_a.mul(&one_plus_a)?;
        let forward = sq.shift_up(1);
        let inv = forward.reversion()?;
        // inv = u (1 + rho(u)), so rho = inv / u - 1
        let mut rho = inv.shift_down(1)?;
        rho.coeffs[0] -= 1u32;
        Ok(rho.with_order(self.order))
    }
}

impl UniSeries {
    /// Real parts, discarding the imaginary residue. Returns the series and the residue.
    pub fn real_part(&self) -> (RadialSeries, f64) {
        let residue = self.coeffs.iter().map(|c| c.im.to_f64().abs()).fold(0.0, f64::max);
        let coeffs = self.coeffs.iter().map(|c| c.re.clone()).collect();
        (RadialSeries::from_coeffs(coeffs, self.order, self.prec), residue)
    }

    /// `exp(2 pi i self)`.
    pub fn exp_2pii(&self) -> Result<Self> {
        let two_pi_i = Cplx::new(Float::new(self.prec), crate::precision::Precision::new(self.prec)?.pi() * 2u32);
        self.scale_by(&two_pi_i).exp()
    }

    pub fn eval_c64(&self, x: num_complex::Complex64) -> num_complex::Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(num_complex::Complex64::new(0.0, 0.0), |acc, c| acc * x + c.to_c64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn r(x: f64) -> Real {
        Float::with_val(P, x)
    }

    #[test]
    fn reciprocal_and_divide() {
        let s = RadialSeries::from_f64(&[1.0, 2.0, -1.0, 0.5], 6, P);
        let prod = s.mul(&s.reciprocal().unwrap()).unwrap();
        assert!((prod.coeff(0) - r(1.0)).abs() < 1e-70);
        for i in 1..=6 {
            assert!(prod.coeff(i).abs() < 1e-70);
        }
        let num = RadialSeries::from_f64(&[0.0, 0.0, 3.0, 1.0], 6, P);
        let den = RadialSeries::from_f64(&[0.0, 0.0, -2.0, 1.0], 6, P);
        let q = num.divide(&den).unwrap();
        assert_eq!(q.order(), 4);
        assert!((q.coeff(0) + r(1.5)).abs() < 1e-70);
    }

    #[test]
    fn powf_matches_square_root() {
        let s = RadialSeries::from_f64(&[1.0, -2.0, 1.0], 8, P);
        // (1 - x)^2 -> sqrt = 1 - x
        let h = s.powf(&r(0.5)).unwrap();
        assert!((h.coeff(1) + r(1.0)).abs() < 1e-70);
        for i in 2..=8 {
            assert!(h.coeff(i).abs() < 1e-70, "coeff {i}");
        }
    }

    #[test]
    fn exp_ln_inverse() {
        let s = RadialSeries::from_f64(&[0.0, 0.3, -0.2, 0.7], 10, P);
        let back = s.exp().unwrap().ln().unwrap();
        assert!(back.sub(&s).unwrap().max_abs() < 1e-70);
    }

    #[test]
    fn reversion_round_trip() {
        let s = RadialSeries::from_f64(&[0.0, 1.0, 0.5, -0.25, 2.0], 9, P);
        let inv = s.reversion().unwrap();
        let id = s.compose(&inv).unwrap();
        assert!(id.sub(&RadialSeries::x(9, P)).unwrap().max_abs() < 1e-60);
    }

    #[test]
    fn radial_reversion_trivial_and_linear() {
        let zero = RadialSeries::zero(8, P);
        assert!(zero.radial_reversion().unwrap().is_zero());
        // a = u: |H|^2 = u (1 + u)^2; back-substitution residual
        let a = RadialSeries::x(8, P);
        let rho = a.radial_reversion().unwrap();
        let one = RadialSeries::one(8, P);
        let v = one.add(&rho).unwrap().shift_up(1);
        let opa = one.add(&a).unwrap();
        let k = opa.mul(&opa).unwrap().shift_up(1);
        let id = k.compose(&v).unwrap();
        assert!(id.sub(&RadialSeries::x(8, P)).unwrap().max_abs() < 1e-60);
    }

    #[test]
    fn order_mismatch_is_an_error() {
        let a = RadialSeries::zero(3, P);
        let b = RadialSeries::zero(4, P);
        assert!(matches!(a.add(&b), Err(Error::OrderMismatch { .. })));
        let c = RadialSeries::zero(3, 128);
        assert!(matches!(a.mul(&c), Err(Error::PrecisionMismatch { .. })));
    }
}
