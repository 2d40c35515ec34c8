//! Gauge maps `H(z) = z (1 + a(|z|^2)) e^{2 pi i b(|z|^2)}` and the normal forms they produce.

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::precision::{Cplx, Real};
use crate::series::{BiSeries, RadialSeries, UniSeries};

/// Resonant gauge `H(z) = z (1 + a(|z|^2)) e^{2 pi i b(|z|^2)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeMap {
    pub a: RadialSeries,
    pub b: RadialSeries,
}

impl GaugeMap {
    pub fn new(a: RadialSeries, b: RadialSeries) -> Result<Self> {
        if !a.coeff(0).is_zero() || !b.coeff(0).is_zero() {
            return Err(Error::NonzeroConstant { context: "gauge map" });
        }
        Ok(GaugeMap { a, b })
    }

    pub fn identity(order: usize, prec: u32) -> Self {
        GaugeMap { a: RadialSeries::zero(order, prec), b: RadialSeries::zero(order, prec) }
    }

    /// `H` as a series in `(z, zbar)` through total degree `order`.
    pub fn as_series(&self, order: usize) -> Result<BiSeries> {
        let prec = self.a.prec();
        let radial = BiSeries::from_radial(&self.a, order).add(&BiSeries::one(order, prec))?;
        BiSeries::z(order, prec).mul(&radial)?.mul(&BiSeries::from_radial(&self.b, order).exp_2pii()?)
    }
}

/// `N(z) = lambda z (1 + alpha(|z|^2)) e^{2 pi i beta(|z|^2)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormPair {
    pub alpha: RadialSeries,
    pub beta: RadialSeries,
    pub lambda: Cplx,
}

impl NormalFormPair {
    /// The normal form as a series in `(z, zbar)`.
    pub fn as_series(&self, order: usize) -> Result<BiSeries> {
        crate::normalizer::normal_form_series(&self.lambda, &self.alpha, &self.beta, order)
    }

    /// `h` with `1 + h(u) = (1 + alpha(u)) e^{2 pi i beta(u)}`.
    pub fn complex_factor(&self) -> Result<UniSeries> {
        let one = UniSeries::one(self.alpha.order(), self.alpha.prec());
        let rot = self.beta.to_complex().exp_2pii()?;
        let h = one.add(&self.alpha.to_complex())?.mul(&rot)?;
        h.sub(&one)
    }
}

/// `(alpha, beta)` of `H o N* o H^{-1}` for the special normal form with torsion `nstar`:
///
/// `1 + alpha(u) = (1 + f(v)) (1 + a(W)) / (1 + a(v))`, `beta(u) = n*(v) + b(W) - b(v)`,
/// where `v = |H^{-1}|^2` and `W = |F o H^{-1}|^2 = |lambda|^2 v (1 + f(v))^2`.
pub fn apply_gauge(
    nstar: &RadialSeries,
    f: &RadialSeries,
    h: &GaugeMap,
    lambda: &Cplx,
    order: usize,
) -> Result<NormalFormPair> {
    let prec = nstar.prec();
    let nstar = nstar.with_order(order);
    let f = f.with_order(order);
    let a = h.a.with_order(order);
    let b = h.b.with_order(order);
    let one = RadialSeries::one(order, prec);
    let rho = a.radial_reversion()?;
    let v = one.add(&rho)?.shift_up(1);
    let f_v = f.compose(&v)?;
    let one_f_v = one.add(&f_v)?;
    let w = v.mul(&one_f_v)?.mul(&one_f_v)?.scale(&lambda.norm_sqr());
    let ratio = one.add(&a.compose(&w)?)?.mul(&one.add(&a.compose(&v)?)?.reciprocal()?)?;
    let alpha = one_f_v.mul(&ratio)?.sub(&one)?;
    let beta = nstar.compose(&v)?.add(&b.compose(&w)?)?.sub(&b.compose(&v)?)?;
    Ok(NormalFormPair { alpha, beta, lambda: lambda.clone() })
}

/// Result of [`monomialize_conservative`].
#[derive(Clone, Debug)]
pub struct Monomialized {
    /// `a*` with `n*(u) = n_p u^p (1 + a*(u))^{2p}`.
    pub astar: RadialSeries,
    pub p: usize,
    pub n_p: Real,
    /// `beta` obtained by applying the gauge `(a*, 0)`; equals `n_p u^p`.
    pub beta: RadialSeries,
    /// `max |beta - n_p u^p|`.
    pub residual: f64,
}

/// Chooses `a*` so that the conservative normal form has torsion `n_p |z|^{2p}`.
pub fn monomialize_conservative(nstar: &RadialSeries, lambda: &Cplx) -> Result<Monomialized> {
    let prec = nstar.prec();
    let p = nstar
        .valuation(0.0)
        .ok_or_else(|| Error::Transform("torsion vanishes identically: nothing to monomialize".into()))?;
    if p == 0 {
        return Err(Error::NonzeroConstant { context: "torsion series" });
    }
    let n_p = nstar.coeff(p);
    let mut quotient = nstar.shift_down(p)?.scale(&(Float::with_val(prec, 1u32) / &n_p));
    quotient.set(0, Float::with_val(prec, 1u32));
    let exponent = Float::with_val(prec, 1u32) / (2 * p as u64);
    let mut astar = quotient.powf(&exponent)?;
    astar.set(0, Float::new(prec));
    let order = astar.order();
    let h = GaugeMap::new(astar.clone(), RadialSeries::zero(order, prec))?;
    let pair = apply_gauge(nstar, &RadialSeries::zero(order, prec), &h, lambda, order)?;
    let target = RadialSeries::monomial(p, n_p.clone(), order, prec);
    let residual = pair.beta.sub(&target)?.max_abs();
    Ok(Monomialized { astar, p, n_p, beta: pair.beta, residual })
}

/// First coefficient above `tol`: `(index, value)`.
pub fn leading_term(s: &RadialSeries, tol: f64) -> Option<(usize, f64)> {
    s.valuation(tol).map(|k| (k, s.coeff(k).to_f64()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantVerdict {
    Match,
    Mismatch,
    Indeterminate,
}

/// Comparison of the first non-vanishing radial coefficients of two normal forms.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub alpha_first: [Option<(usize, f64)>; 2],
    pub beta_first: [Option<(usize, f64)>; 2],
    pub verdict: InvariantVerdict,
    /// Max difference of the first coefficients when the indices agree.
    pub difference: f64,
}

pub fn first_nonvanishing_invariant(n1: &NormalFormPair, n2: &NormalFormPair, tol: f64) -> Result<InvariantReport> {
    if (&n1.lambda - &n2.lambda).abs_f64() > tol {
        return Err(Error::Transform("normal forms have different multipliers".into()));
    }
    let a1 = n1.alpha.valuation(tol);
    let a2 = n2.alpha.valuation(tol);
    let (verdict, difference) = match (a1, a2) {
        (None, None) => (InvariantVerdict::Indeterminate, 0.0),
        (Some(k1), Some(k2)) if k1 == k2 => {
            let diff = Float::with_val(n1.alpha.prec(), n1.alpha.coeff(k1) - n2.alpha.coeff(k2)).abs().to_f64();
            (if diff <= tol { InvariantVerdict::Match } else { InvariantVerdict::Mismatch }, diff)
        }
        _ => (InvariantVerdict::Mismatch, f64::INFINITY),
    };
    Ok(InvariantReport {
        alpha_first: [leading_term(&n1.alpha, tol), leading_term(&n2.alpha, tol)],
        beta_first: [leading_term(&n1.beta, tol), leading_term(&n2.beta, tol)],
        verdict,
        difference,
    })
}
