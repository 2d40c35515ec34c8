//! Reduction of `g` along its extremal slope `rho = N / M = sup (p - q) / (p + q)`.
//!
//! Monomials `z^p zbar^q` of slope exactly `rho` are the powers `Z^k` of
//! `Z = r^M e^{2 pi i N t}`, `(p_k, q_k) = (k (M + N) / 2, k (M - N) / 2)`. They are closed
//! under composition with `F`, which acts on them as the one-variable germ
//! `F0(Z) = mu Z e^{2 pi i N g0(Z)}`, `mu = |lambda|^M e^{2 pi i N omega}`.

use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::FoliationMap;
use crate::normalizer::Normalization;
use crate::precision::{format_real, tolerance_for, Cplx};
use crate::series::{BiSeries, SeriesJson, UniSeries};

/// Nonnegative rational `num / den` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Slope {
    pub num: u64,
    pub den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Slope {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Slope { num: num / g, den: den / g }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn gt(&self, o: &Slope) -> bool {
        self.num * o.den > o.num * self.den
    }

    /// `(p_k, q_k)` when both are integers.
    pub fn ladder(&self, k: u64) -> Option<(usize, usize)> {
        let (s, d) = (k * (self.den + self.num), k * (self.den - self.num));
        (s % 2 == 0).then_some(((s / 2) as usize, (d / 2) as usize))
    }
}

/// Largest slope among monomials of `g` with total degree at most `max_degree`.
fn slope_up_to(g: &BiSeries, max_degree: usize, tol: f64) -> Option<Slope> {
    let mut best: Option<Slope> = None;
    for (p, q, c) in g.terms() {
        if p + q == 0 || p + q > max_degree || p < q || c.abs_f64() <= tol {
            continue;
        }
        let s = Slope::new((p - q) as u64, (p + q) as u64);
        if best.is_none_or(|b| s.gt(&b)) {
            best = Some(s);
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct SlopeReduction {
    pub rho_slope: Slope,
    /// `(p_1, q_1)` when `Z` is itself a monomial.
    pub z_exponents: Option<(usize, usize)>,
    /// `Z`-series of the ladder coefficients `g_{p_k q_k}`.
    pub g0: UniSeries,
    pub f0: UniSeries,
    pub multiplier: Cplx,
    /// The slope is the same at every truncation order in `window`.
    pub attained: bool,
    pub window: (usize, usize),
    pub window_slopes: Vec<Option<Slope>>,
    pub order: usize,
}

/// Slope, ladder and reduced germ of `map.g` through total degree `order`.
pub fn slope_reduction(map: &FoliationMap, order: usize) -> Result<SlopeReduction> {
    let prec = map.prec();
    let g = map.g.with_order(order);
    let tol = tolerance_for(prec);
    let rho = slope_up_to(&g, order, tol).ok_or_else(|| Error::Diagnostics("g vanishes: no slope to reduce".into()))?;
    let window = ((order / 2).max(1), order);
    let window_slopes: Vec<Option<Slope>> = (window.0..=window.1).map(|l| slope_up_to(&g, l, tol)).collect();
    let attained = window_slopes.iter().all(|s| *s == Some(rho));
    let m = rho.den as usize;
    let z_order = order / m;
    let mut g0 = UniSeries::zero(z_order, prec);
    for k in 1..=z_order {
        if let Some((p, q)) = rho.ladder(k as u64) {
            g0.set(k, g.coeff(p, q));
        }
    }
    let omega_n = Float::with_val(prec, &map.multiplier.omega_value * rho.num);
    let multiplier = Cplx::exp_2pii(&omega_n).scale(&Float::with_val(prec, (&map.multiplier.modulus).pow(rho.den as u32)));
    let n = Float::with_val(prec, rho.num);
    let f0 = g0.scale(&n).exp_2pii()?.shift_up(1).scale_by(&multiplier);
    Ok(SlopeReduction {
        rho_slope: rho,
        z_exponents: rho.ladder(1),
        g0,
        f0,
        multiplier,
        attained,
        window,
        window_slopes,
        order,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Consistency {
    /// Max coefficient of `g0 + phi0 o F0 - phi0`.
    pub residual: f64,
    pub z_order: usize,
    /// Ladder steps without integral `(p_k, q_k)`.
    pub skipped: Vec<usize>,
}

/// Checks that the ladder coefficients of `norm.phi` linearize `F0`.
pub fn reduction_consistency(red: &SlopeReduction, norm: &Normalization) -> Result<Consistency> {
    if !red.attained {
        return Err(Error::Diagnostics("slope is not attained across the truncation window".into()));
    }
    if red.rho_slope.num == 0 {
        return Err(Error::Diagnostics("slope 0: g is radial along the ladder".into()));
    }
    let m = red.rho_slope.den as usize;
    let z_order = red.order.min(norm.order) / m;
    let prec = red.g0.prec();
    let mut phi0 = UniSeries::zero(z_order, prec);
    let mut skipped = Vec::new();
    for k in 1..=z_order {
        match red.rho_slope.ladder(k as u64) {
            Some((p, q)) => phi0.set(k, norm.phi.coeff(p, q)),
            None => skipped.push(k),
        }
    }
    let g0 = red.g0.with_order(z_order);
    let f0 = red.f0.with_order(z_order);
    let res = g0.add(&phi0.compose(&f0)?)?.sub(&phi0)?;
    Ok(Consistency { residual: res.max_abs(), z_order, skipped })
}

#[derive(Serialize)]
struct SlopeJson<'a> {
    rho_slope: Slope,
    rho: f64,
    z_exponents: Option<(usize, usize)>,
    g0: SeriesJson,
    f0: SeriesJson,
    multiplier: [String; 2],
    attained: bool,
    window: (usize, usize),
    window_slopes: &'a [Option<Slope>],
    order: usize,
}

impl SlopeReduction {
    pub fn to_json(&self) -> serde_json::Value {
        let doc = SlopeJson {
            rho_slope: self.rho_slope,
            rho: self.rho_slope.value(),
            z_exponents: self.z_exponents,
            g0: SeriesJson::from_uni(&self.g0),
            f0: SeriesJson::from_uni(&self.f0),
            multiplier: [format_real(&self.multiplier.re), format_real(&self.multiplier.im)],
            attained: self.attained,
            window: self.window,
            window_slopes: &self.window_slopes,
            order: self.order,
        };
        serde_json::to_value(doc).expect("slope reduction json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{Family, Multiplier, OmegaSpec};
    use crate::normalizer::{solve_homological, Gauge};
    use crate::series::RadialSeries;

    const P: u32 = 256;

    fn family(fam: Family, order: usize) -> FoliationMap {
        let m = Multiplier::new(OmegaSpec::Golden, 1.0, P).unwrap();
        FoliationMap::family(fam, m, Float::with_val(P, -1), 1, order).unwrap()
    }

    #[test]
    fn slope_arithmetic() {
        assert_eq!(Slope::new(2, 6), Slope { num: 1, den: 3 });
        assert_eq!(Slope::new(1, 3).ladder(2), Some((4, 2)));
        assert_eq!(Slope::new(1, 2).ladder(1), None);
        assert_eq!(Slope::new(1, 2).ladder(2), Some((3, 1)));
    }

    #[test]
    fn single_ladder_monomial_closed_form() {
        // g = Re(c z^2 zbar) with F0 = mu Z e^{2 pi i c Z / 2}; phi0_1 (mu - 1) = -c/2
        let mult = Multiplier::new(OmegaSpec::Golden, 1.0, P).unwrap();
        let c = Cplx::from_f64(0.3, -0.2, P);
        let half = Float::with_val(P, 0.5);
        let g = BiSeries::from_terms(vec![(2, 1, c.scale(&half)), (1, 2, c.conj().scale(&half))], 9, P);
        let map = FoliationMap::custom(mult, RadialSeries::zero(4, P), g).unwrap();
        let red = slope_reduction(&map, 9).unwrap();
        assert!(red.attained);
        let norm = solve_homological(&map, 9, Gauge::Basic).unwrap();
        let one = Cplx::one(P);
        let expect = &(-&c.scale(&half)) * &(&red.multiplier - &one).recip();
        assert!((&norm.phi.coeff(2, 1) - &expect).abs_f64() < 1e-60);
        let cons = reduction_consistency(&red, &norm).unwrap();
        assert_eq!(cons.z_order, 3);
        assert!(cons.residual < 1e-60, "{}", cons.residual);
    }

    #[test]
    fn zero_g_is_an_error() {
        let mult = Multiplier::new(OmegaSpec::Golden, 1.0, P).unwrap();
        let map = FoliationMap::custom(mult, RadialSeries::zero(4, P), BiSeries::zero(8, P)).unwrap();
        assert!(slope_reduction(&map, 8).is_err());
    }

    #[test]
    fn family_c_never_stabilizes() {
        let red = slope_reduction(&family(Family::C, 12), 12).unwrap();
        assert!(!red.attained);
        assert_eq!(red.rho_slope, Slope::new(10, 12));
        let norm = solve_homological(&family(Family::C, 12), 12, Gauge::Basic).unwrap();
        assert!(reduction_consistency(&red, &norm).is_err());
    }
}
