//! Foliation-preserving maps `F(z) = lambda z (1 + f(|z|^2)) e^{2 pi i g(z)}`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::{format_real, parse_real, Cplx, Precision, Real};
use crate::series::{BiSeries, RadialSeries, SeriesJson};

/// Heuristic radius inside which truncated custom series are trusted.
pub const DEFAULT_VALIDITY_RADIUS: f64 = 0.1;

/// The ways a rotation number can be given.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OmegaSpec {
    /// Decimal literal.
    Literal { value: String },
    /// `(sqrt 5 - 1) / 2`.
    Golden,
    /// `(p + q sqrt(D)) / r`.
    Quad {
        p: i64,
        q: i64,
        #[serde(rename = "D")]
        d: i64,
        r: i64,
    },
    /// `[a0; a1, ..., ak, 1, 1, 1, ...]`: the given prefix completed by the golden tail.
    Cf { quotients: Vec<i64> },
}

fn is_square(n: i64) -> bool {
    if n < 0 {
        return false;
    }
    let s = (n as f64).sqrt().round() as i64;
    (s - 1..=s + 1).any(|t| t >= 0 && t * t == n)
}

impl OmegaSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            OmegaSpec::Literal { value } => {
                Float::parse(value.trim()).map_err(|e| Error::InvalidOmega(format!("'{value}': {e}")))?;
            }
            OmegaSpec::Golden => {}
            OmegaSpec::Quad { q, d, r, .. } => {
                if *r == 0 {
                    return Err(Error::InvalidOmega("quad: zero denominator".into()));
                }
                if *d <= 0 {
                    return Err(Error::InvalidOmega(format!("quad: D = {d} must be positive")));
                }
                if *q == 0 || is_square(*d) {
                    return Err(Error::RationalOmega(self.to_string()));
                }
            }
            OmegaSpec::Cf { quotients } => {
                if quotients.is_empty() {
                    return Err(Error::InvalidOmega("cf: empty prefix".into()));
                }
                if quotients[1..].iter().any(|&a| a < 1) {
                    return Err(Error::InvalidOmega("cf: partial quotients after a0 must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Value at the given precision.
    pub fn value(&self, prec: u32) -> Result<Real> {
        self.validate()?;
        Ok(match self {
            OmegaSpec::Literal { value } => parse_real(value, prec)?,
            OmegaSpec::Golden => (Float::with_val(prec, 5u32).sqrt() - 1u32) / 2u32,
            OmegaSpec::Quad { p, q, d, r } => {
                let root = Float::with_val(prec, *d).sqrt();
                (root * *q + *p) / *r
            }
            OmegaSpec::Cf { quotients } => {
                // the tail [1; 1, 1, ...] equals the golden ratio
                let mut x = (Float::with_val(prec, 5u32).sqrt() + 1u32) / 2u32;
                for a in quotients[1..].iter().rev() {
                    x = Float::with_val(prec, 1u32) / x + *a;
                }
                Float::with_val(prec, 1u32) / x + quotients[0]
            }
        })
    }

    /// True for quadratic irrationals, whose continued fraction is known exactly.
    pub fn is_quadratic(&self) -> bool {
        !matches!(self, OmegaSpec::Literal { .. })
    }

    /// `(P, Q, D)` with `omega = (P + sqrt(D)) / Q` and `Q | D - P^2`, for
    /// the exact continued-fraction recursion.
    pub fn quadratic_form(&self) -> Option<(i128, i128, i128)> {
        match self {
            OmegaSpec::Golden => Some((-1, 2, 5)),
            OmegaSpec::Quad { p, q, d, r } => {
                let (mut p, mut q, mut r) = (*p as i128, *q as i128, *r as i128);
                if q < 0 {
                    p = -p;
                    q = -q;
                    r = -r;
                }
                // (p + sqrt(q^2 D)) / r, rescaled by |r| when r does not divide q^2 D - p^2
                let dd = q * q * (*d as i128);
                let (mut pp, mut qq) = (p, r);
                let mut dd_scaled = dd;
                if (dd - pp * pp) % qq != 0 {
                    let k = qq.abs();
                    pp *= k;
                    qq *= k;
                    dd_scaled = dd * k * k;
                }
                Some((pp, qq, dd_scaled))
            }
            _ => None,
        }
    }
}

impl fmt::Display for OmegaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaSpec::Literal { value } => write!(f, "{value}"),
            OmegaSpec::Golden => write!(f, "golden"),
            OmegaSpec::Quad { p, q, d, r } => write!(f, "quad:{p},{q},{d},{r}"),
            OmegaSpec::Cf { quotients } => {
                let parts: Vec<String> = quotients.iter().map(|a| a.to_string()).collect();
                write!(f, "cf:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for OmegaSpec {
    type Err = Error;

    /// Accepts `golden`, `quad:p,q,D,r`, `cf:a0,a1,...` or a decimal literal;
    /// fractions `p/q` are rejected as rational.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let ints = |body: &str| -> Result<Vec<i64>> {
            body.split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|_| Error::InvalidOmega(format!("'{s}'"))))
                .collect()
        };
        let spec = if s.eq_ignore_ascii_case("golden") {
            OmegaSpec::Golden
        } else if let Some(body) = s.strip_prefix("quad:") {
            let v = ints(body)?;
            if v.len() != 4 {
                return Err(Error::InvalidOmega(format!("'{s}': expected quad:p,q,D,r")));
            }
            OmegaSpec::Quad { p: v[0], q: v[1], d: v[2], r: v[3] }
        } else if let Some(body) = s.strip_prefix("cf:") {
            OmegaSpec::Cf { quotients: ints(body)? }
        } else if s.contains('/') {
            return Err(Error::RationalOmega(s.to_string()));
        } else {
            OmegaSpec::Literal { value: s.to_string() }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `lambda = modulus * e^{2 pi i omega}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier {
    pub omega: OmegaSpec,
    pub omega_value: Real,
    pub modulus: Real,
}

impl Multiplier {
    pub fn new(omega: OmegaSpec, modulus: f64, prec: u32) -> Result<Self> {
        Self::with_modulus(omega, Float::with_val(prec, modulus))
    }

    pub fn with_modulus(omega: OmegaSpec, modulus: Real) -> Result<Self> {
        let prec = modulus.prec();
        if !(modulus > 0 && modulus <= 1) {
            return Err(Error::InvalidMap(format!("modulus {} outside (0, 1]", modulus.to_f64())));
        }
        let omega_value = omega.value(prec)?;
        Ok(Multiplier { omega, omega_value, modulus })
    }

    pub fn lambda(&self) -> Cplx {
        Cplx::exp_2pii(&self.omega_value).scale(&self.modulus)
    }

    pub fn is_unimodular(&self) -> bool {
        self.modulus == 1
    }

    pub fn prec(&self) -> u32 {
        self.modulus.prec()
    }
}

/// Closed-form families and the custom series case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "A", alias = "a")]
    A,
    #[serde(rename = "B", alias = "b")]
    B,
    #[serde(rename = "C", alias = "c")]
    C,
    #[serde(rename = "custom")]
    Custom,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Family::A),
            "b" => Ok(Family::B),
            "c" => Ok(Family::C),
            "custom" => Ok(Family::Custom),
            other => Err(Error::InvalidMap(format!("unknown family '{other}'"))),
        }
    }
}

/// Value of an evaluator together with the validity-radius warning.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluated<T> {
    pub value: T,
    pub outside_validity: bool,
}

/// Radial part and angular lift of `F` on the circle of radius `r`.
#[derive(Clone, Debug)]
pub struct PolarSlice<'a> {
    map: &'a FoliationMap,
    pub r: f64,
    /// `nu(r) = modulus * r (1 + f(r^2))`.
    pub nu: f64,
}

impl PolarSlice<'_> {
    /// Lift `theta -> theta + omega + g(r e^{2 pi i theta})`.
    pub fn lift(&self, theta: f64) -> f64 {
        let z = Complex64::from_polar(self.r, 2.0 * std::f64::consts::PI * theta);
        theta + self.map.omega_f64 + self.map.angle_c64(z)
    }
}

/// `F(z) = lambda z (1 + f(|z|^2)) e^{2 pi i g(z)}`.
#[derive(Clone, Debug)]
pub struct FoliationMap {
    pub multiplier: Multiplier,
    /// Radial series in `u = |z|^2`, zero constant term.
    pub f: RadialSeries,
    /// Real-valued angular series, zero constant term.
    pub g: BiSeries,
    pub family: Family,
    /// Leading coefficient and degree for the closed-form families.
    pub a: Real,
    pub d: usize,
    pub validity_radius: f64,
    omega_f64: f64,
    modulus_f64: f64,
    a_f64: f64,
    lambda_c64: Complex64,
}

fn family_g(family: Family, order: usize, prec: u32) -> BiSeries {
    let half_i = Cplx::from_f64(0.0, -0.5, prec); // 1/(2i)
    let mut terms = Vec::new();
    match family {
        Family::A => {
            terms.push((1, 0, half_i.clone()));
            terms.push((0, 1, -&half_i));
        }
        Family::B => {
            terms.push((1, 1, Cplx::one(prec)));
            terms.push((2, 1, half_i.clone()));
            terms.push((1, 2, -&half_i));
        }
        Family::C => {
            terms.push((1, 1, Cplx::one(prec)));
            // |z|^2 Im e^z = sum_n |z|^2 (z^n - zbar^n) / (2i n!)
            let mut fact = Float::with_val(prec, 1u32);
            let mut n = 1usize;
            while n + 2 <= order {
                fact *= n as u64;
                let c = half_i.scale(&(Float::with_val(prec, 1u32) / &fact));
                terms.push((n + 1, 1, c.clone()));
                terms.push((1, n + 1, -&c));
                n += 1;
            }
        }
        Family::Custom => {}
    }
    let mut g = BiSeries::from_terms(terms, order, prec);
    g.set_real(true);
    g
}

impl FoliationMap {
    /// Families A, B, C with `f(u) = a u^d`.
    pub fn family(family: Family, multiplier: Multiplier, a: Real, d: usize, order: usize) -> Result<Self> {
        if family == Family::Custom {
            return Err(Error::InvalidMap("use FoliationMap::custom for series maps".into()));
        }
        if d < 1 {
            return Err(Error::InvalidMap("degree d must be at least 1".into()));
        }
        if order < 1 {
            return Err(Error::InvalidMap("order must be at least 1".into()));
        }
        let prec = multiplier.prec();
        let a = Float::with_val(prec, a);
        let f = RadialSeries::monomial(d, a.clone(), order / 2, prec);
        let g = family_g(family, order, prec);
        Ok(Self::assemble(multiplier, f, g, family, a, d))
    }

    /// A map given by its series `(f, g)`.
    pub fn custom(multiplier: Multiplier, f: RadialSeries, mut g: BiSeries) -> Result<Self> {
        let tol = Precision::new(multiplier.prec())?.tolerance();
        if !f.coeff(0).is_zero() {
            return Err(Error::InvalidMap("f must have zero constant term".into()));
        }
        if !g.coeff(0, 0).is_zero() {
            return Err(Error::InvalidMap("g must have zero constant term".into()));
        }
        let scale = g.max_abs().max(1.0);
        let asym = g.asymmetry();
        if asym > tol * scale {
            return Err(Error::NotReal { context: "custom map angular series", residue: asym });
        }
        g.symmetrize();
        let (d, a) = match f.valuation(0.0) {
            Some(d) => (d, f.coeff(d)),
            None => (0, Float::new(multiplier.prec())),
        };
        Ok(Self::assemble(multiplier, f, g, Family::Custom, a, d))
    }

    fn assemble(multiplier: Multiplier, f: RadialSeries, g: BiSeries, family: Family, a: Real, d: usize) -> Self {
        let omega_f64 = multiplier.omega_value.to_f64();
        let modulus_f64 = multiplier.modulus.to_f64();
        let lambda_c64 = multiplier.lambda().to_c64();
        let a_f64 = a.to_f64();
        FoliationMap {
            multiplier,
            f,
            g,
            family,
            a,
            d,
            validity_radius: DEFAULT_VALIDITY_RADIUS,
            omega_f64,
            modulus_f64,
            a_f64,
            lambda_c64,
        }
    }

    pub fn with_validity_radius(mut self, radius: f64) -> Self {
        self.validity_radius = radius;
        self
    }

    pub fn prec(&self) -> u32 {
        self.multiplier.prec()
    }

    pub fn order(&self) -> usize {
        self.g.order()
    }

    pub fn lambda(&self) -> Cplx {
        self.multiplier.lambda()
    }

    pub fn lambda_c64(&self) -> Complex64 {
        self.lambda_c64
    }

    pub fn omega_f64(&self) -> f64 {
        self.omega_f64
    }

    pub fn modulus_f64(&self) -> f64 {
        self.modulus_f64
    }

    /// `f = 0`: every circle is mapped to itself (up to the modulus).
    pub fn is_conservative(&self) -> bool {
        self.f.is_zero()
    }

    /// The same map with its series rebuilt (families) or re-truncated (custom) at `order`.
    pub fn at_order(&self, order: usize) -> Self {
        let prec = self.prec();
        let (f, g) = match self.family {
            Family::Custom => (self.f.with_order(order / 2), self.g.with_order(order)),
            fam => (RadialSeries::monomial(self.d, self.a.clone(), order / 2, prec), family_g(fam, order, prec)),
        };
        let mut m = Self::assemble(self.multiplier.clone(), f, g, self.family, self.a.clone(), self.d);
        m.validity_radius = self.validity_radius;
        m
    }

    /// `(F, Fbar)` as series truncated at `order`.
    pub fn as_series(&self, order: usize) -> Result<(BiSeries, BiSeries)> {
        let m = if order == self.order() { self.clone() } else { self.at_order(order) };
        let prec = self.prec();
        let radial = BiSeries::from_radial(&m.f, order).add(&BiSeries::one(order, prec))?;
        let fz = BiSeries::z(order, prec)
            .scale(&self.lambda())
            .mul(&radial)?
            .mul(&m.g.exp_2pii()?)?;
        let fzbar = fz.conj_transpose();
        Ok((fz, fzbar))
    }

    /// Angular function `g(z)` at working precision.
    pub fn angle(&self, z: &Cplx) -> Real {
        let prec = self.prec();
        let u = z.norm_sqr();
        match self.family {
            Family::A => Float::with_val(prec, &z.im),
            Family::B => Float::with_val(prec, &u * &z.im) + &u,
            Family::C => {
                let e = z.exp();
                Float::with_val(prec, &u * &e.im) + &u
            }
            Family::Custom => self.g.eval(z).re,
        }
    }

    pub fn angle_c64(&self, z: Complex64) -> f64 {
        let u = z.norm_sqr();
        match self.family {
            Family::A => z.im,
            Family::B => u + u * z.im,
            Family::C => u * (1.0 + z.exp().im),
            Family::Custom => self.g.eval_c64(z).re,
        }
    }

    /// `1 + f(u)`.
    fn radial_factor(&self, u: &Real) -> Real {
        match self.family {
            Family::Custom => {
                let v = self.f.eval(u);
                v + 1u32
            }
            _ => {
                let ud = Float::with_val(self.prec(), u.pow(self.d as u32));
                Float::with_val(self.prec(), &self.a * &ud) + 1u32
            }
        }
    }

    fn radial_factor_f64(&self, u: f64) -> f64 {
        match self.family {
            Family::Custom => 1.0 + self.f.eval_f64(u),
            _ => 1.0 + self.a_f64 * u.powi(self.d as i32),
        }
    }

    fn outside(&self, radius: f64) -> bool {
        self.family == Family::Custom && radius > self.validity_radius
    }

    /// `F(z)` at working precision (closed form for the families).
    pub fn eval(&self, z: &Cplx) -> Evaluated<Cplx> {
        let u = z.norm_sqr();
        let factor = self.radial_factor(&u);
        let rot = Cplx::exp_2pii(&self.angle(z));
        let value = (&(&self.lambda() * z) * &rot).scale(&factor);
        Evaluated { value, outside_validity: self.outside(u.to_f64().sqrt()) }
    }

    pub fn eval_c64(&self, z: Complex64) -> Evaluated<Complex64> {
        Evaluated { value: self.apply(z), outside_validity: self.outside(z.norm()) }
    }

    /// `F(z)` in double precision without the validity bookkeeping (orbit work).
    #[inline]
    pub fn apply(&self, z: Complex64) -> Complex64 {
        let u = z.norm_sqr();
        let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * self.angle_c64(z));
        self.lambda_c64 * z * self.radial_factor_f64(u) * phase
    }

    /// `nu(r) = modulus * r (1 + f(r^2))`.
    pub fn nu(&self, r: f64) -> f64 {
        self.modulus_f64 * r * self.radial_factor_f64(r * r)
    }

    pub fn polar(&self, r: f64) -> Evaluated<PolarSlice<'_>> {
        Evaluated { value: PolarSlice { map: self, r, nu: self.nu(r) }, outside_validity: self.outside(r) }
    }

    /// Radius below which the angular lifts are certainly increasing, where known
    /// in closed form (`2 pi r < 1` for family A).
    pub fn monotone_lift_bound(&self) -> Option<f64> {
        match self.family {
            Family::A => Some(1.0 / (2.0 * std::f64::consts::PI)),
            // d/dtheta (r^2 + r^3 sin 2 pi theta) = 2 pi r^3 cos(...)
            Family::B => Some((2.0 * std::f64::consts::PI).powf(-1.0 / 3.0)),
            _ => None,
        }
    }

    pub fn to_description(&self) -> MapDescription {
        let f = self
            .f
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(s, c)| RadialTerm { s, value: Number::Text(format_real(c)) })
            .collect();
        let custom = self.family == Family::Custom;
        MapDescription {
            family: self.family,
            omega: OmegaInput::Spec(self.multiplier.omega.clone()),
            modulus: Number::Text(format_real(&self.multiplier.modulus)),
            a: (!custom).then(|| Number::Text(format_real(&self.a))),
            d: (!custom).then_some(self.d),
            order: Some(self.order()),
            f: custom.then_some(f),
            g: custom.then(|| SeriesJson::from_bi(&self.g).terms),
            validity_radius: custom.then_some(self.validity_radius),
        }
    }
}

/// Number given either as a JSON number or as a decimal string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn to_real(&self, prec: u32) -> Result<Real> {
        match self {
            Number::Float(x) => Ok(Float::with_val(prec, *x)),
            Number::Text(s) => parse_real(s, prec),
        }
    }
}

/// Omega either in the command-line syntax or as a tagged object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaInput {
    Text(String),
    Spec(OmegaSpec),
}

impl OmegaInput {
    pub fn spec(&self) -> Result<OmegaSpec> {
        match self {
            OmegaInput::Text(s) => s.parse(),
            OmegaInput::Spec(s) => {
                s.validate()?;
                Ok(s.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialTerm {
    pub s: usize,
    pub value: Number,
}

/// Map description file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDescription {
    pub family: Family,
    pub omega: OmegaInput,
    #[serde(default = "default_modulus")]
    pub modulus: Number,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<RadialTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<crate::series::TermJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validity_radius: Option<f64>,
}

fn default_modulus() -> Number {
    Number::Float(1.0)
}

impl MapDescription {
    /// Builds the map; `order` overrides the order stored in the description.
    pub fn build(&self, order: Option<usize>, prec: u32) -> Result<FoliationMap> {
        let order = order.or(self.order).unwrap_or(16);
        let multiplier = Multiplier::with_modulus(self.omega.spec()?, self.modulus.to_real(prec)?)?;
        match self.family {
            Family::Custom => {
                let mut f = RadialSeries::zero(order / 2, prec);
                for t in self.f.iter().flatten() {
                    if t.s <= order / 2 {
                        f.set(t.s, t.value.to_real(prec)?);
                    }
                }
                let terms = SeriesJson { order, terms: self.g.clone().unwrap_or_default() };
                let terms = SeriesJson {
                    order,
                    terms: terms.terms.into_iter().filter(|t| t.j + t.k <= order).collect(),
                };
                let g = terms.to_bi(prec)?;
                let m = FoliationMap::custom(multiplier, f, g)?;
                Ok(match self.validity_radius {
                    Some(r) => m.with_validity_radius(r),
                    None => m,
                })
            }
            fam => {
                let a = self.a.as_ref().map(|a| a.to_real(prec)).transpose()?.unwrap_or_else(|| Float::new(prec));
                FoliationMap::family(fam, multiplier, a, self.d.unwrap_or(1), order)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn golden() -> Multiplier {
        Multiplier::new(OmegaSpec::Golden, 1.0, P).unwrap()
    }

    #[test]
    fn omega_parsing() {
        assert_eq!("golden".parse::<OmegaSpec>().unwrap(), OmegaSpec::Golden);
        assert!(matches!("1/3".parse::<OmegaSpec>(), Err(Error::RationalOmega(_))));
        assert!(matches!("quad:1,1,4,2".parse::<OmegaSpec>(), Err(Error::RationalOmega(_))));
        let g = OmegaSpec::Golden.value(P).unwrap();
        let q = "quad:-1,1,5,2".parse::<OmegaSpec>().unwrap().value(P).unwrap();
        let c = "cf:0,1".parse::<OmegaSpec>().unwrap().value(P).unwrap();
        assert_eq!(g, q);
        assert!((Float::with_val(P, &g - &c)).abs() < 1e-70);
        assert!((g.to_f64() - 0.6180339887498949).abs() < 1e-15);
    }

    #[test]
    fn family_coefficients() {
        let a = FoliationMap::family(Family::A, golden(), Float::with_val(P, -1), 1, 6).unwrap();
        assert_eq!(a.g.coeff(1, 0), Cplx::from_f64(0.0, -0.5, P));
        assert_eq!(a.g.coeff(0, 1), Cplx::from_f64(0.0, 0.5, P));
        assert_eq!(a.g.terms().count(), 2);
        let b = FoliationMap::family(Family::B, golden(), Float::with_val(P, -1), 1, 6).unwrap();
        assert_eq!(b.g.coeff(1, 1), Cplx::one(P));
        assert_eq!(b.g.coeff(2, 1), Cplx::from_f64(0.0, -0.5, P));
        assert_eq!(b.g.coeff(1, 2), Cplx::from_f64(0.0, 0.5, P));
        let conservative = FoliationMap::family(Family::A, golden(), Float::new(P), 1, 6).unwrap();
        assert!(conservative.is_conservative());
        assert!(FoliationMap::family(Family::A, golden(), Float::new(P), 0, 6).is_err());
    }

    #[test]
    fn family_a_low_degree_expansion() {
        let a = FoliationMap::family(Family::A, golden(), Float::with_val(P, -1), 1, 3).unwrap();
        let (fz, fzb) = a.as_series(3).unwrap();
        let lam = a.lambda();
        let pi = Precision::new(P).unwrap().pi();
        assert_eq!(fz.coeff(1, 0), lam);
        assert!((&fz.coeff(2, 0) - &lam.scale(&pi)).abs_f64() < 1e-70);
        assert!((&fz.coeff(1, 1) + &lam.scale(&pi)).abs_f64() < 1e-70);
        // a-term: -lambda z |z|^2 plus pi^2 terms at degree 3
        let pi2 = Float::with_val(P, &pi * &pi);
        let expect_21 = &lam.scale(&(Float::with_val(P, -1) - &pi2));
        assert!((&fz.coeff(2, 1) - expect_21).abs_f64() < 1e-70);
        assert_eq!(fzb, fz.conj_transpose());
    }

    #[test]
    fn modulus_depends_only_on_radius() {
        for fam in [Family::A, Family::B, Family::C] {
            let m = FoliationMap::family(fam, golden(), Float::with_val(P, -1), 1, 8).unwrap();
            let r = 0.3;
            let moduli: Vec<f64> = (0..16)
                .map(|i| m.apply(Complex64::from_polar(r, i as f64 * 0.39)).norm())
                .collect();
            for w in &moduli {
                assert!((w - m.nu(r)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn series_matches_closed_form() {
        for fam in [Family::A, Family::B, Family::C] {
            let m = FoliationMap::family(fam, golden(), Float::with_val(P, -1), 1, 20).unwrap();
            let (fz, _) = m.as_series(20).unwrap();
            for i in 0..5 {
                let z = Cplx::from_c64(Complex64::from_polar(0.02, 1.1 * i as f64), P);
                let closed = m.eval(&z).value;
                let series = fz.eval(&z);
                let rel = (&closed - &series).abs_f64() / closed.abs_f64();
                assert!(rel < 1e-20, "{fam:?}: {rel:e}");
            }
        }
    }

    #[test]
    fn circle_maps_of_the_families() {
        let a = FoliationMap::family(Family::A, golden(), Float::with_val(P, -1), 1, 8).unwrap();
        let b = FoliationMap::family(Family::B, golden(), Float::with_val(P, -1), 1, 8).unwrap();
        let (r, th) = (0.07, 0.31);
        let w = a.omega_f64();
        let s = (2.0 * std::f64::consts::PI * th).sin();
        assert!((a.polar(r).value.lift(th) - (th + w + r * s)).abs() < 1e-15);
        assert!((b.polar(r).value.lift(th) - (th + w + r * r + r.powi(3) * s)).abs() < 1e-15);
        assert_eq!(a.apply(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn custom_map_validity_and_reality() {
        let f = RadialSeries::zero(4, P);
        let g = BiSeries::monomial(1, 1, Cplx::one(P), 8, P);
        let m = FoliationMap::custom(golden(), f.clone(), g).unwrap();
        assert!(m.eval_c64(Complex64::new(0.5, 0.0)).outside_validity);
        assert!(!m.eval_c64(Complex64::new(0.05, 0.0)).outside_validity);
        let bad = BiSeries::monomial(1, 0, Cplx::one(P), 8, P);
        assert!(matches!(FoliationMap::custom(golden(), f, bad), Err(Error::NotReal { .. })));
    }

    #[test]
    fn description_round_trip() {
        let text = r#"{"family":"custom","omega":"golden","modulus":1.0,
            "f":[{"s":1,"value":"-0.5"}],
            "g":[{"j":1,"k":1,"re":"1","im":"0"},{"j":2,"k":1,"re":"0","im":"-0.5"},{"j":1,"k":2,"re":"0","im":"0.5"}]}"#;
        let desc: MapDescription = serde_json::from_str(text).unwrap();
        let m = desc.build(Some(8), P).unwrap();
        let again = m.to_description().build(Some(8), P).unwrap();
        assert_eq!(m.g, again.g);
        assert_eq!(m.f, again.f);
        let fam: MapDescription =
            serde_json::from_str(r#"{"family":"A","omega":{"kind":"golden"},"a":-1,"d":1}"#).unwrap();
        assert_eq!(fam.build(Some(4), P).unwrap().family, Family::A);
    }
}
