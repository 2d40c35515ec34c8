//! Sandwich bounds `nu_{2d,a+}^(m) <= nu^(m) <= nu_{2d,a-}^(m)` for weak contractions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{Family, FoliationMap};

use super::orbit::model_iterate;

/// Model exponents `a-` and `a+` around `2d|a|`; `None` picks `d|a|` and `3d|a|`.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct ContractionChoice {
    pub a_minus: Option<f64>,
    pub a_plus: Option<f64>,
    /// Upper end of the search for `r0`.
    pub r_max: Option<f64>,
}

/// Log-spaced `(r, m)` certification grid.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CertGrid {
    pub r_min: f64,
    pub r_points: usize,
    pub m_max: u64,
    pub m_points: usize,
}

impl Default for CertGrid {
    fn default() -> Self {
        CertGrid { r_min: 0.01, r_points: 24, m_max: 100_000, m_points: 26 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certification {
    pub points: usize,
    pub sandwich_failures: usize,
    /// Grid points where `nu^(m)(r) >= r`.
    pub shrink_failures: usize,
    /// Failures of `nu^(m)(r) <= C m^{-1/2d}`.
    pub upper_decay_failures: usize,
    /// Failures of `m >= K r^{-2d} => nu^(m)(r) >= D m^{-1/2d}`.
    pub lower_decay_failures: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionBounds {
    pub d: usize,
    pub a: f64,
    pub a_minus: f64,
    pub a_plus: f64,
    pub r0: f64,
    /// `a-^{-1/2d}`.
    pub c: f64,
    /// `(2 a+)^{-1/2d}`.
    pub d_const: f64,
    /// `1 / a+`.
    pub k: f64,
    pub certification: Option<Certification>,
}

impl ContractionBounds {
    fn p(&self) -> f64 {
        2.0 * self.d as f64
    }

    pub fn lower(&self, r: f64, m: u64) -> f64 {
        model_iterate(self.p(), self.a_plus, r, m)
    }

    pub fn upper(&self, r: f64, m: u64) -> f64 {
        model_iterate(self.p(), self.a_minus, r, m)
    }

    /// Checks every inequality at every grid point; iterates `nu` directly.
    pub fn certify<N: Fn(f64) -> f64 + Sync>(&self, nu: N, grid: &CertGrid) -> Certification {
        let radii = log_space(grid.r_min.min(self.r0), self.r0, grid.r_points);
        let mut ms: Vec<u64> = log_space(1.0, grid.m_max as f64, grid.m_points).iter().map(|m| m.round() as u64).collect();
        ms.dedup();
        let exponent = -1.0 / self.p();
        let per_r: Vec<[usize; 5]> = radii
            .par_iter()
            .map(|&r| {
                let mut counts = [0usize; 5];
                let mut x = r;
                let mut step = 0u64;
                for &m in &ms {
                    while step < m {
                        x = nu(x);
                        step += 1;
                    }
                    counts[0] += 1;
                    if !(self.lower(r, m) <= x && x <= self.upper(r, m)) {
                        counts[1] += 1;
                    }
                    if !(x > 0.0 && x < r) {
                        counts[2] += 1;
                    }
                    let mf = m as f64;
                    if x > self.c * mf.powf(exponent) {
                        counts[3] += 1;
                    }
                    if mf >= self.k * r.powf(-self.p()) && x < self.d_const * mf.powf(exponent) {
                        counts[4] += 1;
                    }
                }
                counts
            })
            .collect();
        let mut t = [0usize; 5];
        for c in per_r {
            for i in 0..5 {
                t[i] += c[i];
            }
        }
        Certification {
            points: t[0],
            sandwich_failures: t[1],
            shrink_failures: t[2],
            upper_decay_failures: t[3],
            lower_decay_failures: t[4],
            passed: t[1..].iter().all(|&x| x == 0),
        }
    }
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || lo == hi {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| if i + 1 == n { hi } else { (a + (b - a) * i as f64 / (n - 1) as f64).exp() }).collect()
}

/// Bounds for a radial map `nu` with `nu(r) = r (1 + a r^{2d} + ...)`, `a < 0`.
pub fn contraction_bounds_radial<N: Fn(f64) -> f64>(nu: N, d: usize, a: f64, choice: &ContractionChoice) -> Result<ContractionBounds> {
    if !(a < 0.0) {
        return Err(Error::Dynamics(format!("leading radial coefficient a = {a} must be negative")));
    }
    if d == 0 {
        return Err(Error::Dynamics("valuation d must be positive".into()));
    }
    let target = 2.0 * d as f64 * a.abs();
    let a_minus = choice.a_minus.unwrap_or(target / 2.0);
    let a_plus = choice.a_plus.unwrap_or(1.5 * target);
    if !(0.0 < a_minus && a_minus < target && target < a_plus) {
        return Err(Error::Dynamics(format!("need 0 < a- < 2d|a| = {target} < a+, got a- = {a_minus}, a+ = {a_plus}")));
    }
    let p = 2.0 * d as f64;
    let ok = |r: f64| {
        let v = nu(r);
        let h = r * 1e-6;
        v > 0.0 && v < r && nu(r + h) > nu(r - h) && model_iterate(p, a_plus, r, 1) <= v && v <= model_iterate(p, a_minus, r, 1)
    };
    let r_max = choice.r_max.unwrap_or(1.0);
    let steps = 400;
    let mut good = 0.0;
    let mut bad = None;
    for i in 1..=steps {
        let r = r_max * i as f64 / steps as f64;
        if ok(r) {
            good = r;
        } else {
            bad = Some(r);
            break;
        }
    }
    if good == 0.0 {
        return Err(Error::Dynamics("no radius satisfies the sandwich inequalities".into()));
    }
    let r0 = match bad {
        None => good,
        Some(mut hi) => {
            let mut lo = good;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if ok(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    };
    Ok(ContractionBounds {
        d,
        a,
        a_minus,
        a_plus,
        r0,
        c: a_minus.powf(-1.0 / p),
        d_const: (2.0 * a_plus).powf(-1.0 / p),
        k: 1.0 / a_plus,
        certification: None,
    })
}

/// `(d, a)` of the radial factor `1 + a u^d + ...` of `map`.
pub fn leading_radial(map: &FoliationMap) -> Result<(usize, f64)> {
    match map.family {
        Family::Custom => {
            let d = map.f.valuation(0.0).ok_or_else(|| Error::Dynamics("f vanishes: no contraction".into()))?;
            Ok((d, map.f.coeff(d).to_f64()))
        }
        _ => Ok((map.d, map.a.to_f64())),
    }
}

/// Computes `r0`, `C`, `D`, `K` for `map` and certifies them on `grid`.
pub fn contraction_bounds(map: &FoliationMap, choice: &ContractionChoice, grid: &CertGrid) -> Result<ContractionBounds> {
    if (map.modulus_f64() - 1.0).abs() > 1e-15 {
        return Err(Error::Dynamics("contraction bounds need modulus 1".into()));
    }
    let (d, a) = leading_radial(map)?;
    let mut choice = *choice;
    if map.family == Family::Custom {
        choice.r_max = Some(choice.r_max.unwrap_or(map.validity_radius).min(map.validity_radius));
    }
    let mut b = contraction_bounds_radial(|r| map.nu(r), d, a, &choice)?;
    b.certification = Some(b.certify(|r| map.nu(r), grid));
    Ok(b)
}
