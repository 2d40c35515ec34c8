//! Special conjugacy `Phi` with `Phi o F = N o Phi` built from a fundamental annulus.
//!
//! `Phi` is the identity on `C0 = {|z| = R0}` and `N o F^{-1}` on `C1 = F(C0)`. On
//! `A0 = {R1 <= |z| <= R0}` the angle is interpolated linearly in the radius between the
//! two lifts, and `Phi = N^n o Phi|A0 o F^{-n}` on `A_n = F^n(A0)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::FoliationMap;
use crate::normalizer::Normalization;

const TAU: f64 = std::f64::consts::TAU;

/// `N(z) = modulus e^{2 pi i omega} z (1 + f(|z|^2)) e^{2 pi i n(|z|^2)}`, coefficients indexed by power.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationMap {
    pub omega: f64,
    pub modulus: f64,
    pub f: Vec<f64>,
    pub n: Vec<f64>,
}

fn poly(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, x| acc * u + x)
}

impl RotationMap {
    /// The normal form of `map` carried by `norm`.
    pub fn from_normalization(map: &FoliationMap, norm: &Normalization) -> Self {
        RotationMap { omega: map.omega_f64(), modulus: map.modulus_f64(), f: map.f.to_f64_vec(), n: norm.n.to_f64_vec() }
    }

    /// Angle advanced on the circle of radius squared `u`, in turns.
    pub fn twist(&self, u: f64) -> f64 {
        self.omega + poly(&self.n, u)
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        let u = z.norm_sqr();
        z * self.modulus * (1.0 + poly(&self.f, u)) * Complex64::from_polar(1.0, TAU * self.twist(u))
    }
}

#[derive(Clone, Debug)]
pub struct Sternberg<'a> {
    map: &'a FoliationMap,
    normal: RotationMap,
    r0: f64,
    r1: f64,
}

/// Bisection for an increasing `h` with `h(lo) <= 0 <= h(hi)`.
fn bisect(mut lo: f64, mut hi: f64, h: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl<'a> Sternberg<'a> {
    /// Checks that `normal` is `F`-special and that `F` is monotone on the disk of radius `r0`.
    pub fn new(map: &'a FoliationMap, normal: RotationMap, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::Dynamics("outer radius must be positive".into()));
        }
        let f = map.f.to_f64_vec();
        let len = f.len().max(normal.f.len());
        let mismatch = (0..len).any(|i| {
            let a = f.get(i).copied().unwrap_or(0.0);
            let b = normal.f.get(i).copied().unwrap_or(0.0);
            (a - b).abs() > 1e-14 * (1.0 + a.abs())
        });
        if mismatch || (normal.modulus - map.modulus_f64()).abs() > 1e-15 {
            return Err(Error::Dynamics("normal form does not share the radial part of F".into()));
        }
        let samples = 512;
        let mut prev = 0.0;
        for i in 1..=samples {
            let r = r0 * i as f64 / samples as f64;
            let v = map.nu(r);
            if !(v > prev && v < r) {
                return Err(Error::Dynamics(format!("radial map is not a contracting increasing map at r = {r}")));
            }
            prev = v;
        }
        let bound = map.monotone_lift_bound();
        if bound.is_none_or(|b| r0 >= b) {
            let slice = map.polar(r0).value;
            let mut last = slice.lift(0.0);
            for i in 1..=samples {
                let theta = i as f64 / samples as f64;
                let v = slice.lift(theta);
                if v <= last {
                    return Err(Error::NonMonotoneLift { theta });
                }
                last = v;
            }
        }
        let r1 = map.nu(r0);
        Ok(Sternberg { map, normal, r0, r1 })
    }

    pub fn radii(&self) -> (f64, f64) {
        (self.r0, self.r1)
    }

    /// `F^{-1}(w)` for `|w| <= R1`.
    pub fn inverse(&self, w: Complex64) -> Complex64 {
        let rho = w.norm();
        if rho == 0.0 {
            return w;
        }
        let r = bisect(rho, self.r0, |r| self.map.nu(r) - rho);
        let target = w.arg() / TAU;
        let theta = self.angle_preimage(r, target);
        Complex64::from_polar(r, TAU * theta)
    }

    /// The real `x` with `x + omega + g(r e^{2 pi i x}) = target`.
    fn angle_preimage(&self, r: f64, target: f64) -> f64 {
        let slice = self.map.polar(r).value;
        let h = |x: f64| slice.lift(x) - target;
        let mut lo = target - self.map.omega_f64();
        while h(lo) > 0.0 {
            lo -= 0.5;
        }
        let mut hi = lo + 0.5;
        while h(hi) < 0.0 {
            hi += 0.5;
        }
        bisect(lo, hi, h)
    }

    /// Lift of `N o F^{-1}` on `C1`.
    fn boundary_lift(&self, theta: f64) -> f64 {
        self.angle_preimage(self.r0, theta) + self.normal.twist(self.r0 * self.r0)
    }

    fn on_fundamental(&self, w: Complex64) -> Complex64 {
        let r = w.norm();
        let theta = w.arg() / TAU;
        let s = ((self.r0 - r) / (self.r0 - self.r1)).clamp(0.0, 1.0);
        let h = (1.0 - s) * theta + s * self.boundary_lift(theta);
        Complex64::from_polar(r, TAU * h)
    }

    /// Annulus index `n` of `z` and the pull-back `F^{-n}(z)` in `A0`.
    pub fn locate(&self, z: Complex64) -> Result<(usize, Complex64)> {
        let r = z.norm();
        if r > self.r0 * (1.0 + 1e-12) {
            return Err(Error::Dynamics(format!("|z| = {r} lies outside the disk of radius {}", self.r0)));
        }
        let mut w = z;
        let mut n = 0;
        while w.norm() < self.r1 {
            w = self.inverse(w);
            n += 1;
            if n > 10_000_000 {
                return Err(Error::Dynamics("point too close to the origin".into()));
            }
        }
        Ok((n, w))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() == 0.0 {
            return Ok(z);
        }
        let (n, w) = self.locate(z)?;
        let mut v = self.on_fundamental(w);
        for _ in 0..n {
            v = self.normal.apply(v);
        }
        Ok(v)
    }
}

/// `Phi(z)` for the conjugacy between `map` and `normal` on the disk of radius `r0`.
pub fn sternberg_eval(map: &FoliationMap, normal: &RotationMap, r0: f64, z: Complex64) -> Result<Complex64> {
    Sternberg::new(map, normal.clone(), r0)?.eval(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{Family, Multiplier, OmegaSpec};
    use crate::normalizer::{solve_homological, Gauge};
    use rug::Float;

    fn setup() -> (FoliationMap, RotationMap) {
        let mult = Multiplier::new(OmegaSpec::Golden, 1.0, 128).unwrap();
        let map = FoliationMap::family(Family::A, mult, Float::with_val(128, -1), 1, 8).unwrap();
        let norm = solve_homological(&map, 8, Gauge::Basic).unwrap();
        let normal = RotationMap::from_normalization(&map, &norm);
        (map, normal)
    }

    #[test]
    fn boundary_conditions() {
        let (map, normal) = setup();
        let st = Sternberg::new(&map, normal.clone(), 0.1).unwrap();
        let z = Complex64::from_polar(0.1, 1.3);
        assert!((st.eval(z).unwrap() - z).norm() < 1e-14);
        let w = Complex64::from_polar(st.radii().1, -0.4);
        let expect = normal.apply(st.inverse(w));
        assert!((st.eval(w).unwrap() - expect).norm() < 1e-13);
        assert!((map.apply(st.inverse(w)) - w).norm() < 1e-14);
    }

    #[test]
    fn conjugacy_and_radius() {
        let (map, normal) = setup();
        let st = Sternberg::new(&map, normal.clone(), 0.1).unwrap();
        for k in 0..20 {
            let r = 0.094 + 0.0003 * k as f64;
            let z = Complex64::from_polar(r, 0.37 * k as f64);
            let phi = st.eval(z).unwrap();
            assert!((phi.norm() - r).abs() < 1e-12);
            let lhs = st.eval(map.apply(z)).unwrap();
            assert!((lhs - normal.apply(phi)).norm() < 1e-10);
        }
        assert!(st.eval(Complex64::new(0.2, 0.0)).is_err());
    }

    #[test]
    fn rejects_foreign_radial_part() {
        let (map, mut normal) = setup();
        normal.f[1] = -2.0;
        assert!(Sternberg::new(&map, normal, 0.1).is_err());
    }
}
