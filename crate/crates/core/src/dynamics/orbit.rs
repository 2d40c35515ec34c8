//! Forward orbits in double precision.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::maps::FoliationMap;

/// `F^(m)(z)`; fails if the orbit leaves the disk of radius `limit`.
pub fn iterate(map: &FoliationMap, z: Complex64, m: u64, limit: f64) -> Result<Complex64> {
    let mut w = z;
    for _ in 0..m {
        w = map.apply(w);
        let r = w.norm();
        if !(r <= limit) {
            return Err(Error::Escape { radius: r, limit });
        }
    }
    Ok(w)
}

/// `nu^(m)(r)`: the radial part of `F^(m)`, independent of the angle.
pub fn radial_iterate(map: &FoliationMap, r: f64, m: u64, limit: f64) -> Result<f64> {
    let mut x = r;
    for _ in 0..m {
        x = map.nu(x);
        if !(x.abs() <= limit) {
            return Err(Error::Escape { radius: x, limit });
        }
    }
    Ok(x)
}

/// Model map `nu_{p,a}(r) = r (1 + a r^p)^{-1/p}`.
pub fn model_nu(p: f64, a: f64, r: f64) -> f64 {
    model_iterate(p, a, r, 1)
}

/// Closed-form iterate `nu_{p,a}^(m)(r) = r (1 + m a r^p)^{-1/p}`.
pub fn model_iterate(p: f64, a: f64, r: f64, m: u64) -> f64 {
    r * (-(m as f64 * a * r.powf(p)).ln_1p() / p).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{Family, Multiplier, OmegaSpec};
    use rug::Float;

    fn family_a() -> FoliationMap {
        let mult = Multiplier::new(OmegaSpec::Golden, 1.0, 128).unwrap();
        FoliationMap::family(Family::A, mult, Float::with_val(128, -1), 1, 8).unwrap()
    }

    #[test]
    fn model_iterate_matches_repeated_model() {
        let (p, a, r) = (2.0, 3.0, 0.2);
        let mut x = r;
        for _ in 0..50 {
            x = model_nu(p, a, x);
        }
        assert!((x - model_iterate(p, a, r, 50)).abs() < 1e-14);
        assert_eq!(model_iterate(p, a, r, 0), r);
    }

    #[test]
    fn zero_steps_and_semigroup() {
        let map = family_a();
        let z = Complex64::new(0.05, 0.03);
        assert_eq!(iterate(&map, z, 0, 1.0).unwrap(), z);
        let a = iterate(&map, z, 70, 1.0).unwrap();
        let b = iterate(&map, iterate(&map, z, 30, 1.0).unwrap(), 40, 1.0).unwrap();
        assert!((a - b).norm() < 1e-14);
        let r = radial_iterate(&map, z.norm(), 70, 1.0).unwrap();
        assert!((r - a.norm()).abs() < 1e-14);
    }

    #[test]
    fn escape_is_reported() {
        let mult = Multiplier::new(OmegaSpec::Golden, 1.0, 128).unwrap();
        let expanding = FoliationMap::family(Family::A, mult, Float::with_val(128, 1), 1, 8).unwrap();
        assert!(matches!(iterate(&expanding, Complex64::new(0.5, 0.0), 100, 1.0), Err(Error::Escape { .. })));
    }
}
