//! Invariance of the circle foliation and of its images under formal changes of coordinates.

use crate::error::{Error, Result};
use crate::precision::Cplx;
use crate::series::BiSeries;

/// Max non-radial coefficient of `|F|^2`; zero when `F` maps circles to circles.
pub fn circle_defect(f: &BiSeries) -> Result<f64> {
    let modsq = f.mul(&f.conj_transpose())?;
    let (_, rest) = modsq.diagonal();
    Ok(rest.max_abs())
}

/// Compositional inverse of `G = z + O(2)`.
pub fn invert_tangent(g: &BiSeries) -> Result<BiSeries> {
    let order = g.order();
    let prec = g.prec();
    let z = BiSeries::z(order, prec);
    if !g.coeff(0, 0).is_zero() || (&g.coeff(1, 0) - &Cplx::one(prec)).abs_f64() > 0.0 || !g.coeff(0, 1).is_zero() {
        return Err(Error::Transform("inversion needs a map tangent to the identity".into()));
    }
    let nonlinear = g.sub(&z)?;
    let mut h = z.clone();
    for _ in 1..order {
        h = z.sub(&nonlinear.substitute(&h, &h.conj_transpose())?)?;
    }
    Ok(h)
}

/// `G o F o G^{-1}`.
pub fn conjugate(f: &BiSeries, g: &BiSeries) -> Result<BiSeries> {
    let ginv = invert_tangent(g)?;
    let inner = f.substitute(&ginv, &ginv.conj_transpose())?;
    g.substitute(&inner, &inner.conj_transpose())
}

/// For each coordinate change `G`, whether `F` preserves the foliation `G^{-1}(circles)`,
/// i.e. whether `G o F o G^{-1}` preserves circles within `tol`.
pub fn preserved_foliations(f: &BiSeries, changes: &[BiSeries], tol: f64) -> Result<Vec<bool>> {
    changes.iter().map(|g| Ok(circle_defect(&conjugate(f, g)?)? <= tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    const P: u32 = 256;

    #[test]
    fn inverse_composes_to_identity() {
        let mut g = BiSeries::z(7, P);
        g.set(2, 0, Cplx::from_f64(0.3, -0.1, P));
        g.set(1, 1, Cplx::from_f64(0.2, 0.0, P));
        g.set(0, 3, Cplx::from_f64(-0.5, 0.4, P));
        let h = invert_tangent(&g).unwrap();
        let id = g.substitute(&h, &h.conj_transpose()).unwrap();
        assert!(id.sub(&BiSeries::z(7, P)).unwrap().max_abs() < 1e-60);
    }

    #[test]
    fn rotation_preserves_circles_only_in_radial_charts() {
        let order = 7;
        let lam = Cplx::exp_2pii(&Float::with_val(P, 0.2));
        let z = BiSeries::z(order, P);
        let radial = BiSeries::from_radial(&crate::series::RadialSeries::from_f64(&[0.0, 0.5], 3, P), order);
        let f = z.mul(&BiSeries::one(order, P).add(&radial).unwrap()).unwrap().scale(&lam);
        assert!(circle_defect(&f).unwrap() < 1e-60);
        let mut bend = BiSeries::z(order, P);
        bend.set(2, 0, Cplx::from_f64(0.4, 0.0, P));
        let flags = preserved_foliations(&f, &[z.clone(), bend], 1e-30).unwrap();
        assert_eq!(flags, vec![true, false]);
    }
}
