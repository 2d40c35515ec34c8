//! Polynomial normal forms of weak contractions.

use rug::float::Constant;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::{tolerance_for, Cplx, Real};
use crate::series::{BiSeries, RadialSeries, UniSeries};

use super::gauge::NormalFormPair;
use super::onedim::{one_dim_conjugacy, solve_gamma};

/// Shape of the target normal form `N1(z) = lambda z P(|z|^2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyTarget {
    /// `P` is the `2r`-jet of `sqrt(1 - b t^r + c t^{2r}) e^{2 pi i G(t)}`.
    #[default]
    Polynomial,
    /// `Q(t) e^{2 pi i G(t)}` with `Q` the `2r`-jet of the square root.
    SplitModulus,
}

#[derive(Clone, Debug)]
pub struct PolynomialNormalForm {
    pub target: PolyTarget,
    pub r: usize,
    pub b: Real,
    pub c: Real,
    /// `r`-jet of `g2 o phi`.
    pub g: RadialSeries,
    /// Radial factor of the target: `N1(z) = lambda z factor(|z|^2)`.
    pub factor: UniSeries,
    /// `F1(t) = t |factor(t)|^2`.
    pub f1: RadialSeries,
    /// One-dimensional conjugacy with the untruncated model `t - b t^{r+1} + c t^{2r+1}`.
    pub phi_model: RadialSeries,
    /// Conjugacy `(t, theta) -> (phi(t), theta + gamma(t))` to the polynomial target.
    pub phi: RadialSeries,
    pub gamma: RadialSeries,
    /// Order in `t` through which the conjugacy is certified.
    pub certified_order: usize,
    /// Max coefficient of `Phi o N1 - N2 o Phi` through degree `2 certified_order + 1`.
    pub residual: f64,
}

impl PolynomialNormalForm {
    /// `Phi(z) = z sqrt(phi(t)/t) e^{2 pi i gamma(t)}` with `t = |z|^2`.
    pub fn conjugacy_series(&self) -> Result<BiSeries> {
        conjugacy(&self.phi, &self.gamma, self.certified_order)
    }

    pub fn target_series(&self, lambda: &Cplx) -> Result<BiSeries> {
        let order = 2 * self.certified_order + 1;
        let prec = self.factor.prec();
        let factor = self.factor.with_order(self.certified_order);
        BiSeries::z(order, prec).mul(&BiSeries::from_radial_complex(&factor, order))?.mul(&BiSeries::constant(lambda.clone(), order, prec))
    }
}

fn conjugacy(phi: &RadialSeries, gamma: &RadialSeries, k: usize) -> Result<BiSeries> {
    let prec = phi.prec();
    let order = 2 * k + 1;
    let mut ratio = phi.shift_down(1)?.with_order(k);
    ratio.set(0, Float::with_val(prec, 1u32));
    let modulus = ratio.powf(&Float::with_val(prec, 0.5))?.to_complex();
    let factor = modulus.mul(&gamma.with_order(k).to_complex().exp_2pii()?)?;
    BiSeries::z(order, prec).mul(&BiSeries::from_radial_complex(&factor, order))
}

/// Conjugates a weak contraction `N2` to a polynomial normal form and certifies the conjugacy.
///
/// `N2` must have `|lambda| = 1` and `alpha` with leading term `alpha_r t^r`, so that
/// `|N2|^2` acts on `t = |z|^2` as `t - b t^{r+1} + ...` with `b = -2 alpha_r`.
/// The certified order is `order(alpha) - 2r - 1`.
pub fn polynomial_normal_form(n2: &NormalFormPair, target: PolyTarget) -> Result<PolynomialNormalForm> {
    let prec = n2.alpha.prec();
    let tol = tolerance_for(prec);
    let modulus_err = Float::with_val(prec, n2.lambda.norm_sqr() - 1u32).abs().to_f64();
    if modulus_err > tol {
        return Err(Error::Transform("polynomial normal form needs |lambda| = 1".into()));
    }
    let m = n2.alpha.order().min(n2.beta.order());
    let alpha = n2.alpha.with_order(m);
    let beta = n2.beta.with_order(m);
    let one = RadialSeries::one(m, prec);
    let opa = one.add(&alpha)?;
    let f2 = opa.mul(&opa)?.shift_up(1);

    let model = one_dim_conjugacy(&f2, None)?;
    let r = model.r;
    if m < 4 * r + 2 {
        return Err(Error::Transform(format!("order {m} too low for r = {r}; need at least {}", 4 * r + 2)));
    }
    let k = m - 2 * r - 1;
    let g = beta.with_order(model.phi.order()).compose(&model.phi)?.jet(r).with_order(m);

    // sqrt(1 - b t^r + c t^{2r})
    let mut under = RadialSeries::one(m, prec);
    under.set(r, Float::with_val(prec, -&model.b));
    under.set(2 * r, Float::with_val(prec, &model.c + under.coeff_ref(2 * r)));
    let root = under.powf(&Float::with_val(prec, 0.5))?.jet(2 * r);
    let rot = g.to_complex().exp_2pii()?;
    let (factor, f1, g1) = match target {
        PolyTarget::Polynomial => {
            let p = root.to_complex().mul(&rot)?.jet(2 * r);
            let pbar = UniSeries::from_coeffs(p.coeffs().iter().map(Cplx::conj).collect(), m, prec);
            let (modsq, _) = p.mul(&pbar)?.real_part();
            let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
            let mut g1 = RadialSeries::zero(m, prec);
            let logp = p.ln()?;
            for (i, c) in logp.coeffs().iter().enumerate() {
                g1.set(i, Float::with_val(prec, &c.im / &two_pi));
            }
            (p, modsq.shift_up(1), g1)
        }
        PolyTarget::SplitModulus => {
            let q = root.with_order(m);
            (q.to_complex().mul(&rot)?, q.mul(&q)?.shift_up(1), g.clone())
        }
    };
    let head = f1.jet(2 * r + 1);
    let mut expected = RadialSeries::x(m, prec);
    expected.set(r + 1, Float::with_val(prec, -&model.b));
    expected.set(2 * r + 1, model.c.clone());
    let head_err = head.sub(&expected)?.max_abs();
    if head_err > tol * 1e6 {
        return Err(Error::Transform(format!("target does not match the model jet: {head_err:e}")));
    }
    let completion = f1.sub(&head)?;
    let full = one_dim_conjugacy(&f2, Some(&completion))?;
    let phi = full.phi;
    let n = phi.order();
    let rhs = beta.with_order(n).compose(&phi)?.sub(&g1.with_order(n))?;
    let gamma = solve_gamma(&f1.with_order(n), &rhs)?.gamma;

    let order = 2 * k + 1;
    let phi_series = conjugacy(&phi, &gamma, k)?;
    let target_series = {
        let factor = factor.with_order(k);
        BiSeries::z(order, prec)
            .mul(&BiSeries::from_radial_complex(&factor, order))?
            .mul(&BiSeries::constant(n2.lambda.clone(), order, prec))?
    };
    let n2_series = n2.as_series(order)?;
    let lhs = phi_series.substitute(&target_series, &target_series.conj_transpose())?;
    let rhs = n2_series.substitute(&phi_series, &phi_series.conj_transpose())?;
    let residual = lhs.sub(&rhs)?.max_abs();

    Ok(PolynomialNormalForm {
        target,
        r,
        b: model.b,
        c: model.c,
        g: g.jet(r).with_order(r),
        factor: factor.with_order(2 * r),
        f1,
        phi_model: model.phi,
        phi,
        gamma,
        certified_order: k,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn pair(alpha: &[f64], beta: &[f64], order: usize) -> NormalFormPair {
        NormalFormPair {
            alpha: RadialSeries::from_f64(alpha, order, P),
            beta: RadialSeries::from_f64(beta, order, P),
            lambda: Cplx::exp_2pii(&Float::with_val(P, 0.618033988749895)),
        }
    }

    #[test]
    fn certifies_polynomial_target() {
        let n2 = pair(&[0.0, -1.0, 0.2, 0.05], &[0.0, 0.3, -0.1, 0.02], 12);
        let nf = polynomial_normal_form(&n2, PolyTarget::Polynomial).unwrap();
        assert_eq!(nf.r, 1);
        assert!((nf.b.to_f64() - 2.0).abs() < 1e-60);
        assert_eq!(nf.certified_order, 9);
        assert!(nf.residual < 1e-40, "{:e}", nf.residual);
        assert_eq!(nf.factor.order(), 2);
        // P(0) = 1 and |P|^2 = 1 - b t + c t^2 + O(t^3)
        assert!((nf.f1.coeff(2).to_f64() + nf.b.to_f64()).abs() < 1e-60);
    }

    #[test]
    fn certifies_split_target_with_r_two() {
        let n2 = pair(&[0.0, 0.0, -0.5, 0.1], &[0.0, 0.2, 0.4], 14);
        let nf = polynomial_normal_form(&n2, PolyTarget::SplitModulus).unwrap();
        assert_eq!(nf.r, 2);
        assert!(nf.residual < 1e-40, "{:e}", nf.residual);
    }

    #[test]
    fn g_independent_of_completion() {
        let n2 = pair(&[0.0, -1.0, 0.2], &[0.0, 0.3, -0.1], 12);
        let a = polynomial_normal_form(&n2, PolyTarget::Polynomial).unwrap();
        let b = polynomial_normal_form(&n2, PolyTarget::SplitModulus).unwrap();
        assert!(a.g.sub(&b.g).unwrap().max_abs() < 1e-70);
        assert_eq!(a.c, b.c);
    }

    #[test]
    fn rejects_rotation_modulus() {
        let mut n2 = pair(&[0.0, -1.0], &[0.0, 0.3], 12);
        n2.lambda = n2.lambda.scale_f64(0.5);
        assert!(polynomial_normal_form(&n2, PolyTarget::Polynomial).is_err());
    }
}
