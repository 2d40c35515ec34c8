//! One-dimensional conjugacies of radial maps `t -> t - b t^{r+1} + ...` in `t = |z|^2`.

use rug::Float;

use crate::error::{Error, Result};
use crate::precision::{tolerance_for, Real};
use crate::series::RadialSeries;

/// `phi` with `F2 o phi = phi o F1`, where `F1 = t - b t^{r+1} + c t^{2r+1} + completion`.
#[derive(Clone, Debug)]
pub struct OneDimConjugacy {
    /// Tangent to the identity, known through degree `order(F2) - r`; `phi_{r+1} = 0`.
    pub phi: RadialSeries,
    pub r: usize,
    pub b: Real,
    pub c: Real,
    pub f1: RadialSeries,
    /// Max coefficient of `F2 o phi - phi o F1` through the order of `F2`.
    pub residual: f64,
}

/// `(r, b)` for `F(t) = t - b t^{r+1} + O(t^{r+2})`.
pub fn leading_contraction(f: &RadialSeries) -> Result<(usize, Real)> {
    let prec = f.prec();
    let tol = tolerance_for(prec);
    if f.coeff(0).to_f64().abs() > tol || (f.coeff(1).to_f64() - 1.0).abs() > tol {
        return Err(Error::Transform("radial map must be t + O(t^2)".into()));
    }
    let scale = f.max_abs().max(1.0);
    let r = (2..=f.order())
        .find(|&k| f.coeff(k).to_f64().abs() > tol * scale)
        .ok_or_else(|| Error::Transform("radial map is the identity to this order".into()))?
        - 1;
    Ok((r, -f.coeff(r + 1)))
}

fn residual_series(f2: &RadialSeries, phi: &RadialSeries, f1: &RadialSeries) -> Result<RadialSeries> {
    f2.compose(phi)?.sub(&phi.compose(f1)?)
}

/// Solves `F2 o phi = phi o F1` degree by degree.
///
/// `phi_k` is fixed by the degree `k + r` equation with coefficient `b (k - r - 1)`; at
/// `k = r + 1` that coefficient vanishes, `phi_{r+1}` is set to zero and the equation fixes `c`.
/// `completion`, if given, is added to `F1` and must start at degree `2r + 2`.
pub fn one_dim_conjugacy(f2: &RadialSeries, completion: Option<&RadialSeries>) -> Result<OneDimConjugacy> {
    let prec = f2.prec();
    let order = f2.order();
    let (r, b) = leading_contraction(f2)?;
    if 2 * r + 1 > order {
        return Err(Error::Transform(format!("order {order} too low for contraction degree r = {r}")));
    }
    let mut base = RadialSeries::x(order, prec);
    base.set(r + 1, Float::with_val(prec, -&b));
    let tail = match completion {
        Some(c) => {
            let c = c.with_order(order);
            if c.coeffs()[..=2 * r + 1].iter().any(|x| !x.is_zero()) {
                return Err(Error::Transform("completion must start at degree 2r+2".into()));
            }
            c
        }
        None => RadialSeries::zero(order, prec),
    };
    let mut c = Float::new(prec);
    let mut phi = RadialSeries::x(order, prec);
    let build_f1 = |c: &Real| -> Result<RadialSeries> {
        let mut f1 = base.add(&tail)?;
        f1.set(2 * r + 1, c.clone());
        Ok(f1)
    };
    for k in 2..=(order - r) {
        let n = k + r;
        let res = residual_series(f2, &phi, &build_f1(&c)?)?;
        let rn = res.coeff(n);
        if k == r + 1 {
            c += rn;
        } else {
            let w = Float::with_val(prec, &b * (k as i64 - r as i64 - 1));
            phi.set(k, -(rn / w));
        }
    }
    let f1 = build_f1(&c)?;
    let residual = residual_series(f2, &phi, &f1)?.max_abs();
    Ok(OneDimConjugacy { phi: phi.with_order(order - r), r, b, c, f1, residual })
}

/// `gamma` with `gamma o F1 - gamma = rhs`, plus the residual of that equation.
#[derive(Clone, Debug)]
pub struct GammaSolution {
    pub gamma: RadialSeries,
    pub residual: f64,
}

/// Inverts `gamma -> gamma o F1 - gamma` on `t R[[t]]`.
///
/// With `F1 = t + t u(t)`, `gamma o F1 - gamma = u (E gamma + sum_{k>=2} T_k gamma)` where
/// `E = t d/dt` and `T_k = u^{k-1} t^k (d/dt)^k / k!`, so
/// `gamma = sum_l (-1)^l (E^{-1} T)^l E^{-1} (rhs / u)`.
/// `rhs` must vanish through degree `r`. The result is known through degree `order(F1) - 1 - r`.
pub fn solve_gamma(f1: &RadialSeries, rhs: &RadialSeries) -> Result<GammaSolution> {
    let prec = f1.prec();
    let order = f1.order();
    let (r, _) = leading_contraction(f1)?;
    let rhs = rhs.with_order(order);
    let tol = tolerance_for(prec) * rhs.max_abs().max(1.0);
    if let Some(k) = rhs.coeffs()[..=r.min(order)].iter().position(|c| c.to_f64().abs() > tol) {
        return Err(Error::Transform(format!("right-hand side has a term of degree {k} <= r = {r}")));
    }
    if order < r + 2 {
        return Err(Error::Transform("order too low to solve for gamma".into()));
    }
    let out_order = order - 1 - r;
    let u = f1.sub(&RadialSeries::x(order, prec))?.shift_down(1)?;
    let den = u.shift_down(r)?.with_order(out_order);
    let mut num = rhs.clone();
    for k in 0..=r {
        num.set(k, Float::new(prec));
    }
    let num = num.shift_down(r)?.with_order(out_order);
    let w = num.mul(&den.reciprocal()?)?;
    let u = u.with_order(out_order);

    let e_inv = |y: &RadialSeries| -> RadialSeries {
        let mut out = RadialSeries::zero(out_order, prec);
        for n in 1..=out_order {
            out.set(n, Float::with_val(prec, y.coeff_ref(n) / (n as u64)));
        }
        out
    };
    let t_sum = |y: &RadialSeries| -> Result<RadialSeries> {
        let mut acc = RadialSeries::zero(out_order, prec);
        let mut upow = u.clone();
        for k in 2..=out_order {
            // t^k y^{(k)} / k! has coefficients binom(n, k) y_n
            let mut dk = RadialSeries::zero(out_order, prec);
            let mut any = false;
            for n in k..=out_order {
                if !y.coeff_ref(n).is_zero() {
                    dk.set(n, Float::with_val(prec, y.coeff_ref(n) * binomial(n, k, prec)));
                    any = true;
                }
            }
            if any {
                acc = acc.add(&upow.mul(&dk)?)?;
            }
            upow = upow.mul(&u)?;
            if upow.is_zero() {
                break;
            }
        }
        Ok(acc)
    };

    let mut term = e_inv(&w);
    let mut gamma = term.clone();
    for _ in 0..=out_order {
        term = e_inv(&t_sum(&term)?).neg();
        if term.is_zero() {
            break;
        }
        gamma = gamma.add(&term)?;
    }
    let lhs = gamma.with_order(order).compose(f1)?.sub(&gamma.with_order(order))?;
    let residual = lhs.sub(&rhs)?.jet(order - 1).max_abs();
    Ok(GammaSolution { gamma, residual })
}

fn binomial(n: usize, k: usize, prec: u32) -> Real {
    let mut acc = Float::with_val(prec, 1u32);
    for i in 0..k {
        acc *= (n - i) as u64;
        acc /= (i + 1) as u64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    #[test]
    fn leading_contraction_reads_r_and_b() {
        let f = RadialSeries::from_f64(&[0.0, 1.0, 0.0, -0.5, 0.1], 6, P);
        let (r, b) = leading_contraction(&f).unwrap();
        assert_eq!(r, 2);
        assert_eq!(b.to_f64(), 0.5);
        assert!(leading_contraction(&RadialSeries::x(5, P)).is_err());
    }

    #[test]
    fn conjugacy_satisfies_equation() {
        let f2 = RadialSeries::from_f64(&[0.0, 1.0, -2.0, 1.0, 0.3, -0.7], 12, P);
        let sol = one_dim_conjugacy(&f2, None).unwrap();
        assert_eq!(sol.r, 1);
        assert!(sol.residual < 1e-60, "{:e}", sol.residual);
        assert!(sol.phi.coeff(2).is_zero());
        assert_eq!(sol.phi.coeff(1).to_f64(), 1.0);
    }

    #[test]
    fn c_is_invariant_of_f2() {
        // f2 already in the model form: phi is the identity and c is read off.
        let f2 = RadialSeries::from_f64(&[0.0, 1.0, 0.0, -1.0, 0.0, 0.25], 10, P);
        let sol = one_dim_conjugacy(&f2, None).unwrap();
        assert_eq!(sol.r, 2);
        assert!((sol.c.to_f64() - 0.25).abs() < 1e-60);
        assert!(sol.phi.sub(&RadialSeries::x(sol.phi.order(), P)).unwrap().max_abs() < 1e-60);
    }

    #[test]
    fn completion_affects_only_late_terms() {
        let f2 = RadialSeries::from_f64(&[0.0, 1.0, -1.0, 0.5, 0.2, 0.1, -0.3], 12, P);
        let a = one_dim_conjugacy(&f2, None).unwrap();
        let tail = RadialSeries::monomial(4, Float::with_val(P, 3), 12, P);
        let b = one_dim_conjugacy(&f2, Some(&tail)).unwrap();
        assert!(b.residual < 1e-60);
        assert_eq!(a.c, b.c);
        let r = a.r;
        assert!(a.phi.jet(r + 1).sub(&b.phi.jet(r + 1)).unwrap().max_abs() < 1e-70);
        assert!((a.phi.coeff(r + 2).to_f64() - b.phi.coeff(r + 2).to_f64()).abs() > 1e-3);
        let bad = RadialSeries::monomial(2, Float::with_val(P, 1), 12, P);
        assert!(one_dim_conjugacy(&f2, Some(&bad)).is_err());
    }

    #[test]
    fn gamma_leading_term() {
        // F1 = t - b t^2, rhs = t^2: gamma = -t / b + O(t^2)
        let b = 0.75;
        let f1 = RadialSeries::from_f64(&[0.0, 1.0, -b], 12, P);
        let rhs = RadialSeries::from_f64(&[0.0, 0.0, 1.0], 12, P);
        let sol = solve_gamma(&f1, &rhs).unwrap();
        assert!((sol.gamma.coeff(1).to_f64() + 1.0 / b).abs() < 1e-60);
        assert!(sol.residual < 1e-60, "{:e}", sol.residual);
    }

    #[test]
    fn gamma_general_and_rejects_low_terms() {
        let f1 = RadialSeries::from_f64(&[0.0, 1.0, 0.0, -2.0, 0.5, 0.3], 14, P);
        let rhs = RadialSeries::from_f64(&[0.0, 0.0, 0.0, 1.0, -1.0, 0.25, 2.0], 14, P);
        let sol = solve_gamma(&f1, &rhs).unwrap();
        assert!(sol.residual < 1e-60, "{:e}", sol.residual);
        let low = RadialSeries::from_f64(&[0.0, 0.0, 1.0], 14, P);
        assert!(solve_gamma(&f1, &low).is_err());
    }
}
