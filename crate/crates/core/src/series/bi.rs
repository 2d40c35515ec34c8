//! Truncated power series in the two conjugate variables `z`, `zbar`.

use num_complex::Complex64;
use rug::Float;

use super::uni::{RadialSeries, UniSeries};
use crate::error::{Error, Result};
use crate::precision::{Cplx, Precision, Real};

/// Position of `z^j zbar^k` in the dense triangular layout (grouped by total degree).
#[inline]
pub fn index(j: usize, k: usize) -> usize {
    let l = j + k;
    l * (l + 1) / 2 + k
}

#[inline]
fn layout_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Inverse of [`index`].
fn unindex(i: usize) -> (usize, usize) {
    let mut l = 0;
    while (l + 1) * (l + 2) / 2 <= i {
        l += 1;
    }
    let k = i - l * (l + 1) / 2;
    (l - k, k)
}

/// `sum c_{jk} z^j zbar^k` over `j + k <= order`.
///
/// The `real` flag records that the series represents a real-valued function,
/// i.e. `c_{kj} = conj(c_{jk})`. It is propagated conservatively by the ring
/// operations; [`BiSeries::symmetrize`] re-imposes it after lossy steps.
#[derive(Clone, Debug, PartialEq)]
pub struct BiSeries {
    order: usize,
    prec: u32,
    coeffs: Vec<Cplx>,
    real: bool,
}

impl BiSeries {
    pub fn zero(order: usize, prec: u32) -> Self {
        BiSeries { order, prec, coeffs: vec![Cplx::zero(prec); layout_len(order)], real: true }
    }

    pub fn one(order: usize, prec: u32) -> Self {
        Self::constant(Cplx::one(prec), order, prec)
    }

    pub fn constant(c: Cplx, order: usize, prec: u32) -> Self {
        let real = c.im.is_zero();
        let mut s = Self::zero(order, prec);
        s.coeffs[0] = c;
        s.real = real;
        s
    }

    pub fn monomial(j: usize, k: usize, c: Cplx, order: usize, prec: u32) -> Self {
        let mut s = Self::zero(order, prec);
        s.real = j == k && c.im.is_zero();
        if j + k <= order {
            s.coeffs[index(j, k)] = c;
        }
        s
    }

    /// The coordinate `z`.
    pub fn z(order: usize, prec: u32) -> Self {
        Self::monomial(1, 0, Cplx::one(prec), order, prec)
    }

    /// The coordinate `zbar`.
    pub fn zbar(order: usize, prec: u32) -> Self {
        Self::monomial(0, 1, Cplx::one(prec), order, prec)
    }

    /// Builds from `(j, k, c)` terms; terms beyond the order are dropped and the
    /// reality flag is detected from the coefficients.
    pub fn from_terms<I>(terms: I, order: usize, prec: u32) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Cplx)>,
    {
        let mut s = Self::zero(order, prec);
        for (j, k, c) in terms {
            if j + k <= order {
                s.coeffs[index(j, k)] += &c;
            }
        }
        s.real = s.asymmetry() == 0.0;
        s
    }

    /// Embeds a radial series `sum c_s u^s`, `u = z zbar`.
    pub fn from_radial(r: &RadialSeries, order: usize) -> Self {
        let mut s = Self::zero(order, r.prec());
        for (p, c) in r.coeffs().iter().enumerate() {
            if 2 * p <= order {
                s.coeffs[index(p, p)] = Cplx::from_real(c.clone());
            }
        }
        s
    }

    /// Embeds a complex series in `u = z zbar`.
    pub fn from_radial_complex(r: &UniSeries, order: usize) -> Self {
        let mut s = Self::zero(order, r.prec());
        for (p, c) in r.coeffs().iter().enumerate() {
            if 2 * p <= order {
                s.coeffs[index(p, p)] = c.clone();
            }
        }
        s.real = r.coeffs().iter().all(|c| c.im.is_zero());
        s
    }

    /// Embeds a holomorphic series `sum c_j z^j`.
    pub fn from_holomorphic(h: &UniSeries, order: usize) -> Self {
        let mut s = Self::zero(order, h.prec());
        for (j, c) in h.coeffs().iter().enumerate() {
            if j <= order {
                s.coeffs[index(j, 0)] = c.clone();
            }
        }
        s.real = s.asymmetry() == 0.0;
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Overrides the reality flag without touching coefficients.
    pub fn set_real(&mut self, real: bool) {
        self.real = real;
    }

    pub fn coeff(&self, j: usize, k: usize) -> Cplx {
        if j + k <= self.order {
            self.coeffs[index(j, k)].clone()
        } else {
            Cplx::zero(self.prec)
        }
    }

    pub fn coeff_ref(&self, j: usize, k: usize) -> &Cplx {
        &self.coeffs[index(j, k)]
    }

    pub fn set(&mut self, j: usize, k: usize, c: Cplx) {
        if j + k <= self.order {
            self.coeffs[index(j, k)] = c;
        }
    }

    pub fn add_at(&mut self, j: usize, k: usize, c: &Cplx) {
        if j + k <= self.order {
            self.coeffs[index(j, k)] += c;
        }
    }

    /// Nonzero terms `(j, k, c)` ordered by total degree, then by `k`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &Cplx)> {
        let order = self.order;
        (0..=order).flat_map(move |l| (0..=l).map(move |k| (l - k, k))).filter_map(move |(j, k)| {
            let c = &self.coeffs[index(j, k)];
            (!c.is_zero()).then_some((j, k, c))
        })
    }

    fn nonzero_indices(&self) -> Vec<(usize, usize, usize)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| {
                let (j, k) = unindex(i);
                (j, k, i)
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude among monomials of total degree `l`.
    pub fn max_abs_degree(&self, l: usize) -> f64 {
        if l > self.order {
            return 0.0;
        }
        (0..=l).map(|k| self.coeffs[index(l - k, k)].abs_f64()).fold(0.0, f64::max)
    }

    /// Lowest total degree carrying a coefficient above `tol`.
    pub fn valuation(&self, tol: f64) -> Option<usize> {
        (0..=self.order).find(|&l| self.max_abs_degree(l) > tol)
    }

    /// Same series zero-padded or truncated to a new order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut s = Self::zero(order, self.prec);
        for l in 0..=order.min(self.order) {
            for k in 0..=l {
                s.coeffs[index(l - k, k)] = self.coeffs[index(l - k, k)].clone();
            }
        }
        s.real = self.real;
        s
    }

    /// Zeroes every monomial of total degree above `l`.
    pub fn jet(&self, l: usize) -> Self {
        let mut s = self.clone();
        for i in layout_len(l.min(self.order))..s.coeffs.len() {
            s.coeffs[i] = Cplx::zero(self.prec);
        }
        s
    }

    /// Homogeneous component of total degree `l`.
    pub fn degree_part(&self, l: usize) -> Self {
        let mut s = Self::zero(self.order, self.prec);
        if l <= self.order {
            for k in 0..=l {
                s.coeffs[index(l - k, k)] = self.coeffs[index(l - k, k)].clone();
            }
        }
        s.real = self.real;
        s
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
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect();
        Ok(BiSeries { order: self.order, prec: self.prec, coeffs, real: self.real && o.real })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect();
        Ok(BiSeries { order: self.order, prec: self.prec, coeffs, real: self.real && o.real })
    }

    /// `self += c * o`.
    pub fn add_scaled(&mut self, c: &Cplx, o: &Self) -> Result<()> {
        self.check(o)?;
        for (a, b) in self.coeffs.iter_mut().zip(&o.coeffs) {
            if !b.is_zero() {
                a.mul_add_assign(c, b);
            }
        }
        self.real = self.real && o.real && c.im.is_zero();
        Ok(())
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|c| -c).collect();
        BiSeries { order: self.order, prec: self.prec, coeffs, real: self.real }
    }

    pub fn scale(&self, c: &Cplx) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        BiSeries { order: self.order, prec: self.prec, coeffs, real: self.real && c.im.is_zero() }
    }

    pub fn scale_real(&self, r: &Real) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x.scale(r)).collect();
        BiSeries { order: self.order, prec: self.prec, coeffs, real: self.real }
    }

    /// Truncated product; monomials of total degree above the order are discarded.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let a = self.nonzero_indices();
        let b = o.nonzero_indices();
        let mut out = Self::zero(self.order, self.prec);
        for &(j1, k1, i1) in &a {
            let budget = self.order - (j1 + k1);
            let ca = &self.coeffs[i1];
            for &(j2, k2, i2) in &b {
                if j2 + k2 > budget {
                    // `b` is sorted by total degree
                    break;
                }
                out.coeffs[index(j1 + j2, k1 + k2)].mul_add_assign(ca, &o.coeffs[i2]);
            }
        }
        out.real = self.real && o.real;
        Ok(out)
    }

    /// Multiplies by `z^a zbar^b`, dropping what falls beyond the order.
    pub fn shift(&self, a: usize, b: usize) -> Self {
        let mut out = Self::zero(self.order, self.prec);
        for (j, k, c) in self.terms() {
            if j + k + a + b <= self.order {
                out.coeffs[index(j + a, k + b)] = c.clone();
            }
        }
        out.real = self.real && a == b;
        out
    }

    /// `conj(s(z, zbar))` expressed as a series: coefficient `(j,k)` becomes `conj(c_{kj})`.
    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zero(self.order, self.prec);
        for l in 0..=self.order {
            for k in 0..=l {
                let j = l - k;
                out.coeffs[index(j, k)] = self.coeffs[index(k, j)].conj();
            }
        }
        out.real = self.real;
        out
    }

    /// Largest `|c_{kj} - conj(c_{jk})|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for l in 0..=self.order {
            for k in 0..=l {
                let j = l - k;
                if j < k {
                    continue;
                }
                let d = &self.coeffs[index(k, j)] - &self.coeffs[index(j, k)].conj();
                worst = worst.max(d.abs_f64());
            }
        }
        worst
    }

    /// Forces `c_{kj} = conj(c_{jk})` by averaging, sets the reality flag and
    /// returns the asymmetry that was removed.
    pub fn symmetrize(&mut self) -> f64 {
        let residue = self.asymmetry();
        let ct = self.conj_transpose();
        for (a, b) in self.coeffs.iter_mut().zip(&ct.coeffs) {
            *a += b;
            a.re /= 2u32;
            a.im /= 2u32;
        }
        self.real = true;
        if residue > 0.0 {
            log::debug!("symmetrize: removed asymmetry {residue:e} at order {}", self.order);
        }
        residue
    }

    /// `exp(2 pi i s)` truncated to the order. Requires a zero constant term.
    ///
    /// Uses the Euler-operator identity `E e^w = (E w) e^w` on homogeneous
    /// components: `l e_l = sum_{m=1}^{l} m w_m e_{l-m}`.
    pub fn exp_2pii(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstant { context: "exp_2pii" });
        }
        let p = self.prec;
        let two_pi = Precision::new(p)?.pi() * 2u32;
        let two_pi_i = Cplx::new(Float::new(p), two_pi);
        // weighted[m] holds m * w_m for each monomial of degree m
        let mut weighted = Self::zero(self.order, p);
        for (j, k, c) in self.terms() {
            let w = c * &two_pi_i;
            weighted.coeffs[index(j, k)] = w.scale_f64((j + k) as f64);
        }
        let wn = weighted.nonzero_indices();
        let mut out = Self::one(self.order, p);
        for l in 1..=self.order {
            let mut acc: Vec<Cplx> = vec![Cplx::zero(p); l + 1];
            for &(j1, k1, i1) in &wn {
                let m = j1 + k1;
                if m > l {
                    break;
                }
                let rest = l - m;
                for k2 in 0..=rest {
                    let j2 = rest - k2;
                    let e = &out.coeffs[index(j2, k2)];
                    if e.is_zero() {
                        continue;
                    }
                    acc[k1 + k2].mul_add_assign(&weighted.coeffs[i1], e);
                }
            }
            let inv = Float::with_val(p, 1) / (l as u64);
            for (k, c) in acc.into_iter().enumerate() {
                out.coeffs[index(l - k, k)] = c.scale(&inv);
            }
        }
        out.real = false;
        Ok(out)
    }

    /// `s(F, Fbar)`: every monomial `z^j zbar^k` becomes `F^j Fbar^k`.
    pub fn substitute(&self, f: &Self, fbar: &Self) -> Result<Self> {
        self.check(f)?;
        self.check(fbar)?;
        if !f.coeffs[0].is_zero() || !fbar.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstant { context: "substitute" });
        }
        let n = self.order;
        let mut fbar_pow = Vec::with_capacity(n + 1);
        fbar_pow.push(Self::one(n, self.prec));
        for k in 1..=n {
            let next = fbar_pow[k - 1].mul(fbar)?;
            fbar_pow.push(next);
        }
        // Horner in F over the zbar-polynomials T_j = sum_k c_{jk} Fbar^k.
        let row = |j: usize| -> Result<Self> {
            let mut t = Self::zero(n, self.prec);
            for k in 0..=(n - j) {
                let c = &self.coeffs[index(j, k)];
                if !c.is_zero() {
                    t.add_scaled(c, &fbar_pow[k])?;
                }
            }
            Ok(t)
        };
        let mut acc = row(n)?;
        for j in (0..n).rev() {
            acc = acc.mul(f)?;
            acc = acc.add(&row(j)?)?;
        }
        acc.real = self.real && *fbar == f.conj_transpose();
        Ok(acc)
    }

    /// Diagonal part `sum c_pp u^p` (complex) and the off-diagonal remainder.
    pub fn diagonal(&self) -> (UniSeries, Self) {
        let mut diag = UniSeries::zero(self.order / 2, self.prec);
        let mut rest = self.clone();
        for p in 0..=self.order / 2 {
            diag.set(p, self.coeffs[index(p, p)].clone());
            rest.coeffs[index(p, p)] = Cplx::zero(self.prec);
        }
        (diag, rest)
    }

    /// Resonant (diagonal) part as a real radial series, plus the remainder.
    /// Any imaginary residue on the diagonal is logged and dropped.
    pub fn resonant_part(&self) -> (RadialSeries, Self) {
        let (diag, rest) = self.diagonal();
        let (radial, residue) = diag.real_part();
        if residue > 0.0 {
            log::debug!("resonant_part: dropped imaginary diagonal residue {residue:e}");
        }
        (radial, rest)
    }

    /// `s(z, 0) = sum c_{j0} z^j`.
    pub fn holomorphic_part(&self) -> UniSeries {
        let coeffs = (0..=self.order).map(|j| self.coeffs[index(j, 0)].clone()).collect();
        UniSeries::from_coeffs(coeffs, self.order, self.prec)
    }

    /// Evaluates at a point at working precision.
    pub fn eval(&self, z: &Cplx) -> Cplx {
        let zb = z.conj();
        let n = self.order;
        let mut zp = vec![Cplx::one(self.prec)];
        let mut zbp = vec![Cplx::one(self.prec)];
        for i in 1..=n {
            zp.push(&zp[i - 1] * z);
            zbp.push(&zbp[i - 1] * &zb);
        }
        let mut acc = Cplx::zero(self.prec);
        for (j, k, c) in self.terms() {
            acc.mul_add_assign(c, &(&zp[j] * &zbp[k]));
        }
        acc
    }

    pub fn eval_c64(&self, z: Complex64) -> Complex64 {
        let zb = z.conj();
        let n = self.order;
        let zp: Vec<Complex64> = (0..=n).map(|i| z.powu(i as u32)).collect();
        let zbp: Vec<Complex64> = (0..=n).map(|i| zb.powu(i as u32)).collect();
        self.terms().map(|(j, k, c)| c.to_c64() * zp[j] * zbp[k]).sum()
    }
}

#[cfg(test)]
impl BiSeries {
    fn with_real(mut self, real: bool) -> Self {
        self.real = real;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u32 = 256;

    fn c(re: f64, im: f64) -> Cplx {
        Cplx::from_f64(re, im, P)
    }

    fn random_series(rng: &mut ChaCha8Rng, order: usize, constant: bool) -> BiSeries {
        let mut terms = Vec::new();
        for l in usize::from(!constant)..=order {
            for k in 0..=l {
                terms.push((l - k, k, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            }
        }
        BiSeries::from_terms(terms, order, P)
    }

    #[test]
    fn layout_round_trip() {
        for i in 0..200 {
            let (j, k) = unindex(i);
            assert_eq!(index(j, k), i);
        }
    }

    #[test]
    fn z_times_zbar_is_u() {
        let p = BiSeries::z(3, P).mul(&BiSeries::zbar(3, P)).unwrap();
        assert_eq!(p.coeff(1, 1), c(1.0, 0.0));
        assert_eq!(p.terms().count(), 1);
        assert!(p.mul(&BiSeries::zero(3, P)).unwrap().is_zero());
    }

    #[test]
    fn binomial_product_hand_expansion() {
        let one = BiSeries::one(2, P);
        let a = one.add(&BiSeries::z(2, P)).unwrap();
        let b = one.add(&BiSeries::zbar(2, P)).unwrap();
        let p = a.mul(&b).unwrap();
        for (j, k) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            assert_eq!(p.coeff(j, k), c(1.0, 0.0));
        }
        assert!(p.coeff(2, 0).is_zero() && p.coeff(0, 2).is_zero());
    }

    #[test]
    fn exp_of_u_factorial_oracle() {
        let s = BiSeries::monomial(1, 1, c(1.0, 0.0), 4, P);
        let e = s.exp_2pii().unwrap();
        let pi = std::f64::consts::PI;
        assert!((e.coeff(0, 0).to_c64() - Complex64::new(1.0, 0.0)).norm() < 1e-70);
        assert!((e.coeff(1, 1).to_c64() - Complex64::new(0.0, 2.0 * pi)).norm() < 1e-14);
        assert!((e.coeff(2, 2).to_c64() - Complex64::new(-2.0 * pi * pi, 0.0)).norm() < 1e-13);
        assert_eq!(e.terms().count(), 3);
    }

    #[test]
    fn exp_of_imaginary_part() {
        // s = (z - zbar)/2i: 2 pi i s = pi (z - zbar)
        let half_i = c(0.0, -0.5);
        let s = BiSeries::from_terms([(1, 0, half_i.clone()), (0, 1, -&half_i)], 2, P);
        let e = s.exp_2pii().unwrap();
        let pi = std::f64::consts::PI;
        let expect = [((1, 0), pi), ((0, 1), -pi), ((2, 0), pi * pi / 2.0), ((1, 1), -pi * pi), ((0, 2), pi * pi / 2.0)];
        for ((j, k), v) in expect {
            assert!((e.coeff(j, k).to_c64() - Complex64::new(v, 0.0)).norm() < 1e-13, "({j},{k})");
        }
    }

    #[test]
    fn exp_requires_zero_constant() {
        let s = BiSeries::one(3, P);
        assert!(matches!(s.exp_2pii(), Err(Error::NonzeroConstant { .. })));
    }

    #[test]
    fn substitute_linear_map_scales_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_series(&mut rng, 5, true);
        let lam = Cplx::exp_2pii(&Float::with_val(P, 0.3));
        let f = BiSeries::z(5, P).scale(&lam);
        let fb = f.conj_transpose();
        let out = s.substitute(&f, &fb).unwrap();
        for (j, k, coef) in s.terms() {
            let mu = &lam.powi(j as i64) * &lam.conj().powi(k as i64);
            assert!((&out.coeff(j, k) - &(coef * &mu)).abs_f64() < 1e-70);
        }
    }

    #[test]
    fn substitute_identity_slot() {
        let f = BiSeries::z(2, P).add(&BiSeries::monomial(2, 0, c(1.0, 0.0), 2, P)).unwrap();
        let fb = f.conj_transpose();
        let out = BiSeries::z(2, P).substitute(&f, &fb).unwrap();
        assert_eq!(out, f.clone().with_real(out.is_real()));
    }

    #[test]
    fn substitute_matches_pointwise_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_series(&mut rng, 6, true);
        let f = random_series(&mut rng, 6, false);
        let fb = f.conj_transpose();
        let comp = s.substitute(&f, &fb).unwrap();
        for _ in 0..10 {
            let z = Complex64::from_polar(rng.gen_range(0.0..0.01), rng.gen_range(0.0..6.3));
            let w = f.eval_c64(z);
            let direct = s.eval_c64(w);
            let series = comp.eval_c64(z);
            // truncation error is O(|z|^7)
            assert!((direct - series).norm() < 1e-9, "{direct} vs {series}");
        }
    }

    #[test]
    fn resonant_and_holomorphic_parts() {
        let s = BiSeries::from_terms([(1, 1, c(1.0, 0.0)), (2, 0, c(1.0, 0.0))], 3, P);
        let (diag, rest) = s.resonant_part();
        assert_eq!(diag.coeff(1), Float::with_val(P, 1));
        assert_eq!(rest.coeff(2, 0), c(1.0, 0.0));
        assert!(rest.coeff(1, 1).is_zero());
        let h = s.holomorphic_part();
        assert_eq!(h.coeff(2), c(1.0, 0.0));
        assert!(BiSeries::monomial(2, 1, c(1.0, 0.0), 3, P).holomorphic_part().is_zero());
    }

    #[test]
    fn symmetrize_restores_reality() {
        let mut s = BiSeries::from_terms([(1, 0, c(1.0, 2.0)), (0, 1, c(1.0, -2.0 + 1e-10))], 2, P);
        assert!(s.asymmetry() > 0.0);
        let r = s.symmetrize();
        assert!((r - 1e-10).abs() < 1e-15);
        assert_eq!(s.asymmetry(), 0.0);
        assert!(s.is_real());
    }
}
