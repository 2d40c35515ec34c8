//! Homological equation `g - n + phi o F - phi = 0`, solved degree by degree.
//!
//! A special normalization `Phi(z) = z e^{2 pi i phi(z)}` conjugates
//! `F(z) = lambda z (1 + f) e^{2 pi i g}` to `N(z) = lambda z (1 + f) e^{2 pi i n(|z|^2)}`.

use std::collections::HashMap;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::FoliationMap;
use crate::precision::{format_real, Cplx, Precision, Real};
use crate::series::{BiSeries, RadialSeries, UniSeries};

/// Choice of the free diagonal coefficients `phi_pp`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum Gauge {
    /// `phi_pp = 0`.
    Basic,
    /// `phi_pp` chosen so that `n_s = 0` for every `s > d`, `d` the valuation of `f`.
    KillTorsionAboveD,
    /// `phi_pp = values[p - 1]` (zero past the end of the list).
    CustomDiagonal(Vec<f64>),
    /// `|lambda| < 1`: every coefficient determined, `n = 0`.
    StrongContraction,
    /// Like `KillTorsionAboveD` with `n_s = values[s - 1]` for `s > d`.
    PrescribedTorsion(Vec<f64>),
}

impl Gauge {
    pub fn name(&self) -> &'static str {
        match self {
            Gauge::Basic => "basic",
            Gauge::KillTorsionAboveD => "kill_torsion_above_d",
            Gauge::CustomDiagonal(_) => "custom_diagonal",
            Gauge::StrongContraction => "strong_contraction",
            Gauge::PrescribedTorsion(_) => "prescribed_torsion",
        }
    }
}

/// Smallest `|lambda^p lambdabar^q - 1|` met at one total degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallDivisor {
    pub degree: usize,
    pub value: f64,
}

/// Output of the solver with its conjugacy certificate.
#[derive(Clone, Debug)]
pub struct Normalization {
    pub phi: BiSeries,
    pub n: RadialSeries,
    pub gauge: Gauge,
    /// Max coefficient of `jet_N(Phi o F - N o Phi)`.
    pub residual: f64,
    pub small_divisors: Vec<SmallDivisor>,
    pub warnings: Vec<String>,
    pub lambda: Cplx,
    pub order: usize,
}

/// Raw solver result for possibly complex data.
#[derive(Clone, Debug)]
pub struct Solution {
    pub phi: BiSeries,
    pub n: UniSeries,
    pub small_divisors: Vec<SmallDivisor>,
    pub warnings: Vec<String>,
}

/// Data of `F` as the solver sees it; `f` and `g` may carry complex
/// coefficients (parametric families at complex parameter values).
pub struct SolverInput<'a> {
    pub lambda: Cplx,
    pub f: &'a UniSeries,
    pub g: &'a BiSeries,
    pub order: usize,
}

enum Diagonal {
    Free(Vec<Cplx>),
    Steered { d: usize, lead: Cplx, targets: Vec<Cplx> },
    Determined,
}

struct Cache<'a> {
    order: usize,
    prec: u32,
    g: &'a BiSeries,
    /// `(1 + f)^l` embedded on the diagonal.
    radial_pow: Vec<BiSeries>,
    exps: HashMap<i64, BiSeries>,
}

impl Cache<'_> {
    fn exp(&mut self, m: i64) -> Result<&BiSeries> {
        if !self.exps.contains_key(&m) {
            let e = if m == 0 {
                BiSeries::one(self.order, self.prec)
            } else if m.abs() == 1 {
                self.g.scale_real(&Float::with_val(self.prec, m)).exp_2pii()?
            } else {
                let step = m.signum();
                let prev = self.exp(m - step)?.clone();
                prev.mul(self.exp(step)?)?
            };
            self.exps.insert(m, e);
        }
        Ok(&self.exps[&m])
    }
}

fn diagonal_policy(gauge: &Gauge, f: &UniSeries, unimodular: bool, order: usize, prec: u32) -> Result<Diagonal> {
    let values = |v: &[f64]| v.iter().map(|x| Cplx::from_f64(*x, 0.0, prec)).collect::<Vec<_>>();
    match gauge {
        Gauge::Basic => Ok(Diagonal::Free(Vec::new())),
        Gauge::CustomDiagonal(v) => Ok(Diagonal::Free(values(v))),
        Gauge::StrongContraction => {
            if unimodular {
                return Err(Error::InvalidGauge("strong contraction needs modulus < 1".into()));
            }
            Ok(Diagonal::Determined)
        }
        Gauge::KillTorsionAboveD | Gauge::PrescribedTorsion(_) => {
            if !unimodular {
                return Err(Error::InvalidGauge("torsion steering needs modulus 1".into()));
            }
            let d = f.valuation(0.0).ok_or_else(|| {
                Error::InvalidGauge("f vanishes identically: the special normal form is already unique".into())
            })?;
            let mut targets = vec![Cplx::zero(prec)];
            if let Gauge::PrescribedTorsion(v) = gauge {
                targets.extend(values(v));
            }
            targets.resize(order / 2 + 1, Cplx::zero(prec));
            Ok(Diagonal::Steered { d, lead: f.coeff(d), targets })
        }
    }
}

/// Solves the homological equation through total degree `input.order`.
pub fn solve(input: &SolverInput<'_>, gauge: &Gauge) -> Result<Solution> {
    let prec = input.g.prec();
    let unimodular = (input.lambda.abs() - 1u32).abs() < Precision::new(prec)?.tolerance();
    let policy = diagonal_policy(gauge, input.f, unimodular, input.order, prec)?;
    solve_policy(input, policy)
}

/// Like [`solve`] with the torsion `n_s`, `s > d`, prescribed at full precision.
pub fn solve_prescribed(input: &SolverInput<'_>, torsion: &UniSeries) -> Result<Solution> {
    let prec = input.g.prec();
    let unimodular = (input.lambda.abs() - 1u32).abs() < Precision::new(prec)?.tolerance();
    let policy = match diagonal_policy(&Gauge::KillTorsionAboveD, input.f, unimodular, input.order, prec)? {
        Diagonal::Steered { d, lead, .. } => {
            let targets = (0..=input.order / 2).map(|s| torsion.coeff(s)).collect();
            Diagonal::Steered { d, lead, targets }
        }
        other => other,
    };
    solve_policy(input, policy)
}

fn solve_policy(input: &SolverInput<'_>, policy: Diagonal) -> Result<Solution> {
    let n_ord = input.order;
    let prec = input.g.prec();
    let g = input.g.with_order(n_ord);
    if !g.coeff(0, 0).is_zero() {
        return Err(Error::NonzeroConstant { context: "angular series g" });
    }

    let resonance_floor = 2f64.powi(-((prec as i32) - 32));
    let warn_floor = 2f64.powi(-((prec / 4) as i32));

    let lam = &input.lambda;
    let lamb = lam.conj();
    let mut lam_pow = vec![Cplx::one(prec)];
    let mut lamb_pow = vec![Cplx::one(prec)];
    for i in 1..=n_ord {
        lam_pow.push(&lam_pow[i - 1] * lam);
        lamb_pow.push(&lamb_pow[i - 1] * &lamb);
    }
    let mu = |p: usize, q: usize| &lam_pow[p] * &lamb_pow[q];

    let f = input.f.with_order(n_ord / 2);
    let one_plus_f = UniSeries::one(n_ord / 2, prec).add(&f)?;
    let mut radial_pow = vec![BiSeries::one(n_ord, prec)];
    let mut acc = UniSeries::one(n_ord / 2, prec);
    for _ in 1..=n_ord {
        acc = acc.mul(&one_plus_f)?;
        radial_pow.push(BiSeries::from_radial_complex(&acc, n_ord));
    }
    let mut cache = Cache { order: n_ord, prec, g: &g, radial_pow, exps: HashMap::new() };

    // rhs holds g plus every already-solved contribution phi_pq mu_pq z^p zbar^q
    // ((1+f)^{p+q} e^{2 pi i (p-q) g} - 1); its (p,q) entry at degree l is final
    // once all lower degrees are in.
    let mut rhs = g.clone();
    let mut phi = BiSeries::zero(n_ord, prec);
    let mut n = UniSeries::zero(n_ord / 2, prec);
    let mut small_divisors = Vec::new();
    let mut warnings = Vec::new();

    let contribute = |rhs: &mut BiSeries, cache: &mut Cache<'_>, p: usize, q: usize, c: &Cplx| -> Result<()> {
        let l = p + q;
        let m = p as i64 - q as i64;
        let moved = cache.exp(m)?.shift(p, q);
        let term = moved.mul(&cache.radial_pow[l])?;
        rhs.add_scaled(c, &term)?;
        let mut lead = rhs.coeff(p, q);
        lead -= c;
        rhs.set(p, q, lead);
        Ok(())
    };

    for l in 1..=n_ord {
        let mut min_div = f64::INFINITY;
        let mut solved: Vec<(usize, usize, Cplx)> = Vec::new();
        for k in 0..=l {
            let (p, q) = (l - k, k);
            let mu_pq = mu(p, q);
            if p != q {
                let div = &mu_pq - &Cplx::one(prec);
                let size = div.abs_f64();
                if size <= resonance_floor {
                    return Err(Error::ExactResonance { degree: l, exponent: p as i64 - q as i64, divisor: size });
                }
                if size < warn_floor {
                    warnings.push(format!(
                        "near resonance at degree {l}, (p,q)=({p},{q}): |lambda^p lambdabar^q - 1| = {size:e}; consider more bits"
                    ));
                }
                min_div = min_div.min(size);
                let value = -(&rhs.coeff(p, q) / &div);
                solved.push((p, q, value));
                continue;
            }
            let s = p;
            match &policy {
                Diagonal::Determined => {
                    let div = &mu_pq - &Cplx::one(prec);
                    let value = -(&rhs.coeff(p, q) / &div);
                    solved.push((p, q, value));
                }
                Diagonal::Free(values) => {
                    let value = values.get(s - 1).cloned().unwrap_or_else(|| Cplx::zero(prec));
                    // n_s = R_ss + (mu_ss - 1) phi_ss
                    let mut ns = rhs.coeff(p, q);
                    ns.mul_add_assign(&(&mu_pq - &Cplx::one(prec)), &value);
                    n.set(s, ns);
                    if !value.is_zero() {
                        solved.push((p, q, value));
                    }
                }
                Diagonal::Steered { d, lead, targets } => {
                    if s > *d {
                        // phi_{s-d,s-d} enters first at u^s, with weight 2(s-d) f_d
                        let t = s - d;
                        let weight = lead.scale_f64((2 * t) as f64);
                        let value = &(&targets[s] - &rhs.coeff(p, q)) / &weight;
                        phi.set(t, t, value.clone());
                        contribute(&mut rhs, &mut cache, t, t, &(&value * &mu(t, t)))?;
                    }
                    n.set(s, rhs.coeff(p, q));
                }
            }
        }
        for (p, q, value) in solved {
            contribute(&mut rhs, &mut cache, p, q, &(&value * &mu(p, q)))?;
            phi.set(p, q, value);
        }
        if min_div.is_finite() {
            small_divisors.push(SmallDivisor { degree: l, value: min_div });
        }
    }
    Ok(Solution { phi, n, small_divisors, warnings })
}

/// Series of `N(w) = lambda w (1 + f(|w|^2)) e^{2 pi i n(|w|^2)}`.
pub fn normal_form_series(lambda: &Cplx, f: &RadialSeries, n: &RadialSeries, order: usize) -> Result<BiSeries> {
    let prec = lambda.prec();
    let radial = BiSeries::from_radial(f, order).add(&BiSeries::one(order, prec))?;
    let twist = BiSeries::from_radial(n, order).exp_2pii()?;
    BiSeries::z(order, prec).scale(lambda).mul(&radial)?.mul(&twist)
}

/// `Phi(z) = z e^{2 pi i phi(z)}` as a series.
pub fn conjugacy_series(phi: &BiSeries) -> Result<BiSeries> {
    BiSeries::z(phi.order(), phi.prec()).mul(&phi.exp_2pii()?)
}

/// Max coefficient of `jet_N(Phi o F - N o Phi)`, by full series composition.
pub fn verify_conjugacy(map: &FoliationMap, phi: &BiSeries, n: &RadialSeries, order: usize) -> Result<f64> {
    let (fz, fzbar) = map.as_series(order)?;
    let phi = phi.with_order(order);
    let big_phi = conjugacy_series(&phi)?;
    let big_phi_bar = big_phi.conj_transpose();
    let normal = normal_form_series(&map.lambda(), &map.f.with_order(order / 2), n, order)?;
    let lhs = big_phi.substitute(&fz, &fzbar)?;
    let rhs = normal.substitute(&big_phi, &big_phi_bar)?;
    Ok(lhs.sub(&rhs)?.max_abs())
}

/// Solves, symmetrizes and certifies a normalization of `map` through `order`.
pub fn solve_homological(map: &FoliationMap, order: usize, gauge: Gauge) -> Result<Normalization> {
    finish(map, order, gauge.clone(), |input| solve(input, &gauge))
}

/// [`solve_homological`] with the torsion above the valuation of `f` set to `torsion`
/// (coefficients at full precision). Needs modulus 1 and `f != 0`.
pub fn solve_homological_torsion(map: &FoliationMap, order: usize, torsion: &RadialSeries) -> Result<Normalization> {
    let values = torsion.to_f64_vec().into_iter().skip(1).collect();
    let t = torsion.to_complex();
    finish(map, order, Gauge::PrescribedTorsion(values), |input| solve_prescribed(input, &t))
}

fn finish(
    map: &FoliationMap,
    order: usize,
    gauge: Gauge,
    run: impl FnOnce(&SolverInput<'_>) -> Result<Solution>,
) -> Result<Normalization> {
    if order < 1 {
        return Err(Error::Config("order must be at least 1".into()));
    }
    let m = if map.order() == order { map.clone() } else { map.at_order(order) };
    let f = m.f.to_complex();
    let input = SolverInput { lambda: m.lambda(), f: &f, g: &m.g, order };
    let sol = run(&input)?;
    let mut phi = sol.phi;
    phi.symmetrize();
    let (n, residue) = sol.n.real_part();
    if residue > 0.0 {
        log::debug!("torsion imaginary residue {residue:e} dropped");
    }
    let residual = verify_conjugacy(&m, &phi, &n, order)?;
    let mut warnings = sol.warnings;
    let scale = phi.max_abs().max(1.0);
    let tol = Precision::new(m.prec())?.tolerance();
    if residual > 1e3 * tol * scale {
        warnings.push(format!("conjugacy residual {residual:e} exceeds 1e3 * tolerance * scale"));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Normalization {
        phi,
        n,
        gauge,
        residual,
        small_divisors: sol.small_divisors,
        warnings,
        lambda: m.lambda(),
        order,
    })
}

/// Initial form of `g~ = g - n`: `g~(r e^{2 pi i theta}) = r^k P_k(theta) + O(r^{k+1})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialForm {
    pub k: usize,
    /// `P_k = mean + sum_m cos[m-1] cos(2 pi m theta) + sin[m-1] sin(2 pi m theta)`.
    pub mean: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl InitialForm {
    pub fn eval(&self, theta: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * theta;
        let mut v = self.mean;
        for (i, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let m = (i + 1) as f64;
            v += c * (m * w).cos() + s * (m * w).sin();
        }
        v
    }
}

/// Lowest-degree part of `g - n`, or `None` when it vanishes through the order.
pub fn tilde_g_initial_form(map: &FoliationMap, norm: &Normalization) -> Result<Option<InitialForm>> {
    let order = norm.order;
    let g = map.at_order(order).g;
    let tilde = g.sub(&BiSeries::from_radial(&norm.n, order))?;
    let tol = Precision::new(map.prec())?.tolerance() * tilde.max_abs().max(1.0);
    let Some(k) = tilde.valuation(tol) else {
        return Ok(None);
    };
    let mut cos = vec![0.0; k];
    let mut sin = vec![0.0; k];
    let mut mean = 0.0;
    for q in 0..=k {
        let p = k - q;
        let c = tilde.coeff(p, q).to_c64();
        if p == q {
            mean = c.re;
        } else if p > q {
            let m = p - q;
            cos[m - 1] = 2.0 * c.re;
            sin[m - 1] = -2.0 * c.im;
        }
    }
    Ok(Some(InitialForm { k, mean, cos, sin }))
}

/// Which coefficient of the normalization to follow along a parametric family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoefficientIndex {
    Phi(usize, usize),
    Torsion(usize),
}

impl CoefficientIndex {
    /// Degree bound of the coefficient as a polynomial in the parameter.
    pub fn degree_bound(self) -> usize {
        match self {
            CoefficientIndex::Phi(p, q) => p + q,
            CoefficientIndex::Torsion(s) => 2 * s,
        }
    }

    fn total_degree(self) -> usize {
        self.degree_bound()
    }
}

/// Least-squares polynomial fit of a coefficient over parameter samples.
#[derive(Clone, Debug)]
pub struct ParametricFit {
    pub index: CoefficientIndex,
    pub degree: usize,
    /// Polynomial coefficients, constant term first.
    pub coeffs: Vec<Cplx>,
    /// Max `|fit(t_i) - value(t_i)|`.
    pub residual: f64,
    /// Largest sampled magnitude, for relative comparisons.
    pub scale: f64,
    /// False when near-resonant divisors occurred at or below the coefficient's degree.
    pub certified: bool,
}

/// Basic normalization of `F_t = t F0 + (1 - t) F1` at each sample, and a polynomial
/// fit of degree `index.degree_bound()` of the chosen coefficient.
pub fn parametric_normalization(
    f0: &FoliationMap,
    f1: &FoliationMap,
    t_samples: &[Cplx],
    index: CoefficientIndex,
) -> Result<ParametricFit> {
    let degree = index.degree_bound();
    if t_samples.len() < degree + 2 {
        return Err(Error::Config(format!("need at least {} samples, got {}", degree + 2, t_samples.len())));
    }
    if f0.lambda() != f1.lambda() {
        return Err(Error::InvalidMap("parametric family endpoints must share lambda".into()));
    }
    let order = index.total_degree().max(1);
    let prec = f0.prec();
    let a = f0.at_order(order);
    let b = f1.at_order(order);
    let mut values = Vec::with_capacity(t_samples.len());
    let mut certified = true;
    let warn_floor = 2f64.powi(-((prec / 4) as i32));
    for t in t_samples {
        let one_minus_t = &Cplx::one(prec) - t;
        let f = a.f.to_complex().scale_by(t).add(&b.f.to_complex().scale_by(&one_minus_t))?;
        let g = a.g.scale(t).add(&b.g.scale(&one_minus_t))?;
        let sol = solve(&SolverInput { lambda: a.lambda(), f: &f, g: &g, order }, &Gauge::Basic)?;
        if sol.small_divisors.iter().any(|s| s.degree <= order && s.value < warn_floor) {
            certified = false;
        }
        values.push(match index {
            CoefficientIndex::Phi(p, q) => sol.phi.coeff(p, q),
            CoefficientIndex::Torsion(s) => sol.n.coeff(s),
        });
    }
    let coeffs = least_squares_poly(t_samples, &values, degree)?;
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (t, y) in t_samples.iter().zip(&values) {
        let mut v = Cplx::zero(prec);
        for c in coeffs.iter().rev() {
            v = &(&v * t) + c;
        }
        residual = residual.max((&v - y).abs_f64());
        scale = scale.max(y.abs_f64());
    }
    Ok(ParametricFit { index, degree, coeffs, residual, scale, certified })
}

/// Complex least squares via the normal equations, solved with partial pivoting.
fn least_squares_poly(ts: &[Cplx], ys: &[Cplx], degree: usize) -> Result<Vec<Cplx>> {
    let prec = ys[0].prec();
    let cols = degree + 1;
    let rows: Vec<Vec<Cplx>> = ts
        .iter()
        .map(|t| {
            let mut row = vec![Cplx::one(prec)];
            for i in 1..cols {
                let next = &row[i - 1] * t;
                row.push(next);
            }
            row
        })
        .collect();
    // A = V^H V, rhs = V^H y
    let mut a = vec![vec![Cplx::zero(prec); cols + 1]; cols];
    for (row, y) in rows.iter().zip(ys) {
        for i in 0..cols {
            let ci = row[i].conj();
            for j in 0..cols {
                a[i][j].mul_add_assign(&ci, &row[j]);
            }
            a[i][cols].mul_add_assign(&ci, y);
        }
    }
    for col in 0..cols {
        let pivot = (col..cols)
            .max_by(|&x, &y| a[x][col].abs_f64().total_cmp(&a[y][col].abs_f64()))
            .unwrap_or(col);
        a.swap(col, pivot);
        if a[col][col].is_zero() {
            return Err(Error::Config("singular fit: repeated parameter samples".into()));
        }
        let inv = a[col][col].recip();
        for r in 0..cols {
            if r == col {
                continue;
            }
            let factor = &a[r][col] * &inv;
            if factor.is_zero() {
                continue;
            }
            for c in col..=cols {
                let delta = &factor * &a[col][c];
                a[r][c] -= &delta;
            }
        }
    }
    Ok((0..cols).map(|i| &a[i][cols] / &a[i][i]).collect())
}

#[derive(Serialize)]
struct PhiTerm {
    p: usize,
    q: usize,
    re: String,
    im: String,
}

#[derive(Serialize)]
struct TorsionTerm {
    s: usize,
    value: String,
}

#[derive(Serialize)]
struct NormalizationJson<'a> {
    gauge: &'a str,
    order: usize,
    phi: Vec<PhiTerm>,
    n: Vec<TorsionTerm>,
    residual: f64,
    min_small_divisor: &'a [SmallDivisor],
    warnings: &'a [String],
}

impl Normalization {
    pub fn to_json(&self) -> serde_json::Value {
        let phi = self
            .phi
            .terms()
            .map(|(p, q, c)| PhiTerm { p, q, re: format_real(&c.re), im: format_real(&c.im) })
            .collect();
        let n = self
            .n
            .coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(s, v)| TorsionTerm { s, value: format_real(v) })
            .collect();
        let doc = NormalizationJson {
            gauge: self.gauge.name(),
            order: self.order,
            phi,
            n,
            residual: self.residual,
            min_small_divisor: &self.small_divisors,
            warnings: &self.warnings,
        };
        serde_json::to_value(doc).expect("normalization json")
    }

    /// `n_s` at working precision.
    pub fn torsion(&self, s: usize) -> Real {
        self.n.coeff(s)
    }
}
