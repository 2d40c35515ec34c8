//! Continued fractions of rotation numbers and partial Brjuno sums.

use std::collections::HashMap;

use rug::{Float, Integer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::OmegaSpec;

/// Extra bits of the second Gauss-map run used to detect exhausted precision.
const GUARD_BITS: u32 = 64;

/// Quotients past this size mean the remainder is rounding noise.
const MAX_QUOTIENT: f64 = 4.611_686_018_427_388e18; // 2^62

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuedFraction {
    /// `a_0, a_1, ..., a_depth`.
    pub quotients: Vec<i64>,
    /// Convergent numerators `p_n`.
    pub p: Vec<Integer>,
    /// Convergent denominators `q_n`.
    pub q: Vec<Integer>,
    /// Quotients known exactly (quadratic irrationals and `cf:` inputs).
    pub exact: bool,
    /// Length of the periodic tail when one was found.
    pub period: Option<usize>,
    /// False when working precision ran out before the requested depth.
    pub reliable: bool,
}

#[derive(Serialize)]
struct CfJson<'a> {
    quotients: &'a [i64],
    p: Vec<String>,
    q: Vec<String>,
    exact: bool,
    period: Option<usize>,
    reliable: bool,
}

impl ContinuedFraction {
    fn from_quotients(quotients: Vec<i64>, exact: bool, period: Option<usize>, reliable: bool) -> Self {
        let (mut p, mut q) = (Vec::with_capacity(quotients.len()), Vec::with_capacity(quotients.len()));
        let (mut p1, mut p2) = (Integer::from(1), Integer::from(0));
        let (mut q1, mut q2) = (Integer::from(0), Integer::from(1));
        for &a in &quotients {
            let pn = Integer::from(&p1 * a) + &p2;
            let qn = Integer::from(&q1 * a) + &q2;
            p2 = std::mem::replace(&mut p1, pn.clone());
            q2 = std::mem::replace(&mut q1, qn.clone());
            p.push(pn);
            q.push(qn);
        }
        ContinuedFraction { quotients, p, q, exact, period, reliable }
    }

    /// Index of the last quotient.
    pub fn depth(&self) -> usize {
        self.quotients.len().saturating_sub(1)
    }

    /// `p_n / q_n` at `prec` bits.
    pub fn convergent(&self, n: usize, prec: u32) -> Float {
        Float::with_val(prec, &self.p[n]) / Float::with_val(prec, &self.q[n])
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = CfJson {
            quotients: &self.quotients,
            p: self.p.iter().map(|x| x.to_string()).collect(),
            q: self.q.iter().map(|x| x.to_string()).collect(),
            exact: self.exact,
            period: self.period,
            reliable: self.reliable,
        };
        serde_json::to_value(doc).expect("continued fraction json")
    }
}

/// `floor((P + sqrt D) / Q)` for non-square `D`.
fn pq_floor(p: &Integer, q: &Integer, root: &Integer) -> Integer {
    let num = Integer::from(p + root);
    if *q > 0 {
        num.div_rem_floor(q.clone()).0
    } else {
        let (f, _) = num.div_rem_floor(Integer::from(-q));
        -f - 1u32
    }
}

/// Exact expansion of `(P + sqrt D) / Q` with `Q | D - P^2`.
fn quadratic_expansion(p: i128, q: i128, d: i128, depth: usize) -> Result<(Vec<i64>, Option<usize>)> {
    let d = Integer::from(d);
    let root = d.clone().sqrt();
    let (mut p, mut q) = (Integer::from(p), Integer::from(q));
    let mut seen: HashMap<(Integer, Integer), usize> = HashMap::new();
    let mut out = Vec::new();
    let mut period = None;
    let limit = depth + 1 + 4096;
    for n in 0..limit {
        if period.is_none() {
            if let Some(first) = seen.insert((p.clone(), q.clone()), n) {
                period = Some(n - first);
            }
        }
        if period.is_some() && out.len() > depth {
            break;
        }
        let a = pq_floor(&p, &q, &root);
        if n <= depth {
            out.push(a.to_i64().ok_or_else(|| Error::Diagnostics("partial quotient overflows 64 bits".into()))?);
        }
        p = Integer::from(&a * &q) - &p;
        q = (&d - Integer::from(&p * &p)).div_exact(&q);
    }
    Ok((out, period))
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Stop {
    Depth,
    Terminated,
}

fn gauss_map(mut x: Float, count: usize) -> (Vec<i64>, Stop) {
    let prec = x.prec();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = Float::with_val(prec, x.floor_ref());
        if a.clone().abs() > MAX_QUOTIENT {
            return (out, Stop::Terminated);
        }
        out.push(a.to_f64() as i64);
        x -= &a;
        if x.is_zero() {
            return (out, Stop::Terminated);
        }
        x.recip_mut();
    }
    (out, Stop::Depth)
}

/// Partial quotients `a_0..a_depth` and convergents of `omega`.
///
/// Quadratic irrationals use the exact `(P, Q)` recursion. Decimal literals run the
/// Gauss map at `bits` and at `bits + 64`; only the common prefix is kept.
pub fn continued_fraction(omega: &OmegaSpec, depth: usize, bits: u32) -> Result<ContinuedFraction> {
    omega.validate()?;
    match omega {
        OmegaSpec::Cf { quotients } => {
            let mut q: Vec<i64> = quotients.iter().copied().take(depth + 1).collect();
            q.resize(depth + 1, 1);
            Ok(ContinuedFraction::from_quotients(q, true, Some(1), true))
        }
        OmegaSpec::Golden | OmegaSpec::Quad { .. } => {
            let (p, q, d) = omega.quadratic_form().expect("quadratic form");
            let (quotients, period) = quadratic_expansion(p, q, d, depth)?;
            Ok(ContinuedFraction::from_quotients(quotients, true, period, true))
        }
        OmegaSpec::Literal { .. } => {
            let (lo, lo_stop) = gauss_map(omega.value(bits)?, depth + 1);
            let (hi, hi_stop) = gauss_map(omega.value(bits + GUARD_BITS)?, depth + 1);
            if lo_stop == Stop::Terminated && hi_stop == Stop::Terminated && lo == hi {
                return Err(Error::RationalOmega(format!("{omega} has the finite expansion {lo:?} at {bits} bits")));
            }
            let agree = lo.iter().zip(&hi).take_while(|(a, b)| a == b).count();
            let reliable = agree == depth + 1;
            if !reliable {
                log::warn!("precision exhausted after {agree} partial quotients of {omega}");
            }
            Ok(ContinuedFraction::from_quotients(lo[..agree].to_vec(), false, None, reliable))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BrjunoSum {
    pub depth: usize,
    /// `S_n = sum_{k <= n} log(q_{k+1}) / q_k` for `n = 0..=depth`.
    pub partial_sums: Vec<f64>,
    pub value: f64,
    /// `Some(true)` for eventually periodic expansions, `None` when undecided.
    pub brjuno: Option<bool>,
    /// Mean of the last few increments.
    pub trend: f64,
    pub reliable: bool,
}

/// `sum_{n <= depth} log(q_{n+1}) / q_n`; needs `cf.depth() > depth`.
pub fn brjuno_partial(cf: &ContinuedFraction, depth: usize) -> Result<BrjunoSum> {
    if cf.depth() <= depth {
        return Err(Error::Diagnostics(format!(
            "Brjuno sum to depth {depth} needs q_{}, expansion stops at q_{}",
            depth + 1,
            cf.depth()
        )));
    }
    let prec = 128;
    let mut acc = Float::new(prec);
    let mut partial_sums = Vec::with_capacity(depth + 1);
    let mut increments = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let term = Float::with_val(prec, &cf.q[n + 1]).ln() / Float::with_val(prec, &cf.q[n]);
        increments.push(term.to_f64());
        acc += &term;
        partial_sums.push(acc.to_f64());
    }
    let tail = &increments[increments.len().saturating_sub(5)..];
    let trend = tail.iter().sum::<f64>() / tail.len() as f64;
    Ok(BrjunoSum {
        depth,
        value: acc.to_f64(),
        partial_sums,
        brjuno: (cf.exact && cf.period.is_some()).then_some(true),
        trend,
        reliable: cf.reliable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_is_all_ones() {
        let cf = continued_fraction(&OmegaSpec::Golden, 20, 256).unwrap();
        assert_eq!(cf.quotients[0], 0);
        assert!(cf.quotients[1..].iter().all(|&a| a == 1));
        assert_eq!(cf.period, Some(1));
        let fib = [1u64, 1, 2, 3, 5, 8, 13, 21];
        for (n, f) in fib.iter().enumerate() {
            assert_eq!(cf.q[n], *f);
        }
    }

    #[test]
    fn sqrt2_and_literal_agree() {
        // sqrt 2 - 1 = [0; 2, 2, 2, ...]
        let quad = OmegaSpec::Quad { p: -1, q: 1, d: 2, r: 1 };
        let cf = continued_fraction(&quad, 30, 256).unwrap();
        assert_eq!(cf.quotients[0], 0);
        assert!(cf.quotients[1..].iter().all(|&a| a == 2));
        let lit: OmegaSpec = "0.41421356237309504880168872420969807856967187537694807317667973799".parse().unwrap();
        let cf2 = continued_fraction(&lit, 30, 256).unwrap();
        assert!(cf2.reliable);
        assert_eq!(cf2.quotients, cf.quotients);
        assert_eq!(cf2.brjuno_answer(), None);
    }

    #[test]
    fn literal_runs_out_of_digits() {
        let lit: OmegaSpec = "0.41421356237309504880168872420969807856967187537694807317667973799".parse().unwrap();
        let cf = continued_fraction(&lit, 60, 64).unwrap();
        assert!(!cf.reliable);
        assert!(cf.depth() < 60);
        assert!(cf.quotients[1..].iter().all(|&a| a == 2));
        // a short decimal is rational: its expansion ends before depth 60
        let short: OmegaSpec = "0.4142135623730950488".parse().unwrap();
        assert!(matches!(continued_fraction(&short, 60, 256), Err(Error::RationalOmega(_))));
    }

    #[test]
    fn rational_literal_is_rejected() {
        for s in ["0.5", "0.1", "0.375"] {
            let lit: OmegaSpec = s.parse().unwrap();
            assert!(matches!(continued_fraction(&lit, 10, 256), Err(Error::RationalOmega(_))), "{s}");
        }
    }

    #[test]
    fn convergents_bracket_omega() {
        let quad = OmegaSpec::Quad { p: 1, q: 1, d: 7, r: 3 };
        let cf = continued_fraction(&quad, 25, 256).unwrap();
        let w = quad.value(512).unwrap();
        for n in 0..cf.depth() {
            let err = Float::with_val(512, &w - cf.convergent(n, 512)).abs();
            let bound = Float::with_val(512, 1u32) / Float::with_val(512, Integer::from(&cf.q[n] * &cf.q[n + 1]));
            assert!(err < bound, "n = {n}");
        }
        assert!(cf.period.is_some());
    }

    #[test]
    fn prefix_quotients_are_exact() {
        let spec = OmegaSpec::Cf { quotients: vec![0, 10, 10_000_000_000] };
        let cf = continued_fraction(&spec, 4, 256).unwrap();
        assert_eq!(cf.quotients, vec![0, 10, 10_000_000_000, 1, 1]);
        let s = brjuno_partial(&cf, 1).unwrap();
        let q2 = 100_000_000_001f64;
        let expect = 10f64.ln() + q2.ln() / 10.0;
        assert!((s.value - expect).abs() < 1e-12);
        assert_eq!(s.brjuno, Some(true));
        assert!(brjuno_partial(&cf, 4).is_err());
    }

    impl ContinuedFraction {
        fn brjuno_answer(&self) -> Option<bool> {
            brjuno_partial(self, self.depth() - 1).unwrap().brjuno
        }
    }
}
