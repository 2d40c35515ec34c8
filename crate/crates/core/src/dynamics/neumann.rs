//! Neumann series `sum_m g~(F^(m)(z))` for `phi - phi o F = g~`, `g~ = g - n`.
//!
//! Partial sums are accelerated by a jet `psi` of a formal solution with the same torsion
//! above the valuation of `f`: `S_M = sum_{m<M} g~(F^m z) + psi(F^M z)`. Both `S_M` and the
//! raw sums have the same limit when it exists, but `S_M` sheds the slowly decaying
//! oscillating part so that the ladder resolves the decay exponent.

use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::FoliationMap;
use crate::normalizer::{solve_homological, solve_homological_torsion, Gauge};
use crate::precision::{tolerance_for, Cplx};
use crate::series::{BiSeries, RadialSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeumannVerdict {
    Converged,
    Diverging,
    Inconclusive,
}

/// Ladder deltas below this count as converged.
pub const DELTA_TOL: f64 = 1e-8;

/// Rounding slack on the exponent threshold `-1`.
const EXPONENT_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderPoint {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "S_re")]
    pub s_re: f64,
    #[serde(rename = "S_im")]
    pub s_im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NeumannRun {
    pub ladder: Vec<LadderPoint>,
    pub verdict: NeumannVerdict,
    /// Fitted decay exponent `e` of the terms, `|S_{2M} - S_M| ~ M^{e+1}`.
    pub exponent: Option<f64>,
    pub deltas: Vec<f64>,
    pub z: [f64; 2],
    pub jet_order: usize,
}

#[derive(Clone, Debug)]
pub struct NeumannOptions {
    pub ladder: Vec<u64>,
    /// Order of the jet `psi`; 0 disables acceleration.
    pub jet_order: usize,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        NeumannOptions { ladder: default_ladder(100_000), jet_order: 12 }
    }
}

/// `25 * 2^j` up to the first value reaching `m_max`.
pub fn default_ladder(m_max: u64) -> Vec<u64> {
    let mut out = vec![25u64];
    while *out.last().unwrap() < m_max {
        out.push(out.last().unwrap() * 2);
    }
    out
}

/// `n + delta u^k`.
pub fn deviate_torsion(n: &RadialSeries, k: usize, delta: f64) -> RadialSeries {
    let mut out = n.clone();
    let v = Float::with_val(n.prec(), n.coeff(k) + delta);
    if k <= out.order() {
        out.set(k, v);
    }
    out
}

fn jet(map: &FoliationMap, n: &RadialSeries, order: usize) -> Result<Option<BiSeries>> {
    if order == 0 {
        return Ok(None);
    }
    let norm = if map.multiplier.is_unimodular() && !map.is_conservative() {
        solve_homological_torsion(map, order, &n.with_order(order / 2))?
    } else if map.multiplier.is_unimodular() {
        solve_homological(map, order, Gauge::Basic)?
    } else {
        solve_homological(map, order, Gauge::StrongContraction)?
    };
    Ok(Some(norm.phi))
}

/// Runs the accelerated Neumann ladder at `z` with torsion `n`.
pub fn neumann_run(map: &FoliationMap, n: &RadialSeries, z: Complex64, opts: &NeumannOptions) -> Result<NeumannRun> {
    let mut ladder_ms = opts.ladder.clone();
    ladder_ms.sort_unstable();
    ladder_ms.dedup();
    if ladder_ms.is_empty() {
        return Err(Error::Dynamics("empty ladder".into()));
    }
    if z == Complex64::new(0.0, 0.0) {
        let ladder = ladder_ms.iter().map(|&m| LadderPoint { m, s_re: 0.0, s_im: 0.0 }).collect();
        return Ok(NeumannRun {
            ladder,
            verdict: NeumannVerdict::Converged,
            exponent: None,
            deltas: vec![0.0; ladder_ms.len() - 1],
            z: [0.0, 0.0],
            jet_order: opts.jet_order,
        });
    }
    let prec = map.prec();
    let psi = jet(map, n, opts.jet_order)?;
    let limit = map.validity_radius.max(z.norm());
    let mut w = Cplx::from_c64(z, prec);
    let mut partial = Float::new(prec);
    let mut step = 0u64;
    let mut ladder = Vec::with_capacity(ladder_ms.len());
    for &m in &ladder_ms {
        while step < m {
            let u = w.norm_sqr();
            let term = Float::with_val(prec, map.angle(&w) - n.eval(&u));
            partial += term;
            w = map.eval(&w).value;
            let r = w.abs_f64();
            if !(r <= limit) {
                return Err(Error::Escape { radius: r, limit });
            }
            step += 1;
        }
        let mut s = Cplx::from_real(partial.clone());
        if let Some(psi) = &psi {
            s = &s + &psi.eval(&w);
        }
        ladder.push(LadderPoint { m, s_re: s.re.to_f64(), s_im: s.im.to_f64() });
    }
    let floor = 1e3 * tolerance_for(prec) * tolerance_for(prec) * ladder_ms[ladder_ms.len() - 1] as f64;
    let sums: Vec<f64> = ladder.iter().map(|p| p.s_re).collect();
    let (verdict, exponent, deltas) = classify_ladder(&ladder_ms, &sums, floor);
    Ok(NeumannRun { ladder, verdict, exponent, deltas, z: [z.re, z.im], jet_order: opts.jet_order })
}

/// Verdict and fitted exponent from partial sums on a geometric ladder.
///
/// Deltas at or below `floor` are rounding noise and are left out of the fit.
pub fn classify_ladder(ms: &[u64], sums: &[f64], floor: f64) -> (NeumannVerdict, Option<f64>, Vec<f64>) {
    let deltas: Vec<f64> = sums.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let pts: Vec<(f64, f64)> = deltas
        .iter()
        .zip(ms)
        .filter(|(d, _)| **d > floor)
        .map(|(d, m)| ((*m as f64).ln(), d.ln()))
        .collect();
    let exponent = (pts.len() >= 2).then(|| slope(&pts) - 1.0);
    let tail_small = deltas.len() >= 3 && deltas[deltas.len() - 3..].iter().all(|d| *d < DELTA_TOL);
    if tail_small && exponent.is_none_or(|e| e < -1.0 - EXPONENT_SLACK) {
        return (NeumannVerdict::Converged, exponent, deltas);
    }
    let steps: Vec<f64> = sums.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = steps.len() >= 4 && {
        let tail = &steps[steps.len() - 4..];
        tail.iter().all(|s| *s > floor) || tail.iter().all(|s| *s < -floor)
    };
    if monotone && exponent.is_some_and(|e| e >= -1.0 - EXPONENT_SLACK) {
        return (NeumannVerdict::Diverging, exponent, deltas);
    }
    (NeumannVerdict::Inconclusive, exponent, deltas)
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
