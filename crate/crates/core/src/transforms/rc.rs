//! Heuristic convergence classification of truncated resonant series.

use serde::Serialize;

use crate::series::{BiSeries, RadialSeries};

/// Ratio of late to mid root-test values above which growth counts as super-geometric.
pub const SUPERGEOMETRIC_RATIO: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    /// Finitely many nonzero coefficients.
    Polynomial,
    /// Root-test values stay bounded.
    Geometric,
    /// Root-test values keep growing.
    SuperGeometric,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesGrowth {
    pub growth: Growth,
    /// `|c_l|^{1/l}` at each nonzero index `l >= 1`.
    pub roots: Vec<(usize, f64)>,
    /// Estimated radius of convergence in the series variable.
    pub radius: f64,
}

impl SeriesGrowth {
    pub fn convergent(&self) -> bool {
        self.growth != Growth::SuperGeometric
    }
}

/// Root-test profile of a sequence of coefficient magnitudes indexed from 0.
pub fn classify_magnitudes(mags: &[f64], tol: f64) -> SeriesGrowth {
    let roots: Vec<(usize, f64)> = mags
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, m)| **m > tol)
        .map(|(l, m)| (l, m.powf(1.0 / l as f64)))
        .collect();
    let last_nonzero = roots.last().map(|x| x.0).unwrap_or(0);
    if roots.len() < 4 || last_nonzero + 1 < mags.len() / 2 {
        let radius = if roots.is_empty() { f64::INFINITY } else { 1.0 / roots.iter().map(|x| x.1).fold(0.0, f64::max) };
        return SeriesGrowth { growth: Growth::Polynomial, roots, radius };
    }
    let n = roots.len();
    let mid = roots[n / 2 - 1..n / 2 + 1].iter().map(|x| x.1).fold(0.0, f64::max);
    let late = roots[n - 2..].iter().map(|x| x.1).fold(0.0, f64::max);
    let growth = if late > SUPERGEOMETRIC_RATIO * mid { Growth::SuperGeometric } else { Growth::Geometric };
    SeriesGrowth { growth, roots, radius: 1.0 / late }
}

pub fn classify_radial(s: &RadialSeries, tol: f64) -> SeriesGrowth {
    let mags: Vec<f64> = s.to_f64_vec().iter().map(|x| x.abs()).collect();
    classify_magnitudes(&mags, tol)
}

/// Profile of a `(z, zbar)` series by max coefficient per total degree.
pub fn classify_bi(s: &BiSeries, tol: f64) -> SeriesGrowth {
    let mags: Vec<f64> = (0..=s.order()).map(|l| s.max_abs_degree(l)).collect();
    classify_magnitudes(&mags, tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct RcReport {
    pub a: SeriesGrowth,
    pub b: SeriesGrowth,
    pub phi: Option<SeriesGrowth>,
    /// Both radial components of the gauge look convergent.
    pub rc: bool,
}

/// Classifies a gauge `(a, b)` and, separately, the normalizing transformation.
pub fn rc_classify(a: &RadialSeries, b: &RadialSeries, phi: Option<&BiSeries>, tol: f64) -> RcReport {
    let a = classify_radial(a, tol);
    let b = classify_radial(b, tol);
    let rc = a.convergent() && b.convergent();
    RcReport { a, b, phi: phi.map(|p| classify_bi(p, tol)), rc }
}
