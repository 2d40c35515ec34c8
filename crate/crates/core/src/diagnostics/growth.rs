//! Per-degree coefficient growth of a normalization. Finite-order evidence only.

use std::fmt::Write;

use serde::Serialize;

use crate::normalizer::Normalization;

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub degree: usize,
    /// `max_{p+q=l} |phi_pq|`.
    pub max_coeff: f64,
    /// `max_coeff^{1/l}`.
    pub root_test: f64,
    pub min_small_divisor: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthProfile {
    /// Always true: the profile says nothing about convergence.
    pub heuristic: bool,
    pub rows: Vec<GrowthRow>,
    /// Least-squares slope of `log max_coeff` against the degree over nonzero rows.
    pub log_ratio_trend: Option<f64>,
    pub max_root_test: f64,
}

pub fn coefficient_growth(norm: &Normalization) -> GrowthProfile {
    let rows: Vec<GrowthRow> = (1..=norm.order)
        .map(|l| {
            let max_coeff = norm.phi.max_abs_degree(l);
            let min_small_divisor = norm
                .small_divisors
                .iter()
                .filter(|s| s.degree == l)
                .map(|s| s.value)
                .reduce(f64::min);
            GrowthRow { degree: l, max_coeff, root_test: max_coeff.powf(1.0 / l as f64), min_small_divisor }
        })
        .collect();
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.max_coeff > 0.0).map(|r| (r.degree as f64, r.max_coeff.ln())).collect();
    let log_ratio_trend = (pts.len() >= 2).then(|| {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    let max_root_test = rows.iter().map(|r| r.root_test).fold(0.0, f64::max);
    GrowthProfile { heuristic: true, rows, log_ratio_trend, max_root_test }
}

impl GrowthProfile {
    /// `degree,max_coeff,root_test,min_small_divisor`; missing divisors are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,max_coeff,root_test,min_small_divisor\n");
        for r in &self.rows {
            let sd = r.min_small_divisor.map(|v| format!("{v:.17e}")).unwrap_or_default();
            let _ = writeln!(out, "{},{:.17e},{:.17e},{}", r.degree, r.max_coeff, r.root_test, sd);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{Family, FoliationMap, Multiplier, OmegaSpec};
    use crate::normalizer::{solve_homological, Gauge};
    use crate::series::{BiSeries, RadialSeries};
    use rug::Float;

    #[test]
    fn rotation_has_flat_zero_profile() {
        let mult = Multiplier::new(OmegaSpec::Golden, 1.0, 128).unwrap();
        let map = FoliationMap::custom(mult, RadialSeries::zero(4, 128), BiSeries::zero(8, 128)).unwrap();
        let norm = solve_homological(&map, 8, Gauge::Basic).unwrap();
        let g = coefficient_growth(&norm);
        assert!(g.rows.iter().all(|r| r.max_coeff == 0.0 && r.root_test == 0.0));
        assert_eq!(g.log_ratio_trend, None);
        assert_eq!(g.to_csv().lines().count(), 9);
    }

    #[test]
    fn family_a_profile_is_bounded() {
        let mult = Multiplier::new(OmegaSpec::Golden, 1.0, 256).unwrap();
        let map = FoliationMap::family(Family::A, mult, Float::with_val(256, -1), 1, 16).unwrap();
        let norm = solve_homological(&map, 16, Gauge::Basic).unwrap();
        let g = coefficient_growth(&norm);
        assert!(g.heuristic);
        assert!(g.max_root_test.is_finite() && g.max_root_test > 0.0);
        assert!(g.rows.iter().all(|r| r.min_small_divisor.is_none_or(|d| d > 0.0)));
        let csv = g.to_csv();
        assert!(csv.starts_with("degree,max_coeff,root_test,min_small_divisor\n1,"));
    }
}
