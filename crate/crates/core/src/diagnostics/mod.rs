//! Small-divisor arithmetic, coefficient growth and slope reduction.

pub mod cf;
pub mod growth;
pub mod slope;

use serde::Serialize;

pub use cf::{brjuno_partial, continued_fraction, BrjunoSum, ContinuedFraction};
pub use growth::{coefficient_growth, GrowthProfile, GrowthRow};
pub use slope::{reduction_consistency, slope_reduction, Consistency, Slope, SlopeReduction};

use crate::error::Result;
use crate::maps::FoliationMap;
use crate::normalizer::{solve_homological, Gauge};

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsReport {
    pub omega: String,
    pub bits: u32,
    pub order: usize,
    pub continued_fraction: Option<serde_json::Value>,
    pub brjuno: Option<BrjunoSum>,
    pub growth: GrowthProfile,
    pub slope_reduction: Option<serde_json::Value>,
    pub consistency: Option<Consistency>,
    pub notes: Vec<String>,
}

/// Runs every diagnostic on `map` with a basic normalization through `order`.
pub fn diagnose(map: &FoliationMap, order: usize, cf_depth: usize) -> Result<DiagnosticsReport> {
    let bits = map.prec();
    let omega = &map.multiplier.omega;
    let mut notes = Vec::new();
    let cf = continued_fraction(omega, cf_depth + 1, bits);
    let brjuno = match cf.clone().and_then(|cf| brjuno_partial(&cf, cf_depth)) {
        Ok(b) => Some(b),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    let gauge = if map.multiplier.is_unimodular() { Gauge::Basic } else { Gauge::StrongContraction };
    let norm = solve_homological(map, order, gauge)?;
    let growth = coefficient_growth(&norm);
    let (slope_json, consistency) = match slope_reduction(map, order) {
        Ok(red) => {
            let cons = match reduction_consistency(&red, &norm) {
                Ok(c) => Some(c),
                Err(e) => {
                    notes.push(e.to_string());
                    None
                }
            };
            (Some(red.to_json()), cons)
        }
        Err(e) => {
            notes.push(e.to_string());
            (None, None)
        }
    };
    Ok(DiagnosticsReport {
        omega: omega.to_string(),
        bits,
        order,
        continued_fraction: cf.ok().map(|cf| cf.to_json()),
        brjuno,
        growth,
        slope_reduction: slope_json,
        consistency,
        notes,
    })
}
