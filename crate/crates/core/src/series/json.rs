//! JSON encoding of series: `{"order":N,"terms":[{"j","k","re","im"}]}` with
//! decimal strings carrying the full working precision.

use serde::{Deserialize, Serialize};

use super::bi::BiSeries;
use super::uni::{RadialSeries, UniSeries};
use crate::error::{Error, Result};
use crate::precision::{format_real, parse_real, Cplx};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub j: usize,
    pub k: usize,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub order: usize,
    pub terms: Vec<TermJson>,
}

fn term(j: usize, k: usize, c: &Cplx) -> TermJson {
    TermJson { j, k, re: format_real(&c.re), im: format_real(&c.im) }
}

impl SeriesJson {
    pub fn from_bi(s: &BiSeries) -> Self {
        SeriesJson { order: s.order(), terms: s.terms().map(|(j, k, c)| term(j, k, c)).collect() }
    }

    /// Radial series are written on the diagonal, `u^s` as `(j, k) = (s, s)`.
    pub fn from_radial(s: &RadialSeries) -> Self {
        let terms = s
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| term(i, i, &Cplx::from_real(c.clone())))
            .collect();
        SeriesJson { order: s.order(), terms }
    }

    /// Holomorphic series: `z^j` as `(j, 0)`.
    pub fn from_uni(s: &UniSeries) -> Self {
        let terms = s
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| term(i, 0, c))
            .collect();
        SeriesJson { order: s.order(), terms }
    }

    fn parse_terms(&self, prec: u32) -> Result<Vec<(usize, usize, Cplx)>> {
        self.terms
            .iter()
            .map(|t| Ok((t.j, t.k, Cplx::new(parse_real(&t.re, prec)?, parse_real(&t.im, prec)?))))
            .collect()
    }

    pub fn to_bi(&self, prec: u32) -> Result<BiSeries> {
        let terms = self.parse_terms(prec)?;
        if let Some(t) = self.terms.iter().find(|t| t.j + t.k > self.order) {
            return Err(Error::Parse(format!("term ({}, {}) exceeds order {}", t.j, t.k, self.order)));
        }
        Ok(BiSeries::from_terms(terms, self.order, prec))
    }

    pub fn to_radial(&self, prec: u32) -> Result<RadialSeries> {
        let mut out = RadialSeries::zero(self.order, prec);
        for (j, k, c) in self.parse_terms(prec)? {
            if j != k || j > self.order {
                return Err(Error::Parse(format!("radial term ({j}, {k}) off the diagonal or beyond the order")));
            }
            if !c.im.is_zero() {
                return Err(Error::NotReal { context: "radial series json", residue: c.im.to_f64().abs() });
            }
            out.set(j, c.re);
        }
        Ok(out)
    }

    pub fn to_uni(&self, prec: u32) -> Result<UniSeries> {
        let mut out = UniSeries::zero(self.order, prec);
        for (j, k, c) in self.parse_terms(prec)? {
            if k != 0 || j > self.order {
                return Err(Error::Parse(format!("one-variable term ({j}, {k}) invalid")));
            }
            out.set(j, c);
        }
        Ok(out)
    }
}
