//! Truncated series rings at configurable working precision.

mod bi;
mod json;
mod uni;

pub use bi::{index, BiSeries};
pub use json::{SeriesJson, TermJson};
pub use uni::{RadialSeries, Series1, UniSeries};
