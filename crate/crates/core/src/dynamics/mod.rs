//! Orbits, contraction bounds, Neumann series, special conjugacies and circle maps.
//!
//! Orbit work runs in double precision except the Neumann ladder, which sums at the
//! working precision of the map.

pub mod contraction;
pub mod neumann;
pub mod orbit;
pub mod rotation;
pub mod sternberg;
mod svg;

pub use contraction::{contraction_bounds, contraction_bounds_radial, CertGrid, Certification, ContractionBounds, ContractionChoice};
pub use neumann::{default_ladder, deviate_torsion, neumann_run, NeumannOptions, NeumannRun, NeumannVerdict};
pub use orbit::{iterate, model_iterate, model_nu, radial_iterate};
pub use rotation::{
    arnold_lift, arnold_tongues, radius_tongues, rotation_number, LineScan, Plateau, RotationNumber, ScanKind, ScanOptions,
    TongueScan,
};
pub use sternberg::{sternberg_eval, RotationMap, Sternberg};
