//! Gauge transformations, general and polynomial normal forms.

pub mod foliation;
pub mod gauge;
pub mod onedim;
pub mod polynf;
pub mod rc;

pub use foliation::{circle_defect, conjugate, invert_tangent, preserved_foliations};
pub use gauge::{
    apply_gauge, first_nonvanishing_invariant, monomialize_conservative, GaugeMap, InvariantReport, InvariantVerdict,
    Monomialized, NormalFormPair,
};
pub use onedim::{one_dim_conjugacy, solve_gamma, GammaSolution, OneDimConjugacy};
pub use polynf::{polynomial_normal_form, PolyTarget, PolynomialNormalForm};
pub use rc::{rc_classify, Growth, RcReport, SeriesGrowth};
