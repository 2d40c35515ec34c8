//! Formal normal forms of planar diffeomorphisms with an elliptic fixed point
//! that preserve the foliation by circles centred at the origin.
//!
//! * [`series`]: truncated series in `(z, zbar)` and in `u = |z|^2`.
//! * [`maps`]: maps `F(z) = lambda z (1 + f(|z|^2)) e^{2 pi i g(z)}`.
//! * [`normalizer`]: degree-by-degree homological solver.
//! * [`transforms`]: gauge maps, general and polynomial normal forms.
//! * [`dynamics`]: orbits, contraction bounds, Neumann series, circle maps.
//! * [`cli`]: the `elliptic-nf` command line.
//! * [`diagnostics`]: continued fractions, growth profiles, slope reduction.

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod maps;
pub mod normalizer;
pub mod precision;
pub mod series;
pub mod transforms;

pub use error::{Error, Result};
pub use precision::{Cplx, Precision, Real};
