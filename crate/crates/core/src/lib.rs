//! Hölder regularity of Schrödinger solutions on metric cones: link spectra,
//! indicial exponents, Dirichlet-to-Neumann spectra, energy monotonicity and
//! Morrey-type exponent fits on metric-measure graphs.

pub mod cone;
pub mod error;
pub mod exponents;
pub mod linalg;
pub mod links;
pub mod morrey;
pub mod par;
pub mod pipeline;

pub use error::{Error, Result};
