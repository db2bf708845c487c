//! Eigenstate entanglement and localization in coupled chaotic Floquet
//! systems: operator construction, spectral decomposition, entanglement
//! measures, closed-form transition curves and ensemble sweeps.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod measures;
pub mod models;
pub mod oracle;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use models::{FloquetOperator, ModelKind, ModelSpec};
pub use num_complex::Complex64 as C64;
pub use rng::{RandomStream, UnitaryMatrix};
pub use spectral::{EigenstateSet, SchmidtSpectrum};
