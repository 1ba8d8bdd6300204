//! Zeros of Askey-Wilson and q-Racah polynomials and the matrices built
//! from them.
//!
//! The crate evaluates both polynomial families, locates their zeros,
//! assembles the zero-built matrices `M` (Askey-Wilson) and `L` (q-Racah),
//! and checks the identities they satisfy: the algebraic equations obeyed by
//! the zeros, the closed-form spectra, trace and determinant formulas,
//! rational spectra for rational parameters, isospectral deformations, and
//! the link between each matrix and the linearization of a flow on the zeros.

pub mod awspec;
pub mod ddouble;
pub mod error;
mod extended;
pub mod numlin;
pub mod polyform;
pub mod qkernel;
pub mod racahspec;
pub mod recurrence;
pub mod report;
pub mod sampling;
pub mod suite;
pub mod tolerances;
pub mod zeroflow;

pub use error::{Error, Result};
pub use numlin::{SpectralMatrix, ZeroSet};
pub use polyform::{AWParams, Family, Params, RacahParams};
pub use report::VerificationReport;
