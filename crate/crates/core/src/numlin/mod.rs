//! Numerical kernels: dense complex matrices, eigenvalues, determinants,
//! polynomial zeros and spectrum matching.

mod assign;
mod eigen;
mod matrix;
mod zeros;

pub use assign::{match_spectra, min_cost_assignment, SpectrumMatch};
pub use eigen::{balance, eigenvalues, hessenberg};
pub use matrix::{determinant, CMatrix};
pub use zeros::{
    companion_matrix, find_polynomial_zeros, min_separation, sort_zeros, spread, ZeroSet, DEGENERACY_THRESHOLD,
    ZERO_RESIDUAL_BOUND,
};

use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatrixLabel {
    M,
    L,
}

/// A zero-built matrix together with its closed-form spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrix {
    pub entries: CMatrix,
    pub predicted: Vec<Complex64>,
    pub label: MatrixLabel,
}

impl SpectralMatrix {
    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    pub fn eigenvalues(&self) -> crate::Result<Vec<Complex64>> {
        eigenvalues(&self.entries)
    }

    pub fn spectrum_match(&self) -> crate::Result<SpectrumMatch> {
        match_spectra(&self.eigenvalues()?, &self.predicted)
    }
}
