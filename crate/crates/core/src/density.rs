// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use crate::matrix::{ComplexMatrix4, DIM};

/// Tolerances a physical state must satisfy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateTolerances {
    pub trace: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl Default for StateTolerances {
    fn default() -> Self {
        Self { trace: 1e-8, hermiticity: 1e-10, min_eigenvalue: -1e-7 }
    }
}

/// A measured deviation from a valid density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn within(&self, tol: &StateTolerances) -> bool {
        self.trace_error < tol.trace
            && self.hermiticity_error < tol.hermiticity
            && self.min_eigenvalue > tol.min_eigenvalue
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("not a density matrix: |Tr ρ − 1| = {:.3e}, max |ρ − ρ†| = {:.3e}, λ_min = {:.3e}",
    .0.trace_error, .0.hermiticity_error, .0.min_eigenvalue)]
pub struct InvalidState(pub StateDiagnostics);

/// State of the four-level system. Construction through [`DensityMatrix::new`]
/// validates the matrix; the integrator produces values via
/// [`DensityMatrix::from_matrix_unchecked`] and checks invariants itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix4);

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix4) -> Result<Self, InvalidState> {
        let rho = Self(matrix);
        let diag = rho.diagnostics();
        if diag.within(&StateTolerances::default()) {
            Ok(rho)
        } else {
            Err(InvalidState(diag))
        }
    }

    pub fn from_matrix_unchecked(matrix: ComplexMatrix4) -> Self {
        Self(matrix)
    }

    /// Diagonal state with the given populations (levels 1..=4).
    pub fn from_populations(pops: [f64; DIM]) -> Result<Self, InvalidState> {
        Self::new(ComplexMatrix4::from_real_diagonal(pops))
    }

    /// `|level⟩⟨level|`, 1-based.
    pub fn pure_level(level: usize) -> Self {
        Self(ComplexMatrix4::projector(level))
    }

    /// Pure state `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(amplitudes: [Complex64; DIM]) -> Result<Self, InvalidState> {
        let mut m = ComplexMatrix4::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = amplitudes[i] * amplitudes[j].conj();
            }
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix4 {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix4 {
        self.0
    }

    /// Population of a 1-based level.
    pub fn population(&self, level: usize) -> f64 {
        self.0 .0[level - 1][level - 1].re
    }

    pub fn coherence(&self, i: usize, j: usize) -> Complex64 {
        self.0 .0[i - 1][j - 1]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.0.matmul(&self.0).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.hermitian_eigenvalues()[0]
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        StateDiagnostics {
            trace_error: (self.0.trace() - Complex64::new(1.0, 0.0)).norm(),
            hermiticity_error: self.0.hermiticity_error(),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }
}
