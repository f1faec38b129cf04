// SPDX-License-Identifier: Apache-2.0

//! Lindblad dynamics of a driven four-level trion (double-Λ) system in a
//! charged quantum dot, with the sweep experiments and curve fits built on it.

pub mod density;
pub mod experiments;
pub mod expm;
pub mod fit;
pub mod integrate;
pub mod lindblad;
pub mod matrix;
pub mod trion;
pub mod units;
pub mod zeeman;

pub use density::{DensityMatrix, InvalidState, StateDiagnostics, StateTolerances};
pub use integrate::{integrate, IntegrateError, IntegratorOptions, OutputGrid, SolverStats, Trajectory};
pub use lindblad::{CollapseChannel, Hamiltonian, LindbladError, MasterEquation, RateLaw};
pub use matrix::ComplexMatrix4;
pub use trion::{DephasingForm, InitialState, Pulse, PulseSequence, SystemParams, TrionError};
pub use zeeman::{MagnetoModel, ZeemanLines};

#[cfg(test)]
mod properties;
