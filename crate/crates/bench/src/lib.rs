// SPDX-License-Identifier: Apache-2.0

//! Fixed workloads shared by the benchmarks.

use std::f64::consts::PI;

use trion_core::{Pulse, PulseSequence, SystemParams};

/// Dual π/2 pulses 80 ps apart at the given detuning (GHz).
pub fn ramsey_sequence(detuning: f64) -> PulseSequence {
    PulseSequence::pair(Pulse::with_area(PI / 2.0, 23.0, 0.0), 80.0, 0.0, detuning)
}

/// A single π pulse on resonance.
pub fn rabi_sequence() -> PulseSequence {
    PulseSequence::single(Pulse::with_area(PI, 23.0, 0.0), 0.0)
}

pub fn params() -> SystemParams {
    SystemParams::default()
}
