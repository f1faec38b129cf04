// SPDX-License-Identifier: Apache-2.0

//! Cross-module properties of sweeps and the steady state.

use std::f64::consts::PI;

use proptest::prelude::*;

use crate::experiments::{control_map, rabi_sweep, ramsey_fine_scan, Simulator, SolverSettings};
use crate::expm::expm_propagate;
use crate::fit::fit_sinusoid;
use crate::trion::{collapse_channels, initial_state, laser_frequency, TrionHamiltonian};
use crate::{DensityMatrix, InitialState, Pulse, PulseSequence, SystemParams};

fn sim(params: SystemParams, threads: usize) -> Simulator {
    Simulator::new(params, SolverSettings::default()).unwrap().with_threads(threads)
}

#[test]
fn serial_and_parallel_sweeps_are_identical() {
    let areas: Vec<f64> = (0..24).map(|k| 0.17 * k as f64).collect();
    let t = PulseSequence { detuning: 7.0, ..PulseSequence::default() };
    let a = rabi_sweep(&sim(SystemParams::default(), 1), &t, &areas).unwrap();
    let b = rabi_sweep(&sim(SystemParams::default(), 4), &t, &areas).unwrap();
    assert_eq!(
        a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
    assert_eq!(a.stats, b.stats);
}

#[test]
fn repeated_runs_are_bit_identical() {
    let s = sim(SystemParams::default(), 3);
    let t = PulseSequence { detuning: 14.5, ..PulseSequence::default() };
    let a = control_map(&s, &t, &[0.3, 1.1], &[0.0, 2.5, 5.0]).unwrap();
    let b = control_map(&s, &t, &[0.3, 1.1], &[0.0, 2.5, 5.0]).unwrap();
    assert_eq!(
        a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn ramsey_extremes_match_single_pulse_levels() {
    let closed = SystemParams::default().closed();
    let s = sim(closed, 2);
    let fine: Vec<f64> = (0..111).map(|k| 0.1 * k as f64).collect();
    let scan = ramsey_fine_scan(&s, &PulseSequence::default(), 0.5, &fine).unwrap();
    let fit = fit_sinusoid(&fine, &scan.values, laser_frequency(&s.params, 0.0) * 1e-6).unwrap();
    let (amp, offset) = (fit.get("amplitude").unwrap(), fit.get("offset").unwrap());
    let (lo, hi) = (offset - amp, offset + amp);
    let pi = s.point(&PulseSequence::single(Pulse::with_area(PI, 23.0, 0.0), 0.0)).unwrap().signal;
    let none = s.point(&PulseSequence::single(Pulse::with_area(0.0, 23.0, 0.0), 0.0)).unwrap().signal;
    assert!((hi - pi).abs() < 1e-3, "fringe max {hi} vs pi pulse {pi}");
    assert!((lo - none).abs() < 1e-3, "fringe min {lo} vs baseline {none}");
}

#[test]
fn steady_state_matches_long_time_propagation() {
    for params in [SystemParams::default(), SystemParams { gamma_pump: 0.0, ..SystemParams::default() }] {
        let relaxed = initial_state(&params, InitialState::SteadyState).unwrap();
        let idle = PulseSequence::single(Pulse { peak: 0.0, ..Pulse::default() }, 0.0);
        let h = TrionHamiltonian::new(&params, &idle);
        let start = DensityMatrix::from_populations([0.25; 4]).unwrap();
        let late = expm_propagate(&start, &h, &collapse_channels(&params, &idle), 0.0, 500.0, 50).unwrap();
        let gap = relaxed.matrix().max_abs_diff(late.matrix());
        assert!(gap < 1e-8, "gap {gap}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn population_signal_stays_in_unit_interval(
        area in 0.0f64..4.25,
        detuning in -25.0f64..25.0,
        coarse in 0.0f64..180.0,
        fine in 0.0f64..11.0,
        rate_scale in 0.2f64..5.0,
        two in any::<bool>(),
    ) {
        let d = SystemParams::default();
        let params = SystemParams {
            gamma_spont: d.gamma_spont * rate_scale,
            gamma_deph: d.gamma_deph * rate_scale,
            ..d
        };
        let pulse = Pulse::with_area(area * PI, 23.0, 0.0);
        let seq = if two { PulseSequence::pair(pulse, coarse, fine, detuning) } else { PulseSequence::single(pulse, detuning) };
        let v = sim(params, 1).point(&seq).unwrap().signal;
        prop_assert!((0.0..=1.0).contains(&v), "{}", v);
    }

    #[test]
    fn closed_evolution_stays_pure(area in 0.0f64..4.25, detuning in -20.0f64..20.0) {
        let s = sim(SystemParams::default().closed(), 1);
        let seq = PulseSequence::single(Pulse::with_area(area * PI, 23.0, 0.0), detuning);
        let traj = s.evolve(&seq, crate::OutputGrid::Final).unwrap();
        // unitary evolution keeps the mixture's purity of 1/2
        prop_assert!((traj.final_state().purity() - 0.5).abs() < 1e-7);
    }
}
