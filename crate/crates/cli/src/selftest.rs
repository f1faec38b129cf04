// SPDX-License-Identifier: Apache-2.0

//! Seeded invariant and oracle-equivalence battery.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trion_core::expm::expm_propagate;
use trion_core::trion::{collapse_channels, master_equation, TrionHamiltonian};
use trion_core::{
    integrate, DensityMatrix, DephasingForm, IntegratorOptions, OutputGrid, Pulse, PulseSequence, SystemParams,
};

pub const INVARIANT_CONFIGS: usize = 20;
pub const ORACLE_CASES: usize = 10;
pub const ORACLE_SLICES: usize = 2000;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let amps: [Complex64; 4] =
        std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let pure = DensityMatrix::pure(amps.map(|a| a / norm)).expect("normalized");
    let mix = DensityMatrix::from_populations([0.5, 0.5, 0.0, 0.0]).expect("valid populations");
    let w = rng.gen_range(0.0..1.0);
    DensityMatrix::from_matrix_unchecked(pure.matrix().scale_real(w) + mix.matrix().scale_real(1.0 - w))
}

/// Rates scaled by factors in [0.5, 2] around `base`, random area, delays and
/// detuning.
fn random_config(rng: &mut ChaCha8Rng, base: &SystemParams) -> (SystemParams, PulseSequence) {
    let mut scale = || rng.gen_range(0.5..2.0);
    let params = SystemParams {
        gamma_spont: base.gamma_spont * scale(),
        gamma_pump: base.gamma_pump * scale(),
        gamma_deph: base.gamma_deph * scale(),
        alpha_phonon: base.alpha_phonon * scale(),
        phonon_kappa: base.phonon_kappa * scale(),
        dephasing_form: if rng.gen_bool(0.5) { DephasingForm::Manifold } else { DephasingForm::PerLevel },
        ..base.clone()
    };
    let pulse = Pulse::with_area(rng.gen_range(0.0..4.25) * PI, base_fwhm(), 0.0);
    let detuning = rng.gen_range(-20.0..20.0);
    let seq = if rng.gen_bool(0.6) {
        PulseSequence::pair(pulse, rng.gen_range(0.0..180.0), rng.gen_range(0.0..11.0), detuning)
    } else {
        PulseSequence::single(pulse, detuning)
    };
    (params, seq)
}

fn base_fwhm() -> f64 {
    Pulse::default().fwhm
}

/// Trace, Hermiticity and positivity along densely sampled trajectories.
pub fn invariants(seed: u64, base: &SystemParams) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut trace, mut herm, mut min_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..INVARIANT_CONFIGS {
        let (params, seq) = random_config(&mut rng, base);
        let rho0 = random_state(&mut rng);
        let eq = master_equation(&params, &seq);
        let opts = IntegratorOptions::default().with_output(OutputGrid::Uniform(1e-4));
        match integrate(&rho0, |t, r| eq.rhs(t, r), seq.window_start_ns(), seq.readout_time_ns(), &opts) {
            Ok(traj) => {
                for (_, rho) in traj.iter() {
                    let d = rho.diagnostics();
                    trace = trace.max(d.trace_error);
                    herm = herm.max(d.hermiticity_error);
                    min_eig = min_eig.min(d.min_eigenvalue);
                }
            }
            Err(e) => return Check { name: "invariants", pass: false, detail: format!("integration failed: {e}") },
        }
    }
    Check {
        name: "invariants",
        pass: trace < 1e-8 && herm < 1e-10 && min_eig > -1e-7,
        detail: format!(
            "{INVARIANT_CONFIGS} configs: max |Tr-1| {trace:.1e}, max Hermiticity dev {herm:.1e}, min eigenvalue {min_eig:.1e}"
        ),
    }
}

/// Adaptive integrator against piecewise matrix-exponential propagation.
pub fn oracle(seed: u64, base: &SystemParams) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut cases = vec![(
        base.clone(),
        PulseSequence::single(Pulse::with_area(PI, base_fwhm(), 0.0), 0.0),
        DensityMatrix::from_populations([0.5, 0.5, 0.0, 0.0]).expect("valid populations"),
    )];
    for _ in 0..ORACLE_CASES {
        let (p, s) = random_config(&mut rng, base);
        cases.push((p, s, random_state(&mut rng)));
    }
    let mut worst = 0.0f64;
    for (params, seq, rho0) in &cases {
        let eq = master_equation(params, seq);
        let (t0, t1) = (seq.window_start_ns(), seq.readout_time_ns());
        let opts = IntegratorOptions::default().with_tol(1e-10).with_output(OutputGrid::Final);
        let adaptive = integrate(rho0, |t, r| eq.rhs(t, r), t0, t1, &opts);
        let h = TrionHamiltonian::new(params, seq);
        let exact = expm_propagate(rho0, &h, &collapse_channels(params, seq), t0, t1, ORACLE_SLICES);
        match (adaptive, exact) {
            (Ok(a), Ok(b)) => worst = worst.max(a.final_state().matrix().max_abs_diff(b.matrix())),
            (Err(e), _) => return Check { name: "oracle", pass: false, detail: format!("integration failed: {e}") },
            (_, Err(e)) => return Check { name: "oracle", pass: false, detail: format!("propagation failed: {e}") },
        }
    }
    Check {
        name: "oracle",
        pass: worst < 1e-6,
        detail: format!("{} cases, {ORACLE_SLICES} slices: max entrywise gap {worst:.1e}", cases.len()),
    }
}

pub fn battery(seed: u64, base: &SystemParams) -> Vec<Check> {
    vec![invariants(seed, base), oracle(seed, base)]
}
