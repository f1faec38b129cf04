// SPDX-License-Identifier: Apache-2.0

//! The negatively charged quantum dot in a Voigt field: two spin ground
//! states (1 = |↑⟩, 2 = |↓⟩) and two trion states (3, 4), driven on the
//! 1↔4 and 2↔3 transitions by one or two delayed copies of a Gaussian pulse.
//!
//! Production runs use the frame rotating at the laser frequency ω_L, where
//! the unperturbed Hamiltonian becomes
//! `diag(−ΔE_gs/2, ΔE_gs/2, ΔE_gs/2 + Δω_L, ΔE_tr + ΔE_gs/2 + Δω_L)` and the
//! drive carries the interpulse phase `e^{iω_L Δt}`. A lab-frame Hamiltonian
//! is provided for cross-checks at artificially small ω₀.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::integrate::{integrate, IntegrateError, IntegratorOptions, OutputGrid};
use crate::lindblad::{CollapseChannel, Hamiltonian, MasterEquation};
use crate::matrix::ComplexMatrix4;
use crate::units::{fractional_cycles, fs_to_ns, ghz_to_angular, ps_to_ns, TWO_PI};

/// Envelope is below 1e-12 of its peak beyond this many FWHM from the centre.
pub const ENVELOPE_CUTOFF_FWHM: f64 = 3.2;

/// Phonon-channel calibration κ (ns). With the default α this makes the
/// excitation-induced dephasing rate α·κ²·Ω² = 3.6e-3 ns·Ω².
pub const DEFAULT_PHONON_KAPPA_NS: f64 = 3.6e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrionError {
    #[error("parameter `{name}` out of range: {value} ({reason})")]
    OutOfRange { name: &'static str, value: f64, reason: &'static str },
    #[error("steady state not reached after {0} ns of relaxation")]
    SteadyStateNotConverged(f64),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), TrionError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(TrionError::OutOfRange { name, value, reason })
    }
}

/// Form of the pure-dephasing collapse operator on the trion manifold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingForm {
    /// One channel √γ·(s₃₃ + s₄₄).
    #[default]
    Manifold,
    /// Independent channels √γ·s₃₃ and √γ·s₄₄.
    PerLevel,
}

/// Physical constants of the dot. Frequencies in GHz (E/2π), rates in ns⁻¹.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Ground-state Zeeman splitting ΔE_gs/2π, GHz.
    pub delta_e_gs: f64,
    /// Trion splitting ΔE_tr/2π, GHz.
    pub delta_e_tr: f64,
    /// Zero-field transition frequency ω₀/2π, GHz.
    pub omega0: f64,
    pub gamma_spont: f64,
    pub gamma_pump: f64,
    pub gamma_deph: f64,
    pub alpha_phonon: f64,
    /// Calibration κ (ns) turning Ω (rad/ns) into the dimensionless factor of
    /// the phonon channel amplitude √α·κ·(Ω(t) + Ω(t − Δt)).
    pub phonon_kappa: f64,
    pub dephasing_form: DephasingForm,
    /// Decay rate of the 1↔2 spin coherence, ns⁻¹. Zero disables the channel.
    pub spin_dephasing: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            delta_e_gs: 104.2,
            delta_e_tr: 15.1,
            omega0: 333e3,
            gamma_spont: 1.0,
            gamma_pump: 50.0 / 420.0,
            gamma_deph: 1.0 / 145e-3,
            alpha_phonon: 1.0 / 3.6e-3,
            phonon_kappa: DEFAULT_PHONON_KAPPA_NS,
            dephasing_form: DephasingForm::Manifold,
            spin_dephasing: 0.0,
        }
    }
}

impl SystemParams {
    /// All dissipation switched off.
    pub fn closed(&self) -> Self {
        Self {
            gamma_spont: 0.0,
            gamma_pump: 0.0,
            gamma_deph: 0.0,
            alpha_phonon: 0.0,
            spin_dephasing: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), TrionError> {
        check("omega0", self.omega0, self.omega0 > 0.0, "must be positive")?;
        check("delta_e_tr", self.delta_e_tr, self.delta_e_tr > 0.0, "must be positive")?;
        check(
            "delta_e_gs",
            self.delta_e_gs,
            self.delta_e_gs > self.delta_e_tr,
            "ground splitting must exceed the trion splitting",
        )?;
        for (name, v) in [
            ("gamma_spont", self.gamma_spont),
            ("gamma_pump", self.gamma_pump),
            ("gamma_deph", self.gamma_deph),
            ("alpha_phonon", self.alpha_phonon),
            ("phonon_kappa", self.phonon_kappa),
            ("spin_dephasing", self.spin_dephasing),
        ] {
            check(name, v, v >= 0.0, "must be non-negative")?;
        }
        Ok(())
    }
}

/// One Gaussian pulse: Ω(t) = 2π·peak·exp(−4 ln2 (t − center)²/fwhm²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Pulse {
    /// Peak Ω/2π, GHz.
    pub peak: f64,
    /// Envelope FWHM, ps.
    pub fwhm: f64,
    /// Arrival time of the (first) pulse, ps.
    pub center: f64,
}

impl Default for Pulse {
    fn default() -> Self {
        Self { peak: 0.0, fwhm: 23.0, center: 0.0 }
    }
}

/// √(π / (4 ln 2)): ∫exp(−4 ln2 x²/w²) dx = w·GAUSS_AREA_FACTOR.
pub fn gauss_area_factor() -> f64 {
    (PI / (4.0 * LN_2)).sqrt()
}

impl Pulse {
    /// Pulse whose full area 2∫Ω dt equals `area` (rad).
    pub fn with_area(area: f64, fwhm: f64, center: f64) -> Self {
        let integral = area / 2.0;
        let peak_angular = integral / (ps_to_ns(fwhm) * gauss_area_factor());
        Self { peak: peak_angular / TWO_PI, fwhm, center }
    }

    /// Full pulse area 2∫Ω dt in rad.
    pub fn area(&self) -> f64 {
        2.0 * ghz_to_angular(self.peak) * ps_to_ns(self.fwhm) * gauss_area_factor()
    }

    /// Area 2∫_{−∞}^{t} Ω dt' delivered up to `t_ps`.
    pub fn area_until(&self, t_ps: f64) -> f64 {
        let sigma = self.fwhm / (8.0 * LN_2).sqrt();
        let z = (t_ps - self.center) / (sigma * std::f64::consts::SQRT_2);
        0.5 * self.area() * (1.0 + libm::erf(z))
    }

    pub fn validate(&self) -> Result<(), TrionError> {
        check("peak", self.peak, self.peak >= 0.0, "must be non-negative")?;
        check("fwhm", self.fwhm, self.fwhm > 0.0, "must be positive")?;
        check("center", self.center, true, "must be finite")
    }

    #[inline]
    fn envelope_ns(&self, t_ns: f64) -> f64 {
        let w = ps_to_ns(self.fwhm);
        let x = t_ns - ps_to_ns(self.center);
        ghz_to_angular(self.peak) * (-4.0 * LN_2 * x * x / (w * w)).exp()
    }
}

/// Drive strength Ω(t) in rad/ns at `t_ps`.
pub fn envelope(pulse: &Pulse, t_ps: f64) -> f64 {
    pulse.envelope_ns(ps_to_ns(t_ps))
}

/// One pulse or a delayed pair, with the laser detuning.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSequence {
    pub pulse: Pulse,
    /// Coarse delay t_c, ps.
    pub coarse_delay: f64,
    /// Fine delay t_f, fs.
    pub fine_delay: f64,
    /// Laser detuning Δω_L/2π, GHz.
    pub detuning: f64,
    pub second_pulse: bool,
}

impl Default for PulseSequence {
    fn default() -> Self {
        Self { pulse: Pulse::default(), coarse_delay: 80.0, fine_delay: 0.0, detuning: 0.0, second_pulse: false }
    }
}

impl PulseSequence {
    pub fn single(pulse: Pulse, detuning: f64) -> Self {
        Self { pulse, coarse_delay: 0.0, fine_delay: 0.0, detuning, second_pulse: false }
    }

    pub fn pair(pulse: Pulse, coarse_delay_ps: f64, fine_delay_fs: f64, detuning: f64) -> Self {
        Self { pulse, coarse_delay: coarse_delay_ps, fine_delay: fine_delay_fs, detuning, second_pulse: true }
    }

    /// Total delay Δt in ns; zero in single-pulse mode.
    pub fn delay_ns(&self) -> f64 {
        if self.second_pulse {
            ps_to_ns(self.coarse_delay) + fs_to_ns(self.fine_delay)
        } else {
            0.0
        }
    }

    /// Readout time t₁ = t₀ + Δt + τ_FWHM, ns.
    pub fn readout_time_ns(&self) -> f64 {
        ps_to_ns(self.pulse.center + self.pulse.fwhm) + self.delay_ns()
    }

    /// Start of the integration window, t₀ − 3.2·τ_FWHM, ns.
    pub fn window_start_ns(&self) -> f64 {
        ps_to_ns(self.pulse.center - ENVELOPE_CUTOFF_FWHM * self.pulse.fwhm)
    }

    /// Ω(t) + Ω(t − Δt) in rad/ns (second term only in dual-pulse mode).
    pub fn total_envelope_ns(&self, t_ns: f64) -> f64 {
        let mut v = self.pulse.envelope_ns(t_ns);
        if self.second_pulse {
            v += self.pulse.envelope_ns(t_ns - self.delay_ns());
        }
        v
    }

    pub fn validate(&self) -> Result<(), TrionError> {
        self.pulse.validate()?;
        check("detuning", self.detuning, true, "must be finite")?;
        check("coarse_delay", self.coarse_delay, true, "must be finite")?;
        check("fine_delay", self.fine_delay, true, "must be finite")?;
        if self.second_pulse {
            let total = ps_to_ns(self.coarse_delay) + fs_to_ns(self.fine_delay);
            check("coarse_delay", self.coarse_delay, total >= 0.0, "total delay must be non-negative")?;
        }
        Ok(())
    }
}

/// ω_L/2π = ω₀/2π − ΔE_tr/4π − ΔE_gs/4π − Δω_L/2π, in GHz.
pub fn laser_frequency(params: &SystemParams, detuning: f64) -> f64 {
    params.omega0 - params.delta_e_tr / 2.0 - params.delta_e_gs / 2.0 - detuning
}

/// ω_L·Δt reduced to `[0, 2π)`, with the optical product formed exactly.
pub fn interpulse_phase(params: &SystemParams, seq: &PulseSequence) -> f64 {
    if !seq.second_pulse {
        return 0.0;
    }
    let f = laser_frequency(params, seq.detuning);
    let cycles = fractional_cycles(f, seq.coarse_delay, 1e3) + fractional_cycles(f, seq.fine_delay, 1e6);
    TWO_PI * cycles.rem_euclid(1.0)
}

/// Rotating-frame Hamiltonian with precomputed constants. `at` takes ns.
#[derive(Clone, Debug)]
pub struct TrionHamiltonian {
    diagonal: [f64; 4],
    seq: PulseSequence,
    delay_ns: f64,
    phase: Complex64,
}

impl TrionHamiltonian {
    pub fn new(params: &SystemParams, seq: &PulseSequence) -> Self {
        let gs = ghz_to_angular(params.delta_e_gs);
        let tr = ghz_to_angular(params.delta_e_tr);
        let det = ghz_to_angular(seq.detuning);
        let phi = interpulse_phase(params, seq);
        Self {
            diagonal: [-gs / 2.0, gs / 2.0, gs / 2.0 + det, tr + gs / 2.0 + det],
            seq: *seq,
            delay_ns: seq.delay_ns(),
            phase: Complex64::new(phi.cos(), phi.sin()),
        }
    }

    /// Ω(t) + Ω(t − Δt)·e^{iω_L Δt}.
    #[inline]
    pub fn drive(&self, t_ns: f64) -> Complex64 {
        let mut g = Complex64::new(self.seq.pulse.envelope_ns(t_ns), 0.0);
        if self.seq.second_pulse {
            g += self.phase * self.seq.pulse.envelope_ns(t_ns - self.delay_ns);
        }
        g
    }
}

impl Hamiltonian for TrionHamiltonian {
    fn at(&self, t: f64) -> ComplexMatrix4 {
        let mut h = ComplexMatrix4::from_real_diagonal(self.diagonal);
        let g = self.drive(t);
        // (s14 + s23)·g + (s41 + s32)·g*
        h[(0, 3)] = g;
        h[(1, 2)] = g;
        h[(3, 0)] = g.conj();
        h[(2, 1)] = g.conj();
        h
    }
}

/// Rotating-frame Hamiltonian at `t_ps`, rad/ns.
pub fn rotating_hamiltonian(params: &SystemParams, seq: &PulseSequence, t_ps: f64) -> ComplexMatrix4 {
    TrionHamiltonian::new(params, seq).at(ps_to_ns(t_ps))
}

/// Lab-frame counterpart of [`TrionHamiltonian`]: the unshifted H₀ with the
/// drive multiplied by e^{±iω_L t}. Only affordable for small ω₀.
#[derive(Clone, Debug)]
pub struct LabFrameHamiltonian {
    rotating: TrionHamiltonian,
    h0: [f64; 4],
    omega_l: f64,
}

impl LabFrameHamiltonian {
    pub fn new(params: &SystemParams, seq: &PulseSequence) -> Self {
        let gs = ghz_to_angular(params.delta_e_gs);
        let tr = ghz_to_angular(params.delta_e_tr);
        let w0 = ghz_to_angular(params.omega0);
        Self {
            rotating: TrionHamiltonian::new(params, seq),
            h0: [-gs / 2.0, gs / 2.0, w0 - tr / 2.0, w0 + tr / 2.0],
            omega_l: ghz_to_angular(laser_frequency(params, seq.detuning)),
        }
    }
}

impl Hamiltonian for LabFrameHamiltonian {
    fn at(&self, t: f64) -> ComplexMatrix4 {
        let mut h = ComplexMatrix4::from_real_diagonal(self.h0);
        let carrier = Complex64::from_polar(1.0, self.omega_l * t);
        let g = self.rotating.drive(t) * carrier;
        h[(0, 3)] = g;
        h[(1, 2)] = g;
        h[(3, 0)] = g.conj();
        h[(2, 1)] = g.conj();
        h
    }
}

fn s(i: usize, j: usize) -> ComplexMatrix4 {
    ComplexMatrix4::transition(i, j)
}

/// Dissipative channels of the model. Channels with zero rate are omitted.
pub fn collapse_channels(params: &SystemParams, seq: &PulseSequence) -> Vec<CollapseChannel> {
    let mut out = Vec::new();
    let mut push = |label: &str, op: ComplexMatrix4, rate: f64| {
        if rate > 0.0 {
            out.push(CollapseChannel::constant(label, op, rate).expect("validated rate"));
        }
    };
    let half_spont = params.gamma_spont / 2.0;
    push("decay_3_1", s(1, 3), half_spont);
    push("decay_3_2", s(2, 3), half_spont);
    push("decay_4_1", s(1, 4), half_spont);
    push("decay_4_2", s(2, 4), half_spont);
    let half_pump = params.gamma_pump / 2.0;
    push("pump_1_3", s(3, 1), half_pump);
    push("pump_2_3", s(3, 2), half_pump);
    push("pump_1_4", s(4, 1), half_pump);
    push("pump_2_4", s(4, 2), half_pump);
    match params.dephasing_form {
        DephasingForm::Manifold => push("dephasing", s(3, 3) + s(4, 4), params.gamma_deph),
        DephasingForm::PerLevel => {
            push("dephasing_3", s(3, 3), params.gamma_deph);
            push("dephasing_4", s(4, 4), params.gamma_deph);
        }
    }
    push("spin_dephasing", (s(1, 1) - s(2, 2)).scale_real(std::f64::consts::FRAC_1_SQRT_2), params.spin_dephasing);

    let amp = params.alpha_phonon.sqrt() * params.phonon_kappa;
    if amp > 0.0 {
        for (label, level) in [("phonon_3", 3), ("phonon_4", 4)] {
            let seq = *seq;
            out.push(CollapseChannel::time_dependent(label, s(level, level), move |t| amp * seq.total_envelope_ns(t)));
        }
    }
    out
}

/// Master equation of the driven dot in the rotating frame.
pub fn master_equation(params: &SystemParams, seq: &PulseSequence) -> MasterEquation<TrionHamiltonian> {
    MasterEquation::new(TrionHamiltonian::new(params, seq), collapse_channels(params, seq))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// ½(s₁₁ + s₂₂): each spin state with 50% probability.
    #[default]
    SpinMixture,
    /// Fixed point of the undriven pump + decay dynamics.
    SteadyState,
}

/// Relaxation budget for the steady-state search, ns.
pub const STEADY_STATE_MAX_NS: f64 = 1e4;

/// Bound on both the change over one relaxation chunk and |dρ/dt| (ns⁻¹).
pub const STEADY_STATE_THRESHOLD: f64 = 1e-9;

pub fn initial_state(params: &SystemParams, mode: InitialState) -> Result<DensityMatrix, TrionError> {
    match mode {
        InitialState::SpinMixture => Ok(DensityMatrix::from_populations([0.5, 0.5, 0.0, 0.0]).expect("valid state")),
        InitialState::SteadyState => steady_state(params),
    }
}

fn steady_state(params: &SystemParams) -> Result<DensityMatrix, TrionError> {
    params.validate()?;
    let undriven = PulseSequence::single(Pulse { peak: 0.0, ..Pulse::default() }, 0.0);
    let eq = master_equation(params, &undriven);
    let opts = IntegratorOptions::default().with_tol(1e-10).with_output(OutputGrid::Final);
    let mut rho = DensityMatrix::from_populations([0.25; 4]).expect("valid state");
    let mut t = 0.0;
    let mut chunk: f64 = 1.0;
    while t < STEADY_STATE_MAX_NS {
        let span = chunk.min(STEADY_STATE_MAX_NS - t);
        let next = *integrate(&rho, |tt, r| eq.rhs(tt, r), t, t + span, &opts)?.final_state();
        let change = next.matrix().max_abs_diff(rho.matrix());
        let drift = eq.rhs(t + span, next.matrix()).map_err(IntegrateError::from)?.max_abs();
        rho = next;
        t += span;
        if change < STEADY_STATE_THRESHOLD && drift < STEADY_STATE_THRESHOLD {
            return Ok(rho);
        }
        chunk *= 2.0;
    }
    Err(TrionError::SteadyStateNotConverged(STEADY_STATE_MAX_NS))
}
