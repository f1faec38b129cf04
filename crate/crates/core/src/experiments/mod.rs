// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps over pulse area, interpulse delay and detuning, and the
//! detected-signal observable.

mod analysis;
mod calibrate;
mod pool;
mod sweeps;

use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::fit::FitError;
use crate::integrate::{
    integrate, IntegrateError, IntegratorOptions, OutputGrid, SolverStats, Trajectory, DEFAULT_TOL,
};
use crate::trion::{initial_state, master_equation, InitialState, PulseSequence, SystemParams, TrionError};
use crate::units::ps_to_ns;

pub use analysis::{
    linear_regression, local_maxima, low_area_profile, map_peaks, parabolic_peak, rabi_extrema, unwrap_phases,
    AreaProfile, RabiExtrema,
};
pub use calibrate::{calibrate_kappa, rabi_damping_ratio, KappaCalibration};
pub use pool::{worker_threads, THREADS_ENV};
pub use sweeps::{
    analyze_coherence, coherence_fringes, coherence_scan, control_map, default_areas, default_coarse_delays,
    default_fine_delays, default_map_areas, default_map_fine_delays, rabi_detuning_sweep, rabi_sweep, ramsey_fine_scan,
    CoherenceScan,
};

/// How the detected counts are modelled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalMode {
    /// ρ₃₃ at the readout time t₁.
    #[default]
    Population,
    /// (γ_spont/2)·∫ρ₃₃ dt over the integration window.
    IntegratedEmission,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub tol: f64,
    /// Output spacing for integrated-emission readout, ps.
    pub sample_interval: f64,
    pub initial_state: InitialState,
    pub signal: SignalMode,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            sample_interval: 0.1,
            initial_state: InitialState::SpinMixture,
            signal: SignalMode::Population,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] TrionError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("trajectory ends at {end} ns, before the readout time {readout} ns")]
    TrajectoryTooShort { end: f64, readout: f64 },
    #[error("fringe fit failed at coarse delay {coarse_delay_ps} ps: {source}")]
    FringeFit { coarse_delay_ps: f64, source: FitError },
    #[error("decay fit failed: {0}")]
    DecayFit(FitError),
    #[error("invalid grid `{axis}`: {reason}")]
    InvalidGrid { axis: &'static str, reason: String },
    #[error("{failed} of {total} sweep points failed; first: {first}")]
    Sweep { failed: usize, total: usize, first: String },
}

/// Detected signal from a trajectory that ends at the readout time.
pub fn signal(
    trajectory: &Trajectory,
    seq: &PulseSequence,
    mode: SignalMode,
    params: &SystemParams,
) -> Result<f64, ExperimentError> {
    let readout = seq.readout_time_ns();
    let end = trajectory.final_time();
    if end < readout - 1e-12 {
        return Err(ExperimentError::TrajectoryTooShort { end, readout });
    }
    match mode {
        SignalMode::Population => {
            let k = trajectory.times.partition_point(|&t| t < readout - 1e-12);
            Ok(trajectory.states[k].population(3))
        }
        SignalMode::IntegratedEmission => {
            let mut acc = 0.0;
            for k in 1..trajectory.len() {
                let (t0, t1) = (trajectory.times[k - 1], trajectory.times[k].min(readout));
                if t1 <= t0 {
                    break;
                }
                acc += 0.5 * (t1 - t0) * (trajectory.states[k - 1].population(3) + trajectory.states[k].population(3));
            }
            Ok(0.5 * params.gamma_spont * acc)
        }
    }
}

/// Runs single integrations of the model from a fixed initial state.
#[derive(Clone, Debug)]
pub struct Simulator {
    pub params: SystemParams,
    pub solver: SolverSettings,
    pub threads: usize,
    rho0: DensityMatrix,
}

/// Signal and solver work for one sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointResult {
    pub signal: f64,
    pub stats: SolverStats,
}

impl Simulator {
    pub fn new(params: SystemParams, solver: SolverSettings) -> Result<Self, ExperimentError> {
        params.validate()?;
        let rho0 = initial_state(&params, solver.initial_state)?;
        Ok(Self { params, solver, threads: worker_threads(), rho0 })
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.rho0
    }

    /// Evolves over `[t₀ − 3.2·τ_FWHM, t₁]`.
    pub fn evolve(&self, seq: &PulseSequence, output: OutputGrid) -> Result<Trajectory, ExperimentError> {
        seq.validate()?;
        let eq = master_equation(&self.params, seq);
        let opts = IntegratorOptions::default().with_tol(self.solver.tol).with_output(output);
        Ok(integrate(&self.rho0, |t, r| eq.rhs(t, r), seq.window_start_ns(), seq.readout_time_ns(), &opts)?)
    }

    pub fn point(&self, seq: &PulseSequence) -> Result<PointResult, ExperimentError> {
        let output = match self.solver.signal {
            SignalMode::Population => OutputGrid::Final,
            SignalMode::IntegratedEmission => OutputGrid::Uniform(ps_to_ns(self.solver.sample_interval)),
        };
        let traj = self.evolve(seq, output)?;
        Ok(PointResult { signal: signal(&traj, seq, self.solver.signal, &self.params)?, stats: traj.stats })
    }
}

/// A named coordinate vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, unit: &str, values: Vec<f64>) -> Self {
        Self { name: name.into(), unit: unit.into(), values }
    }
}

/// Everything needed to reproduce a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub experiment: String,
    pub params: SystemParams,
    pub sequence: PulseSequence,
    pub solver: SolverSettings,
    pub phonon_kappa_ns: f64,
    /// Laser frequency ω_L/2π of the template, GHz.
    pub laser_frequency_ghz: f64,
    pub threads: usize,
    pub created_unix_s: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: usize,
    pub message: String,
}

/// Values on the product grid of `axes`, last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub values: Vec<f64>,
    pub value_name: String,
    pub stats: SolverStats,
    pub manifest: SweepManifest,
    /// Points that could not be computed; their values are NaN.
    pub failures: Vec<PointFailure>,
}

impl SweepResult {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    /// Axis coordinates of flat index `k`.
    pub fn coordinates(&self, k: usize) -> Vec<f64> {
        let mut rem = k;
        let mut out = vec![0.0; self.axes.len()];
        for (d, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.values.len();
            out[d] = axis.values[rem % n];
            rem /= n;
        }
        out
    }

    /// Row `i` of a 2-D result.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.axes[self.axes.len() - 1].values.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// The result itself, or an error if any point failed.
    pub fn into_complete(self) -> Result<Self, ExperimentError> {
        match self.failures.first() {
            None => Ok(self),
            Some(f) => Err(ExperimentError::Sweep {
                failed: self.failures.len(),
                total: self.values.len(),
                first: f.message.clone(),
            }),
        }
    }

    /// Values min-max normalized to [0, 1] (ignoring NaN).
    pub fn normalized(&self) -> Vec<f64> {
        let (lo, hi) = self
            .values
            .iter()
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = hi - lo;
        self.values.iter().map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 }).collect()
    }
}

pub(crate) fn manifest(experiment: &str, sim: &Simulator, sequence: &PulseSequence) -> SweepManifest {
    let created_unix_s =
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    SweepManifest {
        experiment: experiment.into(),
        params: sim.params.clone(),
        sequence: *sequence,
        solver: sim.solver.clone(),
        phonon_kappa_ns: sim.params.phonon_kappa,
        laser_frequency_ghz: crate::trion::laser_frequency(&sim.params, sequence.detuning),
        threads: sim.threads,
        created_unix_s,
    }
}
