// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::pool::run_points;
use super::{manifest, Axis, ExperimentError, Simulator, SweepResult};
use crate::fit::{fit_exponential, fit_sinusoid, DecayFits, FitReport};
use crate::trion::{laser_frequency, Pulse, PulseSequence};

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// 81 areas over [0, 4.25]π.
pub fn default_areas() -> Vec<f64> {
    linspace(0.0, 4.25, 81)
}

/// 111 fine delays over [0, 11] fs.
pub fn default_fine_delays() -> Vec<f64> {
    linspace(0.0, 11.0, 111)
}

/// 31 coarse delays from 80 ps in 3.34 ps steps.
pub fn default_coarse_delays() -> Vec<f64> {
    (0..31).map(|k| 80.0 + 3.34 * k as f64).collect()
}

/// 61 per-pulse areas over [0, 2]π.
pub fn default_map_areas() -> Vec<f64> {
    linspace(0.0, 2.0, 61)
}

/// 61 fine delays over [0, 11] fs.
pub fn default_map_fine_delays() -> Vec<f64> {
    linspace(0.0, 11.0, 61)
}

fn check_grid(axis: &'static str, values: &[f64]) -> Result<(), ExperimentError> {
    if values.is_empty() {
        return Err(ExperimentError::InvalidGrid { axis, reason: "empty".into() });
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(ExperimentError::InvalidGrid { axis, reason: format!("non-finite value {v}") });
    }
    Ok(())
}

fn check_areas(values: &[f64]) -> Result<(), ExperimentError> {
    check_grid("area_pi", values)?;
    if let Some(v) = values.iter().find(|&&v| v < 0.0) {
        return Err(ExperimentError::InvalidGrid { axis: "area_pi", reason: format!("negative area {v}") });
    }
    Ok(())
}

/// Template pulse rescaled to `area_pi`·π.
fn shaped(template: &PulseSequence, area_pi: f64) -> Pulse {
    Pulse::with_area(area_pi * PI, template.pulse.fwhm, template.pulse.center)
}

/// Signal after one pulse versus its area (in units of π).
pub fn rabi_sweep(sim: &Simulator, template: &PulseSequence, areas_pi: &[f64]) -> Result<SweepResult, ExperimentError> {
    check_areas(areas_pi)?;
    let single = PulseSequence { second_pulse: false, ..*template };
    single.validate()?;
    let batch = run_points(areas_pi.len(), sim.threads, |k| {
        sim.point(&PulseSequence::single(shaped(&single, areas_pi[k]), single.detuning))
    });
    Ok(SweepResult {
        axes: vec![Axis::new("area_pi", "pi", areas_pi.to_vec())],
        values: batch.values,
        value_name: "signal".into(),
        stats: batch.stats,
        manifest: manifest("rabi", sim, &single),
        failures: batch.failures,
    })
}

/// Rabi curves on a grid of detunings (GHz); rows are detunings.
pub fn rabi_detuning_sweep(
    sim: &Simulator,
    template: &PulseSequence,
    detunings: &[f64],
    areas_pi: &[f64],
) -> Result<SweepResult, ExperimentError> {
    check_grid("detuning_ghz", detunings)?;
    check_areas(areas_pi)?;
    let single = PulseSequence { second_pulse: false, ..*template };
    single.validate()?;
    let n = areas_pi.len();
    let batch = run_points(detunings.len() * n, sim.threads, |k| {
        sim.point(&PulseSequence::single(shaped(&single, areas_pi[k % n]), detunings[k / n]))
    });
    Ok(SweepResult {
        axes: vec![Axis::new("detuning_ghz", "GHz", detunings.to_vec()), Axis::new("area_pi", "pi", areas_pi.to_vec())],
        values: batch.values,
        value_name: "signal".into(),
        stats: batch.stats,
        manifest: manifest("rabi_detuning", sim, &single),
        failures: batch.failures,
    })
}

fn pair(template: &PulseSequence, area_pi: f64, coarse: f64, fine: f64) -> PulseSequence {
    PulseSequence::pair(shaped(template, area_pi), coarse, fine, template.detuning)
}

/// Two pulses of `area_pi`·π each, separated by the template coarse delay
/// plus each fine delay (fs).
pub fn ramsey_fine_scan(
    sim: &Simulator,
    template: &PulseSequence,
    area_pi: f64,
    fine_delays: &[f64],
) -> Result<SweepResult, ExperimentError> {
    check_areas(&[area_pi])?;
    check_grid("fine_delay_fs", fine_delays)?;
    let seq = PulseSequence { second_pulse: true, pulse: shaped(template, area_pi), ..*template };
    seq.validate()?;
    let batch = run_points(fine_delays.len(), sim.threads, |k| {
        sim.point(&pair(template, area_pi, template.coarse_delay, fine_delays[k]))
    });
    Ok(SweepResult {
        axes: vec![Axis::new("fine_delay_fs", "fs", fine_delays.to_vec())],
        values: batch.values,
        value_name: "signal".into(),
        stats: batch.stats,
        manifest: manifest("ramsey", sim, &seq),
        failures: batch.failures,
    })
}

/// Signal over (per-pulse area, fine delay) at the template coarse delay.
pub fn control_map(
    sim: &Simulator,
    template: &PulseSequence,
    areas_pi: &[f64],
    fine_delays: &[f64],
) -> Result<SweepResult, ExperimentError> {
    check_areas(areas_pi)?;
    check_grid("fine_delay_fs", fine_delays)?;
    let seq = PulseSequence { second_pulse: true, ..*template };
    seq.validate()?;
    let n = fine_delays.len();
    let batch = run_points(areas_pi.len() * n, sim.threads, |k| {
        sim.point(&pair(template, areas_pi[k / n], template.coarse_delay, fine_delays[k % n]))
    });
    Ok(SweepResult {
        axes: vec![
            Axis::new("area_pi", "pi", areas_pi.to_vec()),
            Axis::new("fine_delay_fs", "fs", fine_delays.to_vec()),
        ],
        values: batch.values,
        value_name: "signal".into(),
        stats: batch.stats,
        manifest: manifest("map", sim, &seq),
        failures: batch.failures,
    })
}

/// Fringe amplitude versus coarse delay with its decay fits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceScan {
    /// Signal over (coarse delay, fine delay).
    pub fringes: SweepResult,
    /// Fitted fringe amplitude per coarse delay.
    pub amplitudes: SweepResult,
    pub fringe_fits: Vec<FitReport>,
    /// Exponential fits of amplitude versus coarse delay (ps).
    pub decay: DecayFits,
}

/// Ramsey fine scans at each coarse delay (ps).
pub fn coherence_fringes(
    sim: &Simulator,
    template: &PulseSequence,
    area_pi: f64,
    coarse_delays: &[f64],
    fine_delays: &[f64],
) -> Result<SweepResult, ExperimentError> {
    check_areas(&[area_pi])?;
    check_grid("coarse_delay_ps", coarse_delays)?;
    check_grid("fine_delay_fs", fine_delays)?;
    let seq = PulseSequence { second_pulse: true, pulse: shaped(template, area_pi), ..*template };
    seq.validate()?;
    let n = fine_delays.len();
    let batch = run_points(coarse_delays.len() * n, sim.threads, |k| {
        sim.point(&pair(template, area_pi, coarse_delays[k / n], fine_delays[k % n]))
    });
    Ok(SweepResult {
        axes: vec![
            Axis::new("coarse_delay_ps", "ps", coarse_delays.to_vec()),
            Axis::new("fine_delay_fs", "fs", fine_delays.to_vec()),
        ],
        values: batch.values,
        value_name: "signal".into(),
        stats: batch.stats,
        manifest: manifest("coherence", sim, &seq),
        failures: batch.failures,
    })
}

/// Fits every fringe row of `fringes` and the decay of the amplitudes.
pub fn analyze_coherence(fringes: SweepResult) -> Result<CoherenceScan, ExperimentError> {
    let fringes = fringes.into_complete()?;
    let coarse = fringes.axes[0].values.clone();
    let fine = fringes.axes[1].values.clone();
    let m = &fringes.manifest;
    let hint = laser_frequency(&m.params, m.sequence.detuning) * 1e-6;
    let mut fits = Vec::with_capacity(coarse.len());
    for (i, &c) in coarse.iter().enumerate() {
        let r = fit_sinusoid(&fine, fringes.row(i), hint)
            .map_err(|source| ExperimentError::FringeFit { coarse_delay_ps: c, source })?;
        fits.push(r);
    }
    let amps: Vec<f64> = fits.iter().map(|r| r.get("amplitude").unwrap_or(f64::NAN)).collect();
    let decay = fit_exponential(&coarse, &amps).map_err(ExperimentError::DecayFit)?;
    let amplitudes = SweepResult {
        axes: vec![fringes.axes[0].clone()],
        values: amps,
        value_name: "amplitude".into(),
        stats: fringes.stats,
        manifest: fringes.manifest.clone(),
        failures: Vec::new(),
    };
    Ok(CoherenceScan { fringes, amplitudes, fringe_fits: fits, decay })
}

/// [`coherence_fringes`] followed by [`analyze_coherence`].
pub fn coherence_scan(
    sim: &Simulator,
    template: &PulseSequence,
    area_pi: f64,
    coarse_delays: &[f64],
    fine_delays: &[f64],
) -> Result<CoherenceScan, ExperimentError> {
    analyze_coherence(coherence_fringes(sim, template, area_pi, coarse_delays, fine_delays)?)
}
