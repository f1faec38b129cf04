// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::analysis::rabi_extrema;
use super::sweeps::rabi_sweep;
use super::{ExperimentError, Simulator, SolverSettings};
use crate::trion::{PulseSequence, SystemParams};

/// Contrast of the second Rabi cycle relative to the first:
/// (S(≈3π) − S(≈4π)) / (S(≈π) − S(≈2π)). `None` if the curve lacks two
/// maxima followed by two minima.
pub fn rabi_damping_ratio(areas_pi: &[f64], values: &[f64]) -> Option<f64> {
    let e = rabi_extrema(areas_pi, values, 1e-3);
    if e.maxima.len() < 2 || e.minima.len() < 2 {
        return None;
    }
    let first = e.maxima[0].1 - e.minima[0].1;
    let second = e.maxima[1].1 - e.minima[1].1;
    (first > 0.0).then(|| second / first)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaCalibration {
    pub kappa_ns: f64,
    pub ratio: f64,
    pub target: f64,
    pub evaluations: usize,
}

/// Finds κ (ns) such that the on-resonance Rabi curve over `areas_pi` has
/// the requested [`rabi_damping_ratio`]. Bisects in log κ over
/// `[kappa_lo, kappa_hi]`.
pub fn calibrate_kappa(
    params: &SystemParams,
    solver: &SolverSettings,
    template: &PulseSequence,
    areas_pi: &[f64],
    target: f64,
    (kappa_lo, kappa_hi): (f64, f64),
) -> Result<KappaCalibration, ExperimentError> {
    let mut evaluations = 0;
    let mut ratio_at = |kappa: f64| -> Result<f64, ExperimentError> {
        evaluations += 1;
        let sim = Simulator::new(SystemParams { phonon_kappa: kappa, ..params.clone() }, solver.clone())?;
        let curve = rabi_sweep(&sim, template, areas_pi)?.into_complete()?;
        rabi_damping_ratio(areas_pi, &curve.values).ok_or(ExperimentError::InvalidGrid {
            axis: "area_pi",
            reason: format!("no second Rabi cycle resolved at kappa = {kappa}"),
        })
    };
    let (mut lo, mut hi) = (kappa_lo.ln(), kappa_hi.ln());
    let r_lo = ratio_at(kappa_lo)?;
    let r_hi = ratio_at(kappa_hi)?;
    if !(r_lo >= target && target >= r_hi) {
        return Err(ExperimentError::InvalidGrid {
            axis: "phonon_kappa",
            reason: format!("target {target} not bracketed: ratio {r_lo} at {kappa_lo}, {r_hi} at {kappa_hi}"),
        });
    }
    let mut ratio = r_lo;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        ratio = ratio_at(mid.exp())?;
        if ratio > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-4 {
            break;
        }
    }
    let kappa_ns = (0.5 * (lo + hi)).exp();
    Ok(KappaCalibration { kappa_ns, ratio, target, evaluations })
}
