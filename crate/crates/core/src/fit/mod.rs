// SPDX-License-Identifier: Apache-2.0

//! Curve fits: fringe sinusoids, exponential decays and the mapping of a
//! measured power axis onto simulated pulse area.

mod calibration;
mod exponential;
pub mod lm;
mod sinusoid;
mod spline;

use serde::{Deserialize, Serialize};

pub use calibration::{calibrate_power_axis, CalibrationResiduals};
pub use exponential::{fit_exponential, fit_exponential_with, DecayFits, ExponentialResiduals};
pub use lm::{jacobian_check, levenberg_marquardt, LmOptions, LmOutcome, Residuals};
pub use sinusoid::{fit_sinusoid, SinusoidResiduals};
pub use spline::CubicSpline;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("precondition failed: {0}")]
    Precondition(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub unit: String,
    pub value: f64,
    /// One standard deviation from the covariance diagonal; `None` when the
    /// covariance is unavailable.
    pub std_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub parameters: Vec<FitParameter>,
    /// Root-mean-square residual.
    pub residual_norm: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub covariance: Option<Vec<Vec<f64>>>,
    /// Parameters are not identifiable from the data (e.g. flat input).
    pub degenerate: bool,
}

impl FitReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub(crate) fn from_outcome(model: &str, names: &[(&str, &str)], out: &LmOutcome) -> Self {
        let cov = out.covariance();
        let parameters = names
            .iter()
            .enumerate()
            .map(|(k, (name, unit))| FitParameter {
                name: (*name).to_string(),
                unit: (*unit).to_string(),
                value: out.params[k],
                std_error: cov.as_ref().map(|c| c[(k, k)].max(0.0).sqrt()),
            })
            .collect();
        Self {
            model: model.to_string(),
            parameters,
            residual_norm: out.rms(),
            gradient_norm: out.gradient_norm,
            converged: out.converged,
            iterations: out.iterations,
            covariance: cov.map(|c| c.row_iter().map(|r| r.iter().copied().collect()).collect()),
            degenerate: false,
        }
    }
}
