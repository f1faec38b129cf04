// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmOptions, Residuals};
use super::{FitError, FitParameter, FitReport};

/// y = a0·exp(−x/tau) + baseline, parameters `[a0, tau, baseline]`. With
/// `with_baseline = false` the baseline is pinned to zero and only
/// `[a0, tau]` are free.
pub struct ExponentialResiduals<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub with_baseline: bool,
}

impl Residuals for ExponentialResiduals<'_> {
    fn len(&self) -> usize {
        self.x.len()
    }

    fn n_params(&self) -> usize {
        if self.with_baseline {
            3
        } else {
            2
        }
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        let b = if self.with_baseline { p[2] } else { 0.0 };
        for ((o, &x), &y) in out.iter_mut().zip(self.x).zip(self.y) {
            *o = p[0] * (-x / p[1]).exp() + b - y;
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
        for (i, &x) in self.x.iter().enumerate() {
            let e = (-x / p[1]).exp();
            out[(i, 0)] = e;
            out[(i, 1)] = p[0] * e * x / (p[1] * p[1]);
            if self.with_baseline {
                out[(i, 2)] = 1.0;
            }
        }
    }
}

/// Decay fitted both with a free baseline and with the baseline at zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFits {
    pub with_baseline: FitReport,
    pub without_baseline: FitReport,
}

fn log_linear(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, &v)| v > 0.0).map(|(&a, &v)| (a, v.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    if slope >= 0.0 {
        return None;
    }
    let intercept = my - slope * mx;
    Some((intercept.exp(), -1.0 / slope))
}

fn degenerate_report(model: &str, y: &[f64], with_baseline: bool) -> FitReport {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let p = |name: &str, unit: &str, value: f64| FitParameter {
        name: name.into(),
        unit: unit.into(),
        value,
        std_error: None,
    };
    let mut parameters = vec![p("a0", "signal", 0.0), p("tau", "x", f64::NAN)];
    if with_baseline {
        parameters.push(p("baseline", "signal", mean));
    }
    let rms = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
    FitReport {
        model: model.into(),
        parameters,
        residual_norm: rms,
        gradient_norm: f64::NAN,
        converged: false,
        iterations: 0,
        covariance: None,
        degenerate: true,
    }
}

/// Fits one variant of the decay model.
pub fn fit_exponential_with(x: &[f64], y: &[f64], with_baseline: bool) -> Result<FitReport, FitError> {
    if x.len() != y.len() {
        return Err(FitError::Precondition(format!("x has {} points but y has {}", x.len(), y.len())));
    }
    if x.len() < 5 {
        return Err(FitError::Precondition(format!("need at least 5 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(FitError::Precondition("non-finite data".into()));
    }
    if y.iter().any(|&v| v < 0.0) {
        return Err(FitError::Precondition("amplitudes must be non-negative".into()));
    }
    let model = if with_baseline { "a0*exp(-x/tau) + baseline" } else { "a0*exp(-x/tau)" };
    let (ymin, ymax) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if ymax - ymin <= 1e-12 * (1.0 + ymax.abs()) {
        return Ok(degenerate_report(model, y, with_baseline));
    }

    let (shift, b0) = if with_baseline { (ymin, ymin) } else { (0.0, 0.0) };
    let shifted: Vec<f64> = y.iter().map(|v| v - shift).collect();
    let span = x.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v)) - x.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let (a0, tau0) = log_linear(x, &shifted).unwrap_or((ymax - shift, span.max(1e-300)));
    let mut p0 = vec![a0, tau0];
    if with_baseline {
        p0.push(b0);
    }
    let problem = ExponentialResiduals { x, y, with_baseline };
    let out = levenberg_marquardt(&problem, &p0, &LmOptions::default());
    let mut names = vec![("a0", "signal"), ("tau", "x")];
    if with_baseline {
        names.push(("baseline", "signal"));
    }
    let mut report = FitReport::from_outcome(model, &names, &out);
    let tau = out.params[1];
    report.degenerate = !(tau > 0.0) || !tau.is_finite();
    Ok(report)
}

/// Fits the decay with and without a baseline.
pub fn fit_exponential(x: &[f64], y: &[f64]) -> Result<DecayFits, FitError> {
    Ok(DecayFits {
        with_baseline: fit_exponential_with(x, y, true)?,
        without_baseline: fit_exponential_with(x, y, false)?,
    })
}
